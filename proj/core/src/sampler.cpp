#include "abcre/sampler.hpp"

#include "abcre/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace abcre {

const char* to_string(Geometry g) noexcept {
  switch (g) {
    case Geometry::ball: return "ball";
    case Geometry::ellipse: return "ellipse";
    case Geometry::metric: return "metric";
  }
  return "unknown";
}

AcceptanceRegion AcceptanceRegion::ball(const SmallVec& center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    fail(Errc::invalid_parameter, "ball radius must be positive");
  return ellipse(center, SmallVec(center.size(), radius)).retag(Geometry::ball);
}

AcceptanceRegion AcceptanceRegion::ellipse(const SmallVec& center, const SmallVec& semi_axes) {
  if (center.empty()) fail(Errc::dimension_mismatch, "region needs a center");
  if (semi_axes.size() != center.size())
    fail(Errc::dimension_mismatch, "semi-axes and center differ in length");
  AcceptanceRegion r;
  r.geometry_ = Geometry::ellipse;
  r.center_ = center;
  r.axes_ = semi_axes;
  const auto q = static_cast<Eigen::Index>(center.size());
  r.factor_ = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    if (!(semi_axes[i] > 0.0) || !std::isfinite(semi_axes[i]))
      fail(Errc::invalid_parameter, "semi-axes must be positive");
    r.factor_(i, i) = semi_axes[i];
  }
  return r;
}

AcceptanceRegion AcceptanceRegion::metric(const SmallVec& center, const Eigen::MatrixXd& a) {
  const auto q = static_cast<Eigen::Index>(center.size());
  if (q == 0) fail(Errc::dimension_mismatch, "region needs a center");
  if (a.rows() != q || a.cols() != q) fail(Errc::dimension_mismatch, "metric must be q x q");
  if (!a.isApprox(a.transpose(), 0.0)) fail(Errc::invalid_parameter, "metric must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    fail(Errc::invalid_parameter, "metric must be positive definite");
  AcceptanceRegion r;
  r.geometry_ = Geometry::metric;
  r.center_ = center;
  r.factor_ = llt.matrixL();
  return r;
}

AcceptanceRegion AcceptanceRegion::retag(Geometry g) && {
  geometry_ = g;
  return std::move(*this);
}

bool AcceptanceRegion::contains(std::span<const double> tau) const {
  const std::size_t q = center_.size();
  if (tau.size() != q) fail(Errc::dimension_mismatch, "statistic and region differ in dimension");
  double r2 = 0.0;
  if (geometry_ != Geometry::metric) {
    for (std::size_t i = 0; i < q; ++i) {
      const double y = (tau[i] - center_[i]) / axes_[i];
      r2 += y * y;
    }
    return r2 <= 1.0;
  }
  // Forward substitution L y = tau - center; y_i reduces to d_i / L_ii
  // exactly when L is diagonal.
  SmallVec y(q);
  for (std::size_t i = 0; i < q; ++i) {
    double d = tau[i] - center_[i];
    for (std::size_t j = 0; j < i; ++j) d -= factor_(i, j) * y[j];
    y[i] = d / factor_(i, i);
    r2 += y[i] * y[i];
  }
  return r2 <= 1.0;
}

double AbcRun::mean_rejections() const {
  if (particles.empty()) fail(Errc::empty_run, "no accepted particles");
  const auto k = static_cast<std::int64_t>(particles.size());
  return static_cast<double>(total_proposals - k) / static_cast<double>(k);
}

AbcRun run_abc(const Params& prior, int n, const AcceptanceRegion& region, std::size_t k,
               std::uint64_t seed, std::int64_t max_proposals) {
  if (k < 1) fail(Errc::invalid_parameter, "K must be at least 1");
  if (max_proposals < static_cast<std::int64_t>(k))
    fail(Errc::invalid_parameter, "max_proposals must be at least K");
  const std::size_t q = kind_of(prior) == ModelKind::normal ? 2 : 1;
  if (region.dim() != q) fail(Errc::dimension_mismatch, "region dimension does not fit the model");

  AbcRun run{.particles = {}, .rejections_per_particle = {}, .total_proposals = 0, .seed = seed,
             .region = region, .n = n, .complete = true};
  run.particles.reserve(k);
  run.rejections_per_particle.reserve(k);
  Rng rng(seed);
  std::int64_t rejected = 0;
  while (run.particles.size() < k) {
    if (run.total_proposals == max_proposals) {
      run.complete = false;
      break;
    }
    ++run.total_proposals;
    const Theta theta = sample_prior(prior, rng);
    const ObservedStat stat = sample_stat(theta, n, rng);
    if (region.contains(span_of(stat.tau()))) {
      run.particles.push_back(theta);
      run.rejections_per_particle.push_back(rejected);
      rejected = 0;
    } else {
      ++rejected;
    }
  }
  return run;
}

Observable Observable::mean_mu() {
  return {"mu", [](const Theta& t) { return t.mu(); }};
}

Observable Observable::variance_sigma2() {
  return {"sigma2", [](const Theta& t) { return 1.0 / t.lambda(); }};
}

Observable Observable::precision_lambda() {
  return {"lambda", [](const Theta& t) { return t.lambda(); }};
}

Observable Observable::rate_theta() {
  return {"theta", [](const Theta& t) { return t.rate(); }};
}

Observable Observable::custom(std::string name, std::function<double(const Theta&)> h) {
  return {std::move(name), std::move(h)};
}

Estimate estimate(const AbcRun& run, const Observable& observable) {
  const std::size_t k = run.particles.size();
  if (k == 0) fail(Errc::empty_run, "cannot estimate from an empty run");
  double mean = 0.0;
  for (const auto& p : run.particles) mean += observable.h(p);
  mean /= static_cast<double>(k);
  Estimate e{.value = mean, .sd = std::nullopt, .std_error = std::nullopt};
  if (k >= 2) {
    double ss = 0.0;
    for (const auto& p : run.particles) {
      const double d = observable.h(p) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(k - 1));
    e.sd = sd;
    e.std_error = sd / std::sqrt(static_cast<double>(k));
  }
  return e;
}

}  // namespace abcre
