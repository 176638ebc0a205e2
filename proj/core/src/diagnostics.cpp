#include "abcre/diagnostics.hpp"

#include "abcre/error.hpp"

#include <cmath>

namespace abcre {
namespace {

BiasPrediction assemble(std::vector<double> coefficients, std::span<const double> eps,
                        std::string observable) {
  if (eps.size() != coefficients.size())
    fail(Errc::dimension_mismatch, "eps and bias coefficients differ in length");
  BiasPrediction b;
  for (std::size_t i = 0; i < eps.size(); ++i) b.predicted_bias += eps[i] * eps[i] * coefficients[i];
  b.coefficients = std::move(coefficients);
  b.observable = std::move(observable);
  return b;
}

}  // namespace

BiasPrediction bias_normal_mean(const NormalGammaParams& post, int n, std::span<const double> eps) {
  const double n2 = static_cast<double>(n) * n;
  const double c1 = 0.25 * n2 * (post.mu0() / post.kappa()) * (post.alpha() / post.beta());
  return assemble({c1, 0.0}, eps, "mu");
}

BiasPrediction bias_normal_variance(const NormalGammaParams& post, int n,
                                    std::span<const double> eps) {
  const double a = post.alpha();
  const double b = post.beta();
  if (!(a > 1.0)) fail(Errc::moment_undefined, "sigma2 bias needs alpha_n > 1");
  const double n2 = static_cast<double>(n) * n;
  const double m = post.mu0();
  const double c1 = n2 / 8.0 * (-2.0 * m * m * (a / b) / (a - 1.0) - (1.0 / post.kappa()) / (a - 1.0));
  const double c2 = n2 / 32.0 * (a / b) * (-2.0 / (a - 1.0));
  return assemble({c1, c2}, eps, "sigma2");
}

BiasPrediction bias_exponential_rate(const GammaParams& post, int n, double tau_star, double eps) {
  if (!(tau_star > 0.0)) fail(Errc::invalid_statistic, "tau* must be positive");
  const double a = post.alpha();
  const double b = post.beta();
  const double n2 = static_cast<double>(n) * n;
  const double c = n2 / 3.0 * (a / (b * b)) * ((a + 1.0) / b - ((n - 1.0) / n) / tau_star);
  const double e[1] = {eps};
  return assemble({c}, e, "theta");
}

double exponential_bias_limit(const GammaParams& prior, double tau_star) {
  if (!(tau_star > 0.0)) fail(Errc::invalid_statistic, "tau* must be positive");
  return (prior.alpha() + 2.0 - prior.beta() / tau_star) / (3.0 * tau_star * tau_star * tau_star);
}

ObservableMoments observable_moments(const Params& post, const std::string& observable) {
  ObservableMoments h;
  if (const auto* p = std::get_if<NormalGammaParams>(&post)) {
    // h = mu^c lambda^d; eta1 = mu lambda, eta2 = -lambda / 2.
    int c, d;
    if (observable == "mu") {
      c = 1, d = 0;
    } else if (observable == "sigma2") {
      c = 0, d = -1;
    } else if (observable == "lambda") {
      c = 0, d = 1;
    } else {
      fail(Errc::invalid_parameter, "unknown normal-model observable " + observable);
    }
    auto m = [&](int a, int b) { return eta_moment(*p, a, b); };
    h.mean = m(c, d);
    h.with_eta = {m(c + 1, d + 1), -0.5 * m(c, d + 1)};
    h.with_eta_sq = {m(c + 2, d + 2), 0.25 * m(c, d + 2)};
    return h;
  }
  if (observable != "theta") fail(Errc::invalid_parameter, "unknown exponential observable " + observable);
  const auto& g = std::get<GammaParams>(post);
  h.mean = eta_moment(g, 1);
  h.with_eta = {-eta_moment(g, 2)};
  h.with_eta_sq = {eta_moment(g, 3)};
  return h;
}

BiasPrediction bias_generic(const EtaMomentTable& moments, std::span<const double> logR_grad,
                            int n, std::span<const double> eps, const ObservableMoments& h,
                            std::string observable) {
  const std::size_t q = moments.q();
  if (logR_grad.size() != q || h.with_eta.size() != q || h.with_eta_sq.size() != q)
    fail(Errc::incomplete_table, "observable moments must cover every component");
  const double s = static_cast<double>(n) * n / (2.0 * (q + 2.0));
  std::vector<double> c(q);
  for (std::size_t i = 0; i < q; ++i) {
    const double e1 = moments.at(i, 1, i, 0);
    const double e2 = moments.at(i, 2, i, 0);
    c[i] = s * ((h.with_eta_sq[i] - h.mean * e2) + 2.0 * logR_grad[i] * (h.with_eta[i] - h.mean * e1));
  }
  return assemble(std::move(c), eps, std::move(observable));
}

double rejection_ratio_normal(const NormalGammaParams& post, int n, double eps_ball,
                              std::span<const double> eps_ellipse) {
  if (eps_ellipse.size() != 2) fail(Errc::dimension_mismatch, "normal ellipse has two axes");
  const double m = post.mu0();
  const double a = post.alpha();
  const double b = post.beta();
  const double q1 = m * m * (a + 1.0) * a / (b * b) + (1.0 / post.kappa()) * (a / b);
  const double q2 = 0.25 * (a + 1.0) * a / (b * b);
  const double n2 = static_cast<double>(n) * n;
  const double e = eps_ball;
  const double e1 = eps_ellipse[0];
  const double e2 = eps_ellipse[1];
  return (e * e / (e1 * e2)) * (1.0 + n2 * e * e / 8.0 * (q1 + q2)) /
         (1.0 + n2 * e1 * e1 / 8.0 * q1 + n2 * e2 * e2 / 8.0 * q2);
}

std::vector<double> rejection_q_weights(const Params& post, const ObservedStat& stat) {
  const auto t = EtaMomentTable::from_posterior(post);
  const auto g = log_r_gradient(kind_of(post), stat);
  std::vector<double> q(t.q());
  for (std::size_t i = 0; i < t.q(); ++i) {
    // R(y) = y^(n-1) / Gamma(n): R''/R = (n-1)(n-2) / y^2 at y = n tau*.
    double r2 = 0.0;
    if (kind_of(post) == ModelKind::exponential_rate) {
      const double y = stat.n() * stat[0];
      r2 = (stat.n() - 1.0) * (stat.n() - 2.0) / (y * y);
    }
    q[i] = r2 + t.at(i, 2, i, 0) + 2.0 * g[i] * t.at(i, 1, i, 0);
  }
  return q;
}

double rejection_ratio_generic(std::span<const double> q_weights, int n, double eps_ball,
                               std::span<const double> eps) {
  if (q_weights.size() != eps.size()) fail(Errc::dimension_mismatch, "q weights and eps differ");
  const double q = static_cast<double>(eps.size());
  const double s = static_cast<double>(n) * n / (2.0 * (q + 2.0));
  double sum_q = 0.0, weighted = 0.0, prod = 1.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sum_q += q_weights[i];
    weighted += eps[i] * eps[i] * q_weights[i];
    prod *= eps[i];
  }
  return (std::pow(eps_ball, q) / prod) * (1.0 + s * eps_ball * eps_ball * sum_q) /
         (1.0 + s * weighted);
}

}  // namespace abcre
