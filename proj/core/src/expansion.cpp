#include "abcre/expansion.hpp"

#include "abcre/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace abcre {
namespace {

void enumerate_indices(std::size_t q, int max_degree, std::vector<int>& cur, std::size_t pos,
                       int remaining, std::vector<std::vector<int>>& out) {
  if (pos == q) {
    out.push_back(cur);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    cur[pos] = k;
    enumerate_indices(q, max_degree, cur, pos + 1, remaining - k, out);
  }
  cur[pos] = 0;
}

}  // namespace

EtaMomentTable::EtaMomentTable(std::size_t q) : q_(q) {
  if (q == 0) fail(Errc::dimension_mismatch, "moment table needs q >= 1");
}

EtaMomentTable EtaMomentTable::from_posterior(const Params& post) {
  const bool normal = kind_of(post) == ModelKind::normal;
  EtaMomentTable table(normal ? 2 : 1);
  std::vector<std::vector<int>> indices;
  std::vector<int> cur(table.q_, 0);
  enumerate_indices(table.q_, 4, cur, 0, 4, indices);
  for (const auto& k : indices) {
    double v;
    if (normal) {
      // eta1^a eta2^b = (-1/2)^b mu^a lambda^(a+b)
      v = std::pow(-0.5, k[1]) * eta_moment(std::get<NormalGammaParams>(post), k[0], k[0] + k[1]);
    } else {
      v = (k[0] % 2 ? -1.0 : 1.0) * eta_moment(std::get<GammaParams>(post), k[0]);
    }
    table.set(k, v);
  }
  return table;
}

void EtaMomentTable::set(std::vector<int> powers, double value) {
  if (powers.size() != q_) fail(Errc::dimension_mismatch, "moment index has wrong length");
  values_[std::move(powers)] = value;
}

double EtaMomentTable::at(std::span<const int> powers) const {
  if (powers.size() != q_) fail(Errc::dimension_mismatch, "moment index has wrong length");
  const auto it = values_.find(std::vector<int>(powers.begin(), powers.end()));
  if (it == values_.end()) {
    std::string idx;
    for (int p : powers) idx += std::to_string(p) + ",";
    fail(Errc::incomplete_table, "missing moment E[eta^(" + idx + ")]");
  }
  return it->second;
}

double EtaMomentTable::at(std::size_t i, int a, std::size_t j, int b) const {
  if (i >= q_ || j >= q_) fail(Errc::dimension_mismatch, "moment component out of range");
  std::vector<int> k(q_, 0);
  k[i] += a;
  k[j] += b;
  return at(k);
}

REQuadraticForm::REQuadraticForm(int n, std::vector<double> diag, Eigen::MatrixXd cross)
    : n_(n), diag_(std::move(diag)), cross_(std::move(cross)) {
  const auto q = static_cast<Eigen::Index>(diag_.size());
  if (q == 0) fail(Errc::dimension_mismatch, "form needs q >= 1");
  if (cross_.rows() != q || cross_.cols() != q)
    fail(Errc::dimension_mismatch, "cross matrix must be q x q");
  for (Eigen::Index i = 0; i < q; ++i) {
    cross_(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < q; ++j) cross_(j, i) = cross_(i, j);
  }
}

double REQuadraticForm::value_u(std::span<const double> u) const {
  if (u.size() != q()) fail(Errc::dimension_mismatch, "form evaluated with wrong dimension");
  double v = 0.0;
  for (std::size_t i = 0; i < q(); ++i) {
    v += diag_[i] * u[i] * u[i];
    for (std::size_t j = i + 1; j < q(); ++j) v += cross_(i, j) * u[i] * u[j];
  }
  return v;
}

double REQuadraticForm::value(std::span<const double> eps) const {
  std::vector<double> u(eps.size());
  std::transform(eps.begin(), eps.end(), u.begin(), [](double e) { return e * e; });
  return value_u(u);
}

double REQuadraticForm::ball_coefficient() const {
  double c = std::accumulate(diag_.begin(), diag_.end(), 0.0);
  for (std::size_t i = 0; i < q(); ++i)
    for (std::size_t j = i + 1; j < q(); ++j) c += cross_(i, j);
  return c;
}

Eigen::MatrixXd REQuadraticForm::gram() const {
  Eigen::MatrixXd m = 0.5 * cross_;
  for (std::size_t i = 0; i < q(); ++i) m(i, i) = diag_[i];
  return m;
}

bool outside_validity(int n, std::span<const double> eps) {
  double m = 0.0;
  for (double e : eps) m = std::max(m, std::abs(e));
  return n * m > kValidityLimit;
}

FormValue evaluate(const REQuadraticForm& form, std::span<const double> eps) {
  return {form.value(eps), outside_validity(form.n(), eps)};
}

REQuadraticForm re_form_normal(const NormalGammaParams& post, int n) {
  const double m = post.mu0();
  const double k = post.kappa();
  const double a = post.alpha();
  const double b = post.beta();
  const double s = std::pow(static_cast<double>(n), 4) / 128.0;
  const double quartic = a * (a + 1.0) * (4.0 * a + 6.0) / std::pow(b, 4);
  const double m2 = m * m;
  const double d1 = s * (m2 * m2 * quartic + (m2 / k) * a * (a + 1.0) * (4.0 * a + 12.0) /
                                                 (b * b * b) +
                         (2.0 * a + 3.0) * a / (k * k * b * b));
  const double d2 = s * quartic / 16.0;
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(2, 2);
  cross(0, 1) = 0.5 * s * (m2 * quartic + (2.0 / k) * a * (a + 1.0) / (b * b * b));
  return REQuadraticForm(n, {d1, d2}, cross);
}

REQuadraticForm re_form_exponential(const GammaParams& post, int n, double tau_star) {
  if (!(tau_star > 0.0)) fail(Errc::invalid_statistic, "tau* must be positive");
  const double a = post.alpha();
  const double b = post.beta();
  const double c = (n - 1.0) / (n * tau_star);
  const double bracket = a * (a + 1.0) * (4.0 * a + 6.0) / std::pow(b, 4) +
                         4.0 * c * c * a / (b * b) - 8.0 * c * a * (a + 1.0) / (b * b * b);
  return REQuadraticForm(n, {std::pow(static_cast<double>(n), 4) / 72.0 * bracket},
                         Eigen::MatrixXd::Zero(1, 1));
}

double exponential_large_n_coefficient(int n, double tau_star) {
  if (!(tau_star > 0.0)) fail(Errc::invalid_statistic, "tau* must be positive");
  return static_cast<double>(n) * n / (36.0 * std::pow(tau_star, 4));
}

namespace {

// E[w_i w_j] for w_i = eta_i^2 + 2 g_i eta_i minus its mean.
double weight_covariance(const EtaMomentTable& t, std::span<const double> g, std::size_t i,
                         std::size_t j) {
  auto cov = [&](int a, int b) { return t.at(i, a, j, b) - t.at(i, a, i, 0) * t.at(j, b, j, 0); };
  return cov(2, 2) + 2.0 * g[j] * cov(2, 1) + 2.0 * g[i] * cov(1, 2) + 4.0 * g[i] * g[j] * cov(1, 1);
}

}  // namespace

REQuadraticForm re_form_generic(const EtaMomentTable& moments, std::span<const double> logR_grad,
                                int n) {
  const std::size_t q = moments.q();
  if (logR_grad.size() != q) fail(Errc::dimension_mismatch, "logR gradient has wrong length");
  const double s = std::pow(static_cast<double>(n), 4) / (8.0 * (q + 2.0) * (q + 2.0));
  std::vector<double> diag(q);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(q, q);
  for (std::size_t i = 0; i < q; ++i) {
    diag[i] = s * weight_covariance(moments, logR_grad, i, i);
    for (std::size_t j = i + 1; j < q; ++j)
      cross(i, j) = 2.0 * s * weight_covariance(moments, logR_grad, i, j);
  }
  return REQuadraticForm(n, std::move(diag), cross);
}

double weight_mean(const EtaMomentTable& moments, std::span<const double> logR_grad,
                   std::size_t i) {
  if (i >= moments.q() || logR_grad.size() != moments.q())
    fail(Errc::dimension_mismatch, "weight index out of range");
  // E[eta_i^2] - E eta_i^2 + 2 g_i (E[eta_i] - E eta_i), term by term.
  const double m1 = moments.at(i, 1, i, 0);
  const double m2 = moments.at(i, 2, i, 0);
  return (m2 - m2) + 2.0 * logR_grad[i] * (m1 - m1);
}

double weight_mean(const Params& post, std::size_t i) {
  const auto t = EtaMomentTable::from_posterior(post);
  const std::vector<double> g(t.q(), 0.0);
  return weight_mean(t, g, i);
}

SmallVec log_r_gradient(ModelKind kind, const ObservedStat& stat) {
  if (kind == ModelKind::normal) return SmallVec(stat.q(), 0.0);
  if (!(stat[0] > 0.0)) fail(Errc::invalid_statistic, "tau* must be positive");
  return {(stat.n() - 1.0) / (stat.n() * stat[0])};
}

REQuadraticForm re_form(const Params& post, const ObservedStat& stat) {
  if (const auto* p = std::get_if<NormalGammaParams>(&post)) return re_form_normal(*p, stat.n());
  return re_form_exponential(std::get<GammaParams>(post), stat.n(), stat[0]);
}

}  // namespace abcre
