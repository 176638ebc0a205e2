#pragma once

// Leading-order relative entropy H(P | P^eps) as a quadratic form in
// u_i = eps_i^2, and the weight moments it is built from.

#include "abcre/models.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace abcre {

// Raw moments E[eta^k] of the natural parameters for multi-indices k of
// total degree <= 4.
class EtaMomentTable {
 public:
  explicit EtaMomentTable(std::size_t q);

  static EtaMomentTable from_posterior(const Params& post);

  std::size_t q() const noexcept { return q_; }
  void set(std::vector<int> powers, double value);
  double at(std::span<const int> powers) const;
  // E[eta_i^a eta_j^b]; i == j folds the powers together.
  double at(std::size_t i, int a, std::size_t j, int b) const;

 private:
  std::size_t q_;
  std::map<std::vector<int>, double> values_;
};

class REQuadraticForm {
 public:
  // cross(i, j) for i < j is the coefficient of u_i u_j; the lower triangle
  // is mirrored and the diagonal ignored.
  REQuadraticForm(int n, std::vector<double> diag, Eigen::MatrixXd cross);

  int n() const noexcept { return n_; }
  std::size_t q() const noexcept { return diag_.size(); }
  double diag(std::size_t i) const { return diag_[i]; }
  double cross(std::size_t i, std::size_t j) const { return cross_(i, j); }

  double value(std::span<const double> eps) const;
  double value_u(std::span<const double> u) const;
  // Coefficient of eps^4 when every eps_i equals eps.
  double ball_coefficient() const;
  // Symmetric M with u^T M u equal to the form.
  Eigen::MatrixXd gram() const;

 private:
  int n_;
  std::vector<double> diag_;
  Eigen::MatrixXd cross_;
};

// The expansion is derived for n |eps| -> 0; the flag marks evaluations with
// n max_i eps_i above 0.5, a pragmatic cut.
inline constexpr double kValidityLimit = 0.5;
bool outside_validity(int n, std::span<const double> eps);

struct FormValue {
  double value;
  bool outside_validity;
};
FormValue evaluate(const REQuadraticForm& form, std::span<const double> eps);

REQuadraticForm re_form_normal(const NormalGammaParams& post, int n);

// Full eps^4 coefficient for the exponential-rate model with
// R(y) = y^(n-1) / Gamma(n), so d log R = (n-1) / (n tau*).
REQuadraticForm re_form_exponential(const GammaParams& post, int n, double tau_star);
// Leading large-n term of that coefficient, n^2 / (36 tau*^4).
double exponential_large_n_coefficient(int n, double tau_star);

// Generic assembly from natural-parameter moments and d_i log R(n tau*):
// n^4 / (8 (q+2)^2) E[(sum_i u_i w_i)^2] with
// w_i = eta_i^2 - E eta_i^2 + 2 g_i (eta_i - E eta_i).
REQuadraticForm re_form_generic(const EtaMomentTable& moments, std::span<const double> logR_grad,
                                int n);

// E[w_i] from the moment table; zero up to rounding.
double weight_mean(const EtaMomentTable& moments, std::span<const double> logR_grad,
                   std::size_t i);
double weight_mean(const Params& post, std::size_t i);

// d_i log R at the observed statistic: zero for the normal model,
// (n-1)/(n tau*) for the exponential-rate model.
SmallVec log_r_gradient(ModelKind kind, const ObservedStat& stat);

// Form for either model at its posterior.
REQuadraticForm re_form(const Params& post, const ObservedStat& stat);

}  // namespace abcre
