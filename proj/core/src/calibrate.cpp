#include "abcre/calibrate.hpp"

#include "abcre/error.hpp"

#include <Eigen/Cholesky>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace abcre {
namespace {

void require_tol(double tol) {
  if (!(tol >= 0.0) || !std::isfinite(tol))
    fail(Errc::invalid_parameter, "tolerance must be finite and nonnegative");
}

CalibrationResult finish(const REQuadraticForm& form, std::vector<double> eps,
                         CalibrationMethod method) {
  CalibrationResult r;
  r.achieved_re = form.value(eps);
  r.volume = region_volume(eps);
  r.epsilon = std::move(eps);
  r.method = method;
  return r;
}

}  // namespace

double region_volume(std::span<const double> eps) {
  const double q = static_cast<double>(eps.size());
  double v = std::pow(std::numbers::pi, 0.5 * q) / boost::math::tgamma(0.5 * q + 1.0);
  for (double e : eps) v *= e;
  return v;
}

CalibrationResult calibrate_ball(const REQuadraticForm& form, double tol) {
  require_tol(tol);
  const double c = form.ball_coefficient();
  if (!(c > 0.0)) fail(Errc::degenerate_form, "ball coefficient must be positive");
  const double eps = std::pow(tol / c, 0.25);
  return finish(form, std::vector<double>(form.q(), eps), CalibrationMethod::closed_form);
}

CalibrationResult calibrate_ellipse_closed(const REQuadraticForm& form, double tol) {
  require_tol(tol);
  if (form.q() != 2) fail(Errc::dimension_mismatch, "closed-form ellipse needs q = 2");
  const double a = form.diag(0);
  const double b = form.diag(1);
  const double c = form.cross(0, 1);
  if (!(a > 0.0) || !(b > 0.0)) fail(Errc::degenerate_form, "diagonal coefficients must be positive");
  const double ratio = std::sqrt(b / a);
  const double denom = 2.0 * b + c * ratio;
  if (!(denom > 0.0)) fail(Errc::degenerate_form, "form is not positive along the optimal ray");
  const double u2 = std::sqrt(tol / denom);
  const double u1 = ratio * u2;
  return finish(form, {std::sqrt(u1), std::sqrt(u2)}, CalibrationMethod::closed_form);
}

CalibrationResult calibrate_ellipse_numeric(const REQuadraticForm& form, double tol,
                                            const NumericOptions& options) {
  const auto ball = calibrate_ball(form, tol);
  if (tol == 0.0) {
    auto r = ball;
    r.method = CalibrationMethod::numeric;
    return r;
  }
  const auto q = static_cast<Eigen::Index>(form.q());
  const double ub = ball.epsilon[0] * ball.epsilon[0];

  // Work in x = log(u / ub); the ball sits at x = 0 on the constraint
  // boundary c(x) = v^T M v / tol - 1 with v = exp(x).
  const Eigen::MatrixXd m = form.gram() * (ub * ub / tol);
  auto constraint = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd v = x.array().exp();
    return v.dot(m * v) - 1.0;
  };
  auto constraint_grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd v = x.array().exp();
    return 2.0 * v.cwiseProduct(m * v);
  };
  auto constraint_hess = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    const Eigen::VectorXd v = x.array().exp();
    Eigen::MatrixXd h = 2.0 * v.asDiagonal() * m * v.asDiagonal();
    h.diagonal() += 2.0 * v.cwiseProduct(m * v);
    return h;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
  const Eigen::VectorXd g0 = constraint_grad(x);
  double lambda = g0.sum() / g0.squaredNorm();
  double rho = 10.0;

  // Augmented Lagrangian for min -sum x subject to c(x) <= 0.
  auto merit = [&](const Eigen::VectorXd& y) {
    const double s = std::max(0.0, constraint(y) + lambda / rho);
    return -y.sum() + 0.5 * rho * s * s;
  };

  const double log_ub = std::log(ub);
  auto objective = [&](const Eigen::VectorXd& y) { return y.sum() + q * log_ub; };

  double prev_obj = objective(x);
  double prev_violation = 0.0;
  int outer = 0;
  bool converged = false;
  for (; outer < options.max_outer && !converged; ++outer) {
    for (int inner = 0; inner < options.max_inner; ++inner) {
      const double c = constraint(x);
      const double s = std::max(0.0, c + lambda / rho);
      const Eigen::VectorXd gc = constraint_grad(x);
      Eigen::VectorXd grad = -Eigen::VectorXd::Ones(q) + rho * s * gc;
      if (grad.lpNorm<Eigen::Infinity>() < 1e-14) break;
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(q, q);
      if (s > 0.0) hess = rho * (gc * gc.transpose() + s * constraint_hess(x));
      double shift = 0.0;
      Eigen::VectorXd step;
      for (;;) {
        Eigen::LLT<Eigen::MatrixXd> llt(hess + shift * Eigen::MatrixXd::Identity(q, q));
        if (llt.info() == Eigen::Success) {
          step = -llt.solve(grad);
          break;
        }
        shift = shift == 0.0 ? 1e-8 * (1.0 + hess.norm()) : 10.0 * shift;
      }
      const double f0 = merit(x);
      const double slope = grad.dot(step);
      double t = 1.0;
      while (t > 1e-12 && merit(x + t * step) > f0 + 1e-4 * t * slope) t *= 0.5;
      x += t * step;
      if ((t * step).lpNorm<Eigen::Infinity>() < 1e-15) break;
    }
    const double c = constraint(x);
    lambda = std::max(0.0, lambda + rho * c);
    const double violation = std::abs(c);
    const double obj = objective(x);
    const double change = std::abs(obj - prev_obj) / std::max(1.0, std::abs(obj));
    converged = violation < options.violation_tol && change < options.objective_tol;
    if (!converged && outer > 0 && violation > 0.25 * prev_violation) rho *= 2.0;
    prev_obj = obj;
    prev_violation = violation;
  }
  if (!converged)
    fail(Errc::non_convergence, "augmented Lagrangian did not converge in " +
                                    std::to_string(options.max_outer) + " outer iterations");

  std::vector<double> u(q);
  for (Eigen::Index i = 0; i < q; ++i) u[i] = ub * std::exp(x[i]);
  // Radial projection onto the constraint surface removes the residual
  // violation; form(s u) = s^2 form(u).
  const double scale = std::sqrt(tol / form.value_u(u));
  std::vector<double> eps(q);
  for (Eigen::Index i = 0; i < q; ++i) eps[i] = std::sqrt(scale * u[i]);
  auto r = finish(form, std::move(eps), CalibrationMethod::numeric);
  r.outer_iterations = outer;
  r.multiplier = lambda;
  return r;
}

}  // namespace abcre
