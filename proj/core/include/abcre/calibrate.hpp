#pragma once

// Threshold selection: maximize the acceptance-region volume subject to the
// leading-order relative entropy staying at or below a tolerance.

#include "abcre/expansion.hpp"

#include <vector>

namespace abcre {

enum class CalibrationMethod { closed_form, numeric };

struct CalibrationResult {
  std::vector<double> epsilon;
  double achieved_re = 0.0;
  double volume = 0.0;
  CalibrationMethod method = CalibrationMethod::closed_form;
  // Numeric method only.
  int outer_iterations = 0;
  double multiplier = 0.0;
};

// Volume of the axis-aligned ellipsoid with semi-axes eps.
double region_volume(std::span<const double> eps);

CalibrationResult calibrate_ball(const REQuadraticForm& form, double tol);
CalibrationResult calibrate_ellipse_closed(const REQuadraticForm& form, double tol);

struct NumericOptions {
  int max_outer = 200;
  int max_inner = 100;
  double violation_tol = 1e-10;
  double objective_tol = 1e-10;
};

// Augmented Lagrangian in u = eps^2 for max sum log u_i s.t. u^T M u <= tol,
// started from the ball solution. Throws non_convergence at the cap.
CalibrationResult calibrate_ellipse_numeric(const REQuadraticForm& form, double tol,
                                            const NumericOptions& options = {});

}  // namespace abcre
