#pragma once

// Quadrature ground truth for the ABC posterior
//   f^eps(theta) = int_D f(theta | tau) f_T(tau) dtau / int_D f_T(tau) dtau,
// its relative entropy to f(theta | tau*) and its moments.
//
// The region is mapped to the unit ball through its Cholesky factor and
// integrated with a polar Gauss-Legendre rule (q = 2) or plain
// Gauss-Legendre (q = 1). Theta integrals use Gauss-Legendre on the central
// posterior mass; for the normal model mu is integrated conditionally on
// lambda over +-z_halfwidth conditional standard deviations.

#include "abcre/models.hpp"
#include "abcre/sampler.hpp"

namespace abcre {

// Coordinates in which the region is laid out around tau*. summary is
// (xbar, s2), the statistic the sampler tests. natural is (xbar, mean of
// x^2), the sufficient statistic paired with (mu lambda, -lambda/2). The
// frames coincide for the exponential model.
enum class RegionFrame { summary, natural };

// Density of the statistic over the region. conjugate uses f_T from the
// conjugate normalizers with the model's base measure (constant for the
// normal model). sampling uses the exact density of the simulated statistic.
enum class StatWeighting { conjugate, sampling };

const char* to_string(RegionFrame f) noexcept;
const char* to_string(StatWeighting w) noexcept;

struct QuadratureSpec {
  int region_nodes = 24;  // radial nodes for q = 2 (twice as many angles)
  int theta_nodes = 80;   // per theta dimension
  double tail_mass = 1e-13;
  double z_halfwidth = 12.0;
  double rel_tol = 1e-6;
  double abs_tol = 1e-14;
  bool check_convergence = true;
  RegionFrame frame = RegionFrame::summary;
  StatWeighting weighting = StatWeighting::sampling;
};

struct OracleProblem {
  Params prior;
  ObservedStat stat;
  AcceptanceRegion region;
};

// f^eps(theta) / f(theta | tau*).
double perturbed_density_ratio(const OracleProblem& p, const Theta& theta,
                               const QuadratureSpec& spec = {});
double perturbed_density(const OracleProblem& p, const Theta& theta,
                         const QuadratureSpec& spec = {});

// H = int f log(f / f^eps) dtheta.
double kl_numeric(const OracleProblem& p, const QuadratureSpec& spec = {});

// E_{f^eps}[h].
double perturbed_moment(const OracleProblem& p, const Observable& h,
                        const QuadratureSpec& spec = {});
// E_{f^eps}[h] - E_f[h] with both integrals on one theta grid.
double perturbation_bias(const OracleProblem& p, const Observable& h,
                         const QuadratureSpec& spec = {});

// Integral of theta-quadrature weights times f^eps; equals 1 for a proper
// density up to truncation.
double perturbed_mass(const OracleProblem& p, const QuadratureSpec& spec = {});

// P(tau in D) under the exact marginal of the simulated statistic.
double acceptance_probability(const Params& prior, const ObservedStat& stat,
                              const AcceptanceRegion& region, const QuadratureSpec& spec = {});

}  // namespace abcre
