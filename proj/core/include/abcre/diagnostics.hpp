#pragma once

// Closed-form predictors: leading-order estimator bias sum_i eps_i^2 C_i and
// the asymptotic ellipse-to-ball ratio of mean rejection rates.

#include "abcre/expansion.hpp"

#include <span>
#include <string>
#include <vector>

namespace abcre {

struct BiasPrediction {
  std::vector<double> coefficients;
  double predicted_bias = 0.0;
  std::string observable;
};

BiasPrediction bias_normal_mean(const NormalGammaParams& post, int n, std::span<const double> eps);
// Requires alpha_n > 1.
BiasPrediction bias_normal_variance(const NormalGammaParams& post, int n,
                                    std::span<const double> eps);
BiasPrediction bias_exponential_rate(const GammaParams& post, int n, double tau_star, double eps);
// Large-n limit of the exponential-rate coefficient under a Gamma(alpha,
// beta) prior: (alpha + 2 - beta / tau*) / (3 tau*^3). The bracket
// (alpha_n + 1) / beta_n - (n - 1) / (n tau*) is itself O(1/n), so the
// prior does not drop out.
double exponential_bias_limit(const GammaParams& prior, double tau_star);

// Joint moments of the observable with the natural parameters:
// E[h], E[h eta_i] and E[h eta_i^2].
struct ObservableMoments {
  double mean = 0.0;
  std::vector<double> with_eta;
  std::vector<double> with_eta_sq;
};

// h in {mu, sigma2 = 1/lambda, lambda} for the normal model and
// {theta} for the exponential model, from closed-form posterior moments.
ObservableMoments observable_moments(const Params& post, const std::string& observable);

BiasPrediction bias_generic(const EtaMomentTable& moments, std::span<const double> logR_grad,
                            int n, std::span<const double> eps, const ObservableMoments& h,
                            std::string observable = "custom");

double rejection_ratio_normal(const NormalGammaParams& post, int n, double eps_ball,
                              std::span<const double> eps_ellipse);

// q_i = d_i^2 R / R + E eta_i^2 + 2 d_i log R E eta_i at the observed statistic.
std::vector<double> rejection_q_weights(const Params& post, const ObservedStat& stat);

double rejection_ratio_generic(std::span<const double> q_weights, int n, double eps_ball,
                               std::span<const double> eps);

}  // namespace abcre
