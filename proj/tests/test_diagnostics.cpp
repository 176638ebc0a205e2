#include "abcre/calibrate.hpp"
#include "abcre/diagnostics.hpp"
#include "abcre/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace abcre;

namespace {

const NormalGammaParams kUnitPrior(0.0, 1.0, 1.0, 1.0);

NormalGammaParams random_posterior(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return NormalGammaParams(-2.0 + 4.0 * u(rng), 0.5 + 50.0 * u(rng), 1.5 + 60.0 * u(rng),
                           0.2 + 40.0 * u(rng));
}

}  // namespace

TEST(BiasNormalMean, SecondCoefficientVanishes) {
  std::mt19937_64 rng(1);
  const double eps[] = {0.01, 0.02};
  for (int i = 0; i < 20; ++i) {
    const auto b = bias_normal_mean(random_posterior(rng), 100, eps);
    EXPECT_EQ(b.coefficients[1], 0.0);
    EXPECT_DOUBLE_EQ(b.predicted_bias, eps[0] * eps[0] * b.coefficients[0]);
  }
  EXPECT_EQ(bias_normal_mean(NormalGammaParams(0.0, 3, 4, 5), 100, eps).predicted_bias, 0.0);
}

TEST(BiasNormalVariance, NegativeCoefficients) {
  std::mt19937_64 rng(2);
  const double eps[] = {0.01, 0.02};
  for (int i = 0; i < 100; ++i) {
    const auto b = bias_normal_variance(random_posterior(rng), 100, eps);
    EXPECT_LT(b.coefficients[0], 0.0);
    EXPECT_LT(b.coefficients[1], 0.0);
  }
  const NormalGammaParams centred(0.0, 4.0, 3.0, 2.0);
  const int n = 50;
  EXPECT_NEAR(bias_normal_variance(centred, n, eps).coefficients[0],
              -(n * n / 8.0) * (1.0 / 4.0) / 2.0, 1e-12);
  EXPECT_THROW(bias_normal_variance(NormalGammaParams(0, 1, 1.0, 1), n, eps), Error);
}

TEST(BiasExponential, LargeSampleLimit) {
  for (const auto& [prior, tau] : {std::pair{GammaParams(1.0, 1.0), 1.0},
                                   std::pair{GammaParams(3.0, 0.5), 0.7},
                                   std::pair{GammaParams(0.5, 4.0), 2.0}}) {
    double prev = 1e9;
    const double limit = exponential_bias_limit(prior, tau);
    for (int n : {100, 1000, 10000, 100000, 1000000}) {
      const auto post = update_exponential(prior, ObservedStat::exponential(n, tau));
      const double dev = std::abs(bias_exponential_rate(post, n, tau, 1.0).coefficients[0] - limit);
      EXPECT_LT(dev, prev);
      prev = dev;
    }
    EXPECT_LT(prev, 1e-4 * std::max(1.0, std::abs(limit)));
  }
  // Unit prior at tau* = 1: (1 + 2 - 1) / 3.
  EXPECT_NEAR(exponential_bias_limit(GammaParams(1.0, 1.0), 1.0), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(exponential_bias_limit(GammaParams(1.0, 1.0), 0.0), Error);
  // n = 1: alpha_n = 2, beta_n = 1 + tau.
  const double c1 = bias_exponential_rate(GammaParams(2.0, 3.0), 1, 2.0, 1.0).coefficients[0];
  EXPECT_NEAR(c1, (1.0 / 3.0) * (2.0 / 9.0) * (3.0 / 3.0), 1e-15);
}

TEST(BiasGeneric, ConstantObservableHasNoBias) {
  std::mt19937_64 rng(3);
  const double eps[] = {0.01, 0.03};
  const std::vector<double> g{0.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    const auto post = random_posterior(rng);
    const auto t = EtaMomentTable::from_posterior(post);
    const double c = 2.5;
    ObservableMoments h;
    h.mean = c;
    h.with_eta = {c * t.at(0, 1, 0, 0), c * t.at(1, 1, 1, 0)};
    h.with_eta_sq = {c * t.at(0, 2, 0, 0), c * t.at(1, 2, 1, 0)};
    const auto b = bias_generic(t, g, 100, eps, h);
    EXPECT_NEAR(b.coefficients[0], 0.0, 1e-10 * std::abs(c * t.at(0, 2, 0, 0)) * 1e4);
    EXPECT_NEAR(b.coefficients[1], 0.0, 1e-10 * std::abs(c * t.at(1, 2, 1, 0)) * 1e4);
  }
}

TEST(BiasGeneric, ReproducesSpecializations) {
  std::mt19937_64 rng(4);
  const double eps[] = {0.01, 0.03};
  const std::vector<double> g{0.0, 0.0};
  for (int i = 0; i < 30; ++i) {
    const auto post = random_posterior(rng);
    const int n = 40 + 10 * i;
    const auto t = EtaMomentTable::from_posterior(post);
    const auto mu = bias_generic(t, g, n, eps, observable_moments(post, "mu"));
    const auto mu_ref = bias_normal_mean(post, n, eps);
    EXPECT_NEAR(mu.coefficients[0], mu_ref.coefficients[0],
                1e-8 * std::abs(mu_ref.coefficients[0]) + 1e-12);
    EXPECT_NEAR(mu.coefficients[1], 0.0, 1e-8 * std::abs(mu_ref.coefficients[0]) + 1e-9);
    const auto s2 = bias_generic(t, g, n, eps, observable_moments(post, "sigma2"));
    const auto s2_ref = bias_normal_variance(post, n, eps);
    for (std::size_t k = 0; k < 2; ++k)
      EXPECT_NEAR(s2.coefficients[k] / s2_ref.coefficients[k], 1.0, 1e-8);
  }
  for (int n : {5, 50, 500}) {
    const auto stat = ObservedStat::exponential(n, 1.3);
    const auto post = update_exponential(GammaParams(2.0, 1.5), stat);
    const auto g1 = log_r_gradient(ModelKind::exponential_rate, stat);
    const double e[] = {0.01};
    const auto b = bias_generic(EtaMomentTable::from_posterior(post), span_of(g1), n, e,
                                observable_moments(post, "theta"));
    EXPECT_NEAR(b.coefficients[0] / bias_exponential_rate(post, n, 1.3, 0.01).coefficients[0],
                1.0, 1e-9);
  }
}

TEST(RejectionRatio, EqualThresholdsGiveOne) {
  const auto post = update_normal(kUnitPrior, ObservedStat::normal(300, 0.1, 1.0));
  const double e[] = {0.02, 0.02};
  EXPECT_DOUBLE_EQ(rejection_ratio_normal(post, 300, 0.02, e), 1.0);
  const auto w = rejection_q_weights(post, ObservedStat::normal(300, 0.1, 1.0));
  EXPECT_DOUBLE_EQ(rejection_ratio_generic(w, 300, 0.02, e), 1.0);
}

TEST(RejectionRatio, GenericEqualsNormal) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.001, 0.05);
  for (int i = 0; i < 50; ++i) {
    const auto stat = ObservedStat::normal(100 + 10 * i, 0.1, 1.0);
    const auto post = update_normal(kUnitPrior, stat);
    const double e[] = {u(rng), u(rng)};
    const double eb = u(rng);
    const auto w = rejection_q_weights(post, stat);
    EXPECT_NEAR(rejection_ratio_generic(w, stat.n(), eb, e) /
                    rejection_ratio_normal(post, stat.n(), eb, e),
                1.0, 1e-12);
  }
}

TEST(RejectionRatio, ReferenceRowsFromPrintedThresholds) {
  struct Row {
    int n;
    double xbar, s2, eps, e1, e2, u;
  };
  // Rows whose printed two-digit thresholds pin the ratio to 2%.
  for (const Row& r : {Row{100, -0.022, 0.965, 0.083, 0.155, 0.069, 0.763},
                       Row{100, 0.061, 1.099, 0.111, 0.173, 0.094, 0.884},
                       Row{300, -0.07, 1.005, 0.054, 0.091, 0.046, 0.861}}) {
    const auto post = update_normal(kUnitPrior, ObservedStat::normal(r.n, r.xbar, r.s2));
    const double e[] = {r.e1, r.e2};
    EXPECT_NEAR(rejection_ratio_normal(post, r.n, r.eps, e), r.u, 0.02 * r.u);
  }
}

TEST(RejectionRatio, CalibratedPairsFavourEllipse) {
  // Calibrated ellipses enlarge the region; the predicted ratio drops below 1.
  for (int n : {300, 600, 1000})
    for (double tol : {0.25, 0.5, 1.0}) {
      const auto stat = ObservedStat::normal(n, 0.0, 1.0);
      const auto post = update_normal(kUnitPrior, stat);
      const auto f = re_form_normal(post, n);
      const auto b = calibrate_ball(f, tol);
      const auto e = calibrate_ellipse_closed(f, tol);
      EXPECT_GT(e.epsilon[0] * e.epsilon[1], b.epsilon[0] * b.epsilon[0]);
      EXPECT_LT(rejection_ratio_normal(post, n, b.epsilon[0], e.epsilon), 1.0);
    }
}

TEST(ObservableMoments, UnknownName) {
  EXPECT_THROW(observable_moments(Params(kUnitPrior), "kappa"), Error);
  EXPECT_THROW(observable_moments(Params(GammaParams(1, 1)), "mu"), Error);
}
