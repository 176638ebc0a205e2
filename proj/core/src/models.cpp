#include "abcre/models.hpp"

#include "abcre/error.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace abcre {
namespace {

using boost::math::lgamma;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void require_normal_stat(const ObservedStat& stat) {
  if (stat.q() != 2)
    fail(Errc::dimension_mismatch, "normal model needs a 2-component statistic");
  if (stat.n() >= 2 && !positive_finite(stat[1]))
    fail(Errc::invalid_statistic, "s2 must be positive, got " + std::to_string(stat[1]));
}

void require_exponential_stat(const ObservedStat& stat) {
  if (stat.q() != 1)
    fail(Errc::dimension_mismatch, "exponential model needs a 1-component statistic");
  if (!positive_finite(stat[0]))
    fail(Errc::invalid_statistic, "xbar must be positive, got " + std::to_string(stat[0]));
}

double log_gamma_pdf(double x, double alpha, double beta) {
  return alpha * std::log(beta) - lgamma(alpha) + (alpha - 1.0) * std::log(x) - beta * x;
}

double log_normal_gamma_pdf(const NormalGammaParams& p, double mu, double lambda) {
  const double prec = p.kappa() * lambda;
  const double d = mu - p.mu0();
  return 0.5 * std::log(prec / (2.0 * std::numbers::pi)) - 0.5 * prec * d * d +
         log_gamma_pdf(lambda, p.alpha(), p.beta());
}

// log of (s2)^((n-3)/2) sqrt(n) (2 pi)^((n-1)/2) ((n-1)/2)^((n-1)/2) / Gamma((n-1)/2),
// the factor turning the raw-data likelihood into the (xbar, s2) density.
double log_summary_volume(int n, double s2) {
  const double k = 0.5 * (n - 1);
  return 0.5 * std::log(static_cast<double>(n)) + k * std::log(2.0 * std::numbers::pi) +
         k * std::log(k) - lgamma(k) + (k - 1.0) * std::log(s2);
}

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  return kind == ModelKind::normal ? "normal" : "exponential_rate";
}

NormalGammaParams::NormalGammaParams(double mu0, double kappa, double alpha, double beta)
    : mu0_(mu0), kappa_(kappa), alpha_(alpha), beta_(beta) {
  if (!std::isfinite(mu0) || !positive_finite(kappa) || !positive_finite(alpha) ||
      !positive_finite(beta))
    fail(Errc::invalid_parameter, "normal-gamma needs finite mu0 and kappa, alpha, beta > 0");
}

GammaParams::GammaParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!positive_finite(alpha) || !positive_finite(beta))
    fail(Errc::invalid_parameter, "gamma needs alpha, beta > 0");
}

ModelKind kind_of(const Params& params) noexcept {
  return std::holds_alternative<NormalGammaParams>(params) ? ModelKind::normal
                                                           : ModelKind::exponential_rate;
}

ObservedStat::ObservedStat(int n, SmallVec tau) : n_(n), tau_(tau) {
  if (n < 0) fail(Errc::invalid_statistic, "sample size must be nonnegative");
  if (tau_.empty()) fail(Errc::dimension_mismatch, "statistic must have at least one component");
  for (double t : tau_)
    if (!std::isfinite(t)) fail(Errc::invalid_statistic, "statistic must be finite");
}

ObservedStat ObservedStat::normal(int n, double xbar, double s2) {
  ObservedStat s(n, SmallVec{xbar, s2});
  require_normal_stat(s);
  return s;
}

ObservedStat ObservedStat::exponential(int n, double xbar) {
  ObservedStat s(n, SmallVec{xbar});
  require_exponential_stat(s);
  return s;
}

double Theta::mu() const {
  if (c_.size() != 2) fail(Errc::dimension_mismatch, "mu needs a normal-model theta");
  return c_[0];
}

double Theta::lambda() const {
  if (c_.size() != 2) fail(Errc::dimension_mismatch, "lambda needs a normal-model theta");
  return c_[1];
}

double Theta::rate() const {
  if (c_.size() != 1) fail(Errc::dimension_mismatch, "rate needs an exponential-model theta");
  return c_[0];
}

NormalGammaParams update_normal(const NormalGammaParams& prior, const ObservedStat& stat) {
  require_normal_stat(stat);
  if (stat.n() == 0) return prior;
  const double n = stat.n();
  const double xbar = stat[0];
  const double s2 = stat[1];
  const double k = prior.kappa();
  const double d = xbar - prior.mu0();
  return NormalGammaParams((k * prior.mu0() + n * xbar) / (k + n), k + n, prior.alpha() + 0.5 * n,
                           prior.beta() + 0.5 * (n - 1.0) * s2 + k * n * d * d / (2.0 * (k + n)));
}

GammaParams update_exponential(const GammaParams& prior, const ObservedStat& stat) {
  require_exponential_stat(stat);
  const double n = stat.n();
  return GammaParams(prior.alpha() + n, prior.beta() + n * stat[0]);
}

Params update(const Params& prior, const ObservedStat& stat) {
  if (const auto* p = std::get_if<NormalGammaParams>(&prior)) return update_normal(*p, stat);
  return update_exponential(std::get<GammaParams>(prior), stat);
}

SmallVec natural_parameters(const Theta& theta) {
  if (theta.size() == 2) return {theta[0] * theta[1], -0.5 * theta[1]};
  return {-theta.rate()};
}

double log_posterior_density(const Params& post, const Theta& theta) {
  if (const auto* p = std::get_if<NormalGammaParams>(&post)) {
    const double lambda = theta.lambda();
    if (!(lambda > 0.0)) fail(Errc::support_violation, "lambda must be positive");
    return log_normal_gamma_pdf(*p, theta.mu(), lambda);
  }
  const auto& g = std::get<GammaParams>(post);
  const double r = theta.rate();
  if (!(r > 0.0)) fail(Errc::support_violation, "rate must be positive");
  return log_gamma_pdf(r, g.alpha(), g.beta());
}

double posterior_density(const Params& post, const Theta& theta) {
  return std::exp(log_posterior_density(post, theta));
}

double log_stat_likelihood(const ObservedStat& stat, const Theta& theta) {
  const double n = stat.n();
  if (theta.size() == 2) {
    require_normal_stat(stat);
    if (stat.n() < 2) fail(Errc::invalid_statistic, "normal model needs n >= 2");
    const double mu = theta.mu();
    const double lambda = theta.lambda();
    if (!(lambda > 0.0)) fail(Errc::support_violation, "lambda must be positive");
    const double d = stat[0] - mu;
    const double k = n - 1.0;
    const double v = k * lambda * stat[1];
    const double log_chi2 = (0.5 * k - 1.0) * std::log(v) - 0.5 * v - 0.5 * k * std::log(2.0) -
                            lgamma(0.5 * k);
    return 0.5 * std::log(n * lambda / (2.0 * std::numbers::pi)) - 0.5 * n * lambda * d * d +
           log_chi2 + std::log(k * lambda);
  }
  require_exponential_stat(stat);
  if (stat.n() < 1) fail(Errc::invalid_statistic, "exponential model needs n >= 1");
  const double r = theta.rate();
  if (!(r > 0.0)) fail(Errc::support_violation, "rate must be positive");
  // xbar ~ Gamma(n, rate n theta)
  return log_gamma_pdf(stat[0], n, n * r);
}

MarginalDensity marginal_stat_density(const Params& prior, const ObservedStat& stat) {
  if (stat.n() < 1) fail(Errc::invalid_statistic, "marginal density needs n >= 1");
  if (const auto* p = std::get_if<NormalGammaParams>(&prior)) {
    const auto post = update_normal(*p, stat);
    const double reduced = -post.alpha() * std::log(post.beta());
    const double log_b = lgamma(post.alpha()) - lgamma(p->alpha()) +
                         0.5 * std::log(p->kappa() / post.kappa()) +
                         p->alpha() * std::log(p->beta()) -
                         0.5 * stat.n() * std::log(2.0 * std::numbers::pi);
    return {log_b + reduced, reduced};
  }
  const auto& g = std::get<GammaParams>(prior);
  const auto post = update_exponential(g, stat);
  const double n = stat.n();
  const double reduced = (n - 1.0) * std::log(stat[0]) - post.alpha() * std::log(post.beta());
  const double log_const = n * std::log(n) - lgamma(n) + g.alpha() * std::log(g.beta()) -
                           lgamma(g.alpha()) + lgamma(post.alpha());
  return {log_const + reduced, reduced};
}

double log_sampling_density(const Params& prior, const ObservedStat& stat) {
  const auto m = marginal_stat_density(prior, stat);
  if (kind_of(prior) == ModelKind::exponential_rate) return m.log_exact;
  if (stat.n() < 2) fail(Errc::invalid_statistic, "normal model needs n >= 2");
  return m.log_exact + log_summary_volume(stat.n(), stat[1]);
}

ObservedStat sample_stat(const Theta& theta, int n, Rng& rng) {
  if (theta.size() == 2) {
    if (n < 2) fail(Errc::invalid_statistic, "normal model needs n >= 2");
    const double lambda = theta.lambda();
    if (!(lambda > 0.0)) fail(Errc::support_violation, "lambda must be positive");
    boost::random::normal_distribution<double> z;
    boost::random::gamma_distribution<double> chi2(0.5 * (n - 1), 2.0);
    const double xbar = theta.mu() + z(rng) / std::sqrt(n * lambda);
    const double s2 = chi2(rng) / ((n - 1) * lambda);
    return ObservedStat(n, SmallVec{xbar, s2});
  }
  if (n < 1) fail(Errc::invalid_statistic, "exponential model needs n >= 1");
  const double r = theta.rate();
  if (!(r > 0.0)) fail(Errc::support_violation, "rate must be positive");
  boost::random::gamma_distribution<double> g(n, 1.0);
  return ObservedStat(n, SmallVec{g(rng) / (n * r)});
}

Theta sample_prior(const Params& prior, Rng& rng) {
  if (const auto* p = std::get_if<NormalGammaParams>(&prior)) {
    boost::random::gamma_distribution<double> g(p->alpha(), 1.0 / p->beta());
    boost::random::normal_distribution<double> z;
    const double lambda = g(rng);
    return Theta::normal(p->mu0() + z(rng) / std::sqrt(p->kappa() * lambda), lambda);
  }
  const auto& gp = std::get<GammaParams>(prior);
  boost::random::gamma_distribution<double> g(gp.alpha(), 1.0 / gp.beta());
  return Theta::rate(g(rng));
}

double gamma_power_moment(double alpha, double beta, int p) {
  double m = 1.0;
  if (p >= 0) {
    for (int i = 0; i < p; ++i) m *= (alpha + i) / beta;
    return m;
  }
  if (!(alpha > -p))
    fail(Errc::moment_undefined,
         "E[lambda^" + std::to_string(p) + "] needs alpha > " + std::to_string(-p));
  for (int i = 1; i <= -p; ++i) m *= beta / (alpha - i);
  return m;
}

double eta_moment(const NormalGammaParams& post, int a, int b) {
  if (a < 0) fail(Errc::invalid_parameter, "mu power must be nonnegative");
  // mu = mu_n + Z / sqrt(kappa_n lambda); expand in even powers of Z.
  double total = 0.0;
  double binom = 1.0;       // C(a, k)
  double z_moment = 1.0;    // E[Z^k] = (k-1)!!
  for (int k = 0; k <= a; k += 2) {
    const double mu_part = std::pow(post.mu0(), a - k);
    const double lam = gamma_power_moment(post.alpha(), post.beta(), b - k / 2);
    total += binom * mu_part * z_moment * std::pow(post.kappa(), -0.5 * k) * lam;
    binom *= static_cast<double>((a - k) * (a - k - 1)) / ((k + 1) * (k + 2));
    z_moment *= k + 1;
  }
  return total;
}

double eta_moment(const GammaParams& post, int k) {
  return gamma_power_moment(post.alpha(), post.beta(), k);
}

double eta_moment(const Params& post, std::span<const int> powers) {
  if (const auto* p = std::get_if<NormalGammaParams>(&post)) {
    if (powers.size() != 2) fail(Errc::dimension_mismatch, "normal moments take (a, b)");
    return eta_moment(*p, powers[0], powers[1]);
  }
  if (powers.size() != 1) fail(Errc::dimension_mismatch, "gamma moments take (k)");
  return eta_moment(std::get<GammaParams>(post), powers[0]);
}

}  // namespace abcre
