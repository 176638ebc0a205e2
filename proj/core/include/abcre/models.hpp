#pragma once

// Conjugate models: normal data with unknown mean and precision under a
// normal-gamma prior, and exponential data with unknown rate under a gamma
// prior.
//
// The sufficient statistic is simulated directly from its exact sampling
// distribution rather than by summarizing n raw draws. For the normal model
// xbar ~ N(mu, 1/(n lambda)) and (n-1) s2 lambda ~ chi2(n-1) independently;
// for the exponential model n xbar ~ Gamma(n, rate theta). Both are
// distributionally identical to summarizing raw data.

#include <boost/container/static_vector.hpp>

#include <cstddef>
#include <random>
#include <span>
#include <variant>

namespace abcre {

inline constexpr std::size_t kMaxDim = 2;
using SmallVec = boost::container::static_vector<double, kMaxDim>;
using Rng = std::mt19937_64;

// static_vector iterators are not contiguous-iterator types, so spans are
// built from data() and size().
inline std::span<const double> span_of(const SmallVec& v) noexcept { return {v.data(), v.size()}; }

enum class ModelKind { normal, exponential_rate };

const char* to_string(ModelKind kind) noexcept;

// lambda ~ Gamma(alpha, rate beta), mu | lambda ~ N(mu0, 1 / (kappa lambda)).
class NormalGammaParams {
 public:
  NormalGammaParams(double mu0, double kappa, double alpha, double beta);

  double mu0() const noexcept { return mu0_; }
  double kappa() const noexcept { return kappa_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  bool operator==(const NormalGammaParams&) const = default;

 private:
  double mu0_, kappa_, alpha_, beta_;
};

// theta ~ Gamma(alpha, rate beta).
class GammaParams {
 public:
  GammaParams(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  bool operator==(const GammaParams&) const = default;

 private:
  double alpha_, beta_;
};

// Prior and posterior hyperparameters share one representation.
using Params = std::variant<NormalGammaParams, GammaParams>;

ModelKind kind_of(const Params& params) noexcept;

// Observed sufficient statistic: (xbar, s2) for the normal model, (xbar)
// for the exponential model. n = 0 is the empty data set.
class ObservedStat {
 public:
  ObservedStat(int n, SmallVec tau);

  static ObservedStat normal(int n, double xbar, double s2);
  static ObservedStat exponential(int n, double xbar);

  int n() const noexcept { return n_; }
  std::size_t q() const noexcept { return tau_.size(); }
  const SmallVec& tau() const noexcept { return tau_; }
  double operator[](std::size_t i) const { return tau_[i]; }

  bool operator==(const ObservedStat&) const = default;

 private:
  int n_;
  SmallVec tau_;
};

// Parameter point: (mu, lambda) for the normal model, (rate) otherwise.
class Theta {
 public:
  Theta() = default;
  explicit Theta(SmallVec components) : c_(components) {}

  static Theta normal(double mu, double lambda) { return Theta(SmallVec{mu, lambda}); }
  static Theta rate(double theta) { return Theta(SmallVec{theta}); }

  std::size_t size() const noexcept { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  const SmallVec& components() const noexcept { return c_; }

  double mu() const;
  double lambda() const;
  double rate() const;

  bool operator==(const Theta&) const = default;

 private:
  SmallVec c_;
};

NormalGammaParams update_normal(const NormalGammaParams& prior, const ObservedStat& stat);
GammaParams update_exponential(const GammaParams& prior, const ObservedStat& stat);
Params update(const Params& prior, const ObservedStat& stat);

// Natural parameters: (mu lambda, -lambda/2) or (-theta).
SmallVec natural_parameters(const Theta& theta);

double log_posterior_density(const Params& post, const Theta& theta);
double posterior_density(const Params& post, const Theta& theta);

// Log density of the summary statistic given theta, as simulated by
// sample_stat.
double log_stat_likelihood(const ObservedStat& stat, const Theta& theta);

// Marginal statistic density f_T in the conjugate form Z_n / Z_0 times the
// base measure R. For the normal model R is taken constant, so f_T is
// B_n beta_n^-alpha_n, the marginal likelihood of the raw data. log_reduced
// drops every factor that does not depend on tau.
struct MarginalDensity {
  double log_exact;
  double log_reduced;
};
MarginalDensity marginal_stat_density(const Params& prior, const ObservedStat& stat);

// Exact log density of the simulated summary statistic, integrated over the
// prior. Differs from marginal_stat_density for the normal model by the
// (xbar, s2) volume factor, proportional to s2^((n-3)/2).
double log_sampling_density(const Params& prior, const ObservedStat& stat);

ObservedStat sample_stat(const Theta& theta, int n, Rng& rng);
Theta sample_prior(const Params& prior, Rng& rng);

// E[lambda^p] under Gamma(alpha, rate beta); p may be negative when alpha > -p.
double gamma_power_moment(double alpha, double beta, int p);

// E[mu^a lambda^b] under a normal-gamma posterior.
double eta_moment(const NormalGammaParams& post, int a, int b);
// E[theta^k] under a gamma posterior.
double eta_moment(const GammaParams& post, int k);
// Dispatching form; powers has length 2 (normal) or 1 (exponential).
double eta_moment(const Params& post, std::span<const int> powers);

}  // namespace abcre
