#include "abcre/oracle.hpp"

#include "abcre/error.hpp"
#include "abcre/quadrature.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

namespace abcre {
namespace {

struct Component {
  double log_w;  // normalized log weight plus alpha_n log(beta_k / beta*)
  double mu;     // posterior location (normal model)
  double dbeta;  // beta_k - beta*
};

struct Mixture {
  bool normal;
  double kappa;  // shared kappa_n
  double mu_star;
  std::vector<Component> parts;
};

struct ThetaGrid {
  std::vector<Theta> nodes;
  std::vector<double> weights;
  std::vector<double> log_f;  // log f(theta | tau*)
};

void check_spec(const QuadratureSpec& spec) {
  if (spec.region_nodes < 16 || spec.theta_nodes < 16)
    fail(Errc::invalid_parameter, "quadrature needs at least 16 nodes per dimension");
  if (!(spec.tail_mass > 0.0 && spec.tail_mass < 1e-6) || !(spec.z_halfwidth > 0.0))
    fail(Errc::invalid_parameter, "invalid theta truncation");
}

void check_problem(const OracleProblem& p) {
  const std::size_t q = kind_of(p.prior) == ModelKind::normal ? 2 : 1;
  if (p.stat.q() != q || p.region.dim() != q)
    fail(Errc::dimension_mismatch, "statistic, region and model disagree in dimension");
  for (std::size_t i = 0; i < q; ++i)
    if (p.region.center()[i] != p.stat[i])
      fail(Errc::invalid_parameter, "region must be centered at the observed statistic");
  if (q == 2 && p.stat.n() < 2) fail(Errc::invalid_statistic, "normal model needs n >= 2");
}

// Frame coordinates of a summary statistic and back.
SmallVec to_frame(const ObservedStat& s, RegionFrame frame) {
  if (frame == RegionFrame::summary || s.q() == 1) return s.tau();
  const double n = s.n();
  return {s[0], (n - 1.0) / n * s[1] + s[0] * s[0]};
}

std::optional<ObservedStat> from_frame(int n, const SmallVec& zeta, RegionFrame frame) {
  if (zeta.size() == 1) {
    if (!(zeta[0] > 0.0)) return std::nullopt;
    return ObservedStat(n, zeta);
  }
  const double s2 = frame == RegionFrame::summary
                        ? zeta[1]
                        : n / (n - 1.0) * (zeta[1] - zeta[0] * zeta[0]);
  if (!(s2 > 0.0)) return std::nullopt;
  return ObservedStat(n, SmallVec{zeta[0], s2});
}

// Unit-ball rule: points z and weights summing to the ball volume.
struct BallRule {
  std::vector<SmallVec> z;
  std::vector<double> w;
};

BallRule unit_ball_rule(std::size_t q, int nodes) {
  BallRule b;
  if (q == 1) {
    const auto& g = gauss_legendre(nodes);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      b.z.push_back({g.nodes[i]});
      b.w.push_back(g.weights[i]);
    }
    return b;
  }
  const auto radial = gauss_legendre(nodes, 0.0, 1.0);
  const int angles = 2 * nodes;
  const double dphi = 2.0 * std::numbers::pi / angles;
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double r = radial.nodes[i];
    for (int j = 0; j < angles; ++j) {
      const double phi = (j + 0.5) * dphi;
      b.z.push_back({r * std::cos(phi), r * std::sin(phi)});
      b.w.push_back(radial.weights[i] * r * dphi);
    }
  }
  return b;
}

struct RegionPoint {
  ObservedStat stat;
  double log_w;  // log ball weight
};

std::vector<RegionPoint> region_points(const ObservedStat& stat, const AcceptanceRegion& region,
                                       int nodes, RegionFrame frame) {
  const auto rule = unit_ball_rule(stat.q(), nodes);
  const SmallVec c = to_frame(stat, frame);
  const auto& l = region.factor();
  std::vector<RegionPoint> pts;
  pts.reserve(rule.z.size());
  for (std::size_t k = 0; k < rule.z.size(); ++k) {
    SmallVec zeta = c;
    for (std::size_t i = 0; i < zeta.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) zeta[i] += l(i, j) * rule.z[k][j];
    if (auto s = from_frame(stat.n(), zeta, frame)) pts.push_back({*s, std::log(rule.w[k])});
  }
  return pts;
}

double log_weighting(const Params& prior, const ObservedStat& s, StatWeighting w) {
  return w == StatWeighting::conjugate ? marginal_stat_density(prior, s).log_reduced
                                       : log_sampling_density(prior, s);
}

double posterior_beta(const Params& post) {
  if (const auto* p = std::get_if<NormalGammaParams>(&post)) return p->beta();
  return std::get<GammaParams>(post).beta();
}

Mixture build_mixture(const OracleProblem& p, int nodes, const QuadratureSpec& spec) {
  const Params star = update(p.prior, p.stat);
  Mixture m;
  m.normal = kind_of(star) == ModelKind::normal;
  const double alpha = m.normal ? std::get<NormalGammaParams>(star).alpha()
                                : std::get<GammaParams>(star).alpha();
  m.kappa = m.normal ? std::get<NormalGammaParams>(star).kappa() : 0.0;
  m.mu_star = m.normal ? std::get<NormalGammaParams>(star).mu0() : 0.0;
  const double beta_star = posterior_beta(star);

  const auto pts = region_points(p.stat, p.region, nodes, spec.frame);
  if (pts.empty()) fail(Errc::quadrature_non_convergence, "region misses the statistic support");
  std::vector<double> lw(pts.size());
  double top = -INFINITY;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    lw[k] = pts[k].log_w + log_weighting(p.prior, pts[k].stat, spec.weighting);
    top = std::max(top, lw[k]);
  }
  double total = 0.0;
  for (double v : lw) total += std::exp(v - top);
  const double log_norm = top + std::log(total);
  m.parts.reserve(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Params post = update(p.prior, pts[k].stat);
    const double beta = posterior_beta(post);
    const double mu = m.normal ? std::get<NormalGammaParams>(post).mu0() : 0.0;
    m.parts.push_back({lw[k] - log_norm + alpha * std::log(beta / beta_star), mu, beta - beta_star});
  }
  return m;
}

// log f^eps(theta) - log f(theta | tau*).
double log_ratio(const Mixture& m, const Theta& theta, std::vector<double>& buf) {
  buf.resize(m.parts.size());
  double top = -INFINITY;
  if (m.normal) {
    const double mu = theta[0];
    const double lambda = theta[1];
    const double ds = (mu - m.mu_star) * (mu - m.mu_star);
    const double h = 0.5 * m.kappa * lambda;
    for (std::size_t k = 0; k < m.parts.size(); ++k) {
      const auto& c = m.parts[k];
      const double d = mu - c.mu;
      buf[k] = c.log_w - h * (d * d - ds) - c.dbeta * lambda;
      top = std::max(top, buf[k]);
    }
  } else {
    const double r = theta[0];
    for (std::size_t k = 0; k < m.parts.size(); ++k) {
      buf[k] = m.parts[k].log_w - m.parts[k].dbeta * r;
      top = std::max(top, buf[k]);
    }
  }
  double s = 0.0;
  for (double v : buf) s += std::exp(v - top);
  return top + std::log(s);
}

ThetaGrid theta_grid(const Params& star, const QuadratureSpec& spec, int nodes) {
  ThetaGrid g;
  if (const auto* p = std::get_if<NormalGammaParams>(&star)) {
    const boost::math::gamma_distribution<double> lam(p->alpha(), 1.0 / p->beta());
    const double lo = boost::math::quantile(lam, 0.5 * spec.tail_mass);
    const double hi = boost::math::quantile(boost::math::complement(lam, 0.5 * spec.tail_mass));
    const auto lr = gauss_legendre(nodes, lo, hi);
    const auto zr = gauss_legendre(nodes, -spec.z_halfwidth, spec.z_halfwidth);
    for (std::size_t i = 0; i < lr.nodes.size(); ++i) {
      const double l = lr.nodes[i];
      const double sd = 1.0 / std::sqrt(p->kappa() * l);
      for (std::size_t j = 0; j < zr.nodes.size(); ++j) {
        const Theta t = Theta::normal(p->mu0() + zr.nodes[j] * sd, l);
        g.nodes.push_back(t);
        g.weights.push_back(lr.weights[i] * zr.weights[j] * sd);
        g.log_f.push_back(log_posterior_density(star, t));
      }
    }
    return g;
  }
  const auto& gp = std::get<GammaParams>(star);
  const boost::math::gamma_distribution<double> th(gp.alpha(), 1.0 / gp.beta());
  const double lo = boost::math::quantile(th, 0.5 * spec.tail_mass);
  const double hi = boost::math::quantile(boost::math::complement(th, 0.5 * spec.tail_mass));
  const auto r = gauss_legendre(nodes, lo, hi);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const Theta t = Theta::rate(r.nodes[i]);
    g.nodes.push_back(t);
    g.weights.push_back(r.weights[i]);
    g.log_f.push_back(log_posterior_density(star, t));
  }
  return g;
}

// Evaluates f(region nodes, theta nodes) at the base resolution and, when
// requested, with each node count doubled in turn.
double converged(const QuadratureSpec& spec, const std::string& what,
                 const std::function<double(int, int)>& f) {
  const double base = f(spec.region_nodes, spec.theta_nodes);
  if (!spec.check_convergence) return base;
  const double dr = std::abs(f(2 * spec.region_nodes, spec.theta_nodes) - base);
  const double dt = std::abs(f(spec.region_nodes, 2 * spec.theta_nodes) - base);
  const double bound = spec.rel_tol * std::abs(base) + spec.abs_tol;
  if (dr > bound || dt > bound)
    fail(Errc::quadrature_non_convergence,
         what + ": doubling nodes moved the result by " + std::to_string(std::max(dr, dt)) +
             " (bound " + std::to_string(bound) + ")");
  return base;
}

struct GridSums {
  double z = 0.0;      // sum w f
  double z_eps = 0.0;  // sum w f r
  double kl = 0.0;     // sum w f log r
  double h = 0.0;      // sum w f h
  double h_eps = 0.0;  // sum w f r h
};

GridSums grid_sums(const OracleProblem& p, const QuadratureSpec& spec, int rn, int tn,
                   const Observable* h) {
  const Params star = update(p.prior, p.stat);
  const Mixture m = build_mixture(p, rn, spec);
  const ThetaGrid g = theta_grid(star, spec, tn);
  std::vector<double> buf;
  GridSums s;
  for (std::size_t j = 0; j < g.nodes.size(); ++j) {
    const double wf = g.weights[j] * std::exp(g.log_f[j]);
    const double lr = log_ratio(m, g.nodes[j], buf);
    const double r = std::exp(lr);
    s.z += wf;
    s.z_eps += wf * r;
    s.kl += wf * lr;
    if (h) {
      const double v = h->h(g.nodes[j]);
      s.h += wf * v;
      s.h_eps += wf * r * v;
    }
  }
  return s;
}

void check_observable(const OracleProblem& p, const Observable& h) {
  if (h.name == "sigma2") {
    const auto star = update(p.prior, p.stat);
    if (!(std::get<NormalGammaParams>(star).alpha() > 1.0))
      fail(Errc::moment_undefined, "E[1/lambda] needs alpha_n > 1");
  }
}

}  // namespace

const char* to_string(RegionFrame f) noexcept {
  return f == RegionFrame::summary ? "summary" : "natural";
}

const char* to_string(StatWeighting w) noexcept {
  return w == StatWeighting::conjugate ? "conjugate" : "sampling";
}

double perturbed_density_ratio(const OracleProblem& p, const Theta& theta,
                               const QuadratureSpec& spec) {
  check_spec(spec);
  check_problem(p);
  log_posterior_density(update(p.prior, p.stat), theta);  // support check
  std::vector<double> buf;
  return converged(spec, "perturbed density", [&](int rn, int) {
    return std::exp(log_ratio(build_mixture(p, rn, spec), theta, buf));
  });
}

double perturbed_density(const OracleProblem& p, const Theta& theta, const QuadratureSpec& spec) {
  return perturbed_density_ratio(p, theta, spec) *
         posterior_density(update(p.prior, p.stat), theta);
}

double kl_numeric(const OracleProblem& p, const QuadratureSpec& spec) {
  check_spec(spec);
  check_problem(p);
  return converged(spec, "relative entropy", [&](int rn, int tn) {
    const auto s = grid_sums(p, spec, rn, tn, nullptr);
    // Both densities normalized on the grid.
    return -(s.kl / s.z + std::log(s.z) - std::log(s.z_eps));
  });
}

double perturbed_moment(const OracleProblem& p, const Observable& h, const QuadratureSpec& spec) {
  check_spec(spec);
  check_problem(p);
  check_observable(p, h);
  return converged(spec, "perturbed moment " + h.name, [&](int rn, int tn) {
    const auto s = grid_sums(p, spec, rn, tn, &h);
    return s.h_eps / s.z_eps;
  });
}

double perturbation_bias(const OracleProblem& p, const Observable& h, const QuadratureSpec& spec) {
  check_spec(spec);
  check_problem(p);
  check_observable(p, h);
  return converged(spec, "perturbation bias " + h.name, [&](int rn, int tn) {
    const auto s = grid_sums(p, spec, rn, tn, &h);
    return s.h_eps / s.z_eps - s.h / s.z;
  });
}

double perturbed_mass(const OracleProblem& p, const QuadratureSpec& spec) {
  check_spec(spec);
  check_problem(p);
  return converged(spec, "perturbed mass", [&](int rn, int tn) {
    return grid_sums(p, spec, rn, tn, nullptr).z_eps;
  });
}

double acceptance_probability(const Params& prior, const ObservedStat& stat,
                              const AcceptanceRegion& region, const QuadratureSpec& spec) {
  check_spec(spec);
  check_problem({prior, stat, region});
  const double det = region.factor().diagonal().prod();
  const double n = stat.n();
  const double jac = (spec.frame == RegionFrame::natural && stat.q() == 2) ? n / (n - 1.0) : 1.0;
  const double p = converged(spec, "acceptance probability", [&](int rn, int) {
    double s = 0.0;
    for (const auto& pt : region_points(stat, region, rn, spec.frame))
      s += std::exp(pt.log_w + log_sampling_density(prior, pt.stat));
    return std::abs(det) * jac * s;
  });
  return std::min(p, 1.0);
}

}  // namespace abcre
