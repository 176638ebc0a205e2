// Acceptance suite. One line per criterion:
//   criterion N: PASS|FAIL  <summary>
// followed by indented detail lines. Usage:
//   acceptance                 all criteria
//   acceptance --criterion N   one criterion
//   acceptance --long          gated long-running checks
// Exit status is 0 when every selected criterion passes.

#include "abcre/calibrate.hpp"
#include "abcre/diagnostics.hpp"
#include "abcre/error.hpp"
#include "abcre/expansion.hpp"
#include "abcre/harness.hpp"
#include "abcre/models.hpp"
#include "abcre/oracle.hpp"
#include "abcre/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace abcre;

namespace {

const NormalGammaParams kUnitPrior(0.0, 1.0, 1.0, 1.0);

void detail(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  std::fputs("    ", stdout);
  std::vprintf(fmt, ap);
  std::fputc('\n', stdout);
  va_end(ap);
}

struct Outcome {
  bool pass;
  std::string summary;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  std::va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

QuadratureSpec natural_conjugate() {
  QuadratureSpec s;
  s.frame = RegionFrame::natural;
  s.weighting = StatWeighting::conjugate;
  return s;
}

// Ratios at eps0, eps0/2, eps0/4; passes when the first lies in [0.7, 1.3]
// and each halving moves strictly closer to 1.
bool ratio_sequence_passes(const std::vector<double>& r) {
  if (!(r[0] >= 0.7 && r[0] <= 1.3)) return false;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(std::abs(r[i] - 1.0) < std::abs(r[i - 1] - 1.0))) return false;
  return true;
}

// ---------------------------------------------------------------------------

Outcome table_criterion(int table, double limit) {
  const auto report = verify_reference_rows(ABCRE_FIXTURE);
  for (const auto& c : report.checks) {
    if (c.table != table) continue;
    const char* tag = c.informational ? "info" : c.excluded ? "suspect, not scored"
                                                 : c.pass   ? "ok"
                                                            : "OUT OF BAND";
    if (c.informational || c.excluded || !c.pass)
      detail("(%g,%d) %-5s %-18s printed %.4g computed %.4g dev %+.2f%% [%s]", c.tol, c.n,
             c.variant.c_str(), c.quantity.c_str(), c.printed, c.computed, 100.0 * c.rel_dev, tag);
  }
  const auto s = report.summary(table);
  return {report.table_passes(table),
          fmt("%d/%d scored cells within %g%% (%d excluded)", s.passed, s.cells - s.excluded,
              100.0 * limit, s.excluded)};
}

Outcome criterion1() { return table_criterion(1, 0.05); }
Outcome criterion2() { return table_criterion(2, 0.05); }
Outcome criterion3() {
  auto out = table_criterion(3, 0.02);
  const auto report = verify_reference_rows(ABCRE_FIXTURE);
  int ok = 0, total = 0;
  for (const auto& c : report.checks)
    if (c.table == 3 && c.quantity == "U_tilde_recomputed") ++total, ok += c.pass;
  detail("thresholds recomputed from the ball table's tau*: %d/%d within 2%% (informational)",
         ok, total);
  return out;
}

Outcome criterion4() {
  bool pass = true;
  std::string summary;
  for (int n : {20, 50}) {
    const auto stat = ObservedStat::normal(n, 0.0, 1.0);
    const auto post = update_normal(kUnitPrior, stat);
    const auto form = re_form_normal(post, n);
    const double eps0 = std::pow(1e-4 / form.ball_coefficient(), 0.25);
    std::vector<double> r;
    for (double e : {eps0, eps0 / 2.0, eps0 / 4.0}) {
      const double ev[] = {e, e};
      const double h = kl_numeric({kUnitPrior, stat, AcceptanceRegion::ball(stat.tau(), e)},
                                  natural_conjugate());
      r.push_back(h / form.value(ev));
      detail("n=%d eps=%.5g expansion %.4e quadrature %.4e ratio %.4f", n, e, form.value(ev), h,
             r.back());
    }
    const bool ok = ratio_sequence_passes(r);
    pass = pass && ok;
    summary += fmt("n=%d ratios %.3f %.3f %.3f%s  ", n, r[0], r[1], r[2], ok ? "" : " (FAIL)");
    // Other frame and weighting conventions, for reference.
    for (auto [frame, weighting] : {std::pair{RegionFrame::summary, StatWeighting::conjugate},
                                    std::pair{RegionFrame::summary, StatWeighting::sampling}}) {
      QuadratureSpec spec;
      spec.frame = frame;
      spec.weighting = weighting;
      const double ev[] = {eps0, eps0};
      const double h = kl_numeric({kUnitPrior, stat, AcceptanceRegion::ball(stat.tau(), eps0)}, spec);
      detail("n=%d eps=%.5g %s frame, %s weighting: ratio %.4f (informational)", n, eps0,
             to_string(frame), to_string(weighting), h / form.value(ev));
    }
  }
  return {pass, summary + "(natural frame, conjugate weighting)"};
}

Outcome criterion5() {
  const int n = 50;
  const double tau = 1.0;
  const GammaParams prior(1.0, 1.0);
  const auto stat = ObservedStat::exponential(n, tau);
  const auto form = re_form_exponential(update_exponential(prior, stat), n, tau);
  const double eps0 = std::pow(1e-4 / form.diag(0), 0.25);
  std::vector<double> r;
  for (double e : {eps0, eps0 / 2.0, eps0 / 4.0}) {
    const double ev[] = {e};
    const double h = kl_numeric({prior, stat, AcceptanceRegion::ball(stat.tau(), e)});
    r.push_back(h / form.value(ev));
    detail("eps=%.5g expansion %.4e quadrature %.4e ratio %.4f", e, form.value(ev), h, r.back());
  }
  return {ratio_sequence_passes(r), fmt("ratios %.3f %.3f %.3f", r[0], r[1], r[2])};
}

Outcome criterion6() {
  bool pass = true;
  double worst_ratio = 0.0, worst_scaling = 0.0;
  const auto spec = natural_conjugate();
  for (int n : {20, 50}) {
    const auto stat = ObservedStat::normal(n, 0.3, 1.2);
    const auto post = update_normal(kUnitPrior, stat);
    const auto form = re_form_normal(post, n);
    const double tol = 1e-4;
    const auto ball = calibrate_ball(form, tol).epsilon;
    const auto ell = calibrate_ellipse_closed(form, tol).epsilon;
    for (const auto& [name, eps] : {std::pair{"ball", ball}, std::pair{"ellipse", ell}}) {
      const std::vector<double> half{eps[0] / 2.0, eps[1] / 2.0};
      for (const char* obs : {"mu", "sigma2"}) {
        const Observable h = std::strcmp(obs, "mu") == 0 ? Observable::mean_mu()
                                                         : Observable::variance_sigma2();
        auto predict = [&](const std::vector<double>& e) {
          return std::strcmp(obs, "mu") == 0 ? bias_normal_mean(post, n, e).predicted_bias
                                             : bias_normal_variance(post, n, e).predicted_bias;
        };
        auto quad = [&](const std::vector<double>& e) {
          return perturbation_bias(
              {kUnitPrior, stat, AcceptanceRegion::ellipse(stat.tau(), {e[0], e[1]})}, h, spec);
        };
        const double q0 = quad(eps), q1 = quad(half);
        const double ratio = q0 / predict(eps);
        const double scaling = (q0 / q1) / 4.0;
        const bool ok = std::abs(ratio - 1.0) <= 0.2 && std::abs(scaling - 1.0) <= 0.1;
        pass = pass && ok;
        worst_ratio = std::max(worst_ratio, std::abs(ratio - 1.0));
        worst_scaling = std::max(worst_scaling, std::abs(scaling - 1.0));
        detail("n=%d %-7s %-6s eps=(%.4g,%.4g) predicted %+.4e quadrature %+.4e ratio %.4f "
               "bias(eps)/bias(eps/2)/4 = %.4f%s",
               n, name, obs, eps[0], eps[1], predict(eps), q0, ratio, scaling, ok ? "" : "  FAIL");
      }
    }
  }
  return {pass, fmt("max |ratio-1| %.3f (limit 0.2), max |scaling-1| %.3f (limit 0.1)",
                    worst_ratio, worst_scaling)};
}

Outcome criterion7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const NormalGammaParams prior(-1.0 + 2.0 * u(rng), 0.2 + 3.0 * u(rng), 0.5 + 3.0 * u(rng),
                                  0.2 + 3.0 * u(rng));
    const int n = 10 + static_cast<int>(1990 * u(rng));
    const auto stat = ObservedStat::normal(n, -1.0 + 2.0 * u(rng), 0.2 + 3.0 * u(rng));
    const auto form = re_form_normal(update_normal(prior, stat), n);
    const double tol = std::pow(10.0, -4.0 + 4.0 * u(rng));
    const auto c = calibrate_ellipse_closed(form, tol).epsilon;
    const auto m = calibrate_ellipse_numeric(form, tol).epsilon;
    for (std::size_t i = 0; i < 2; ++i) worst = std::max(worst, std::abs(m[i] / c[i] - 1.0));
  }
  return {worst <= 1e-6, fmt("100 posteriors, max relative difference %.2e (limit 1e-6)", worst)};
}

Outcome monte_carlo_trend(const std::vector<double>& tols, const std::vector<int>& ns,
                          std::size_t particles) {
  bool pass = true;
  int cells = 0, below = 0;
  for (std::uint64_t seed : {20240601ULL, 7ULL, 99991ULL}) {
    ExperimentConfig c;
    c.tols = tols;
    c.ns = ns;
    c.particles = particles;
    c.master_seed = seed;
    for (std::size_t ti = 0; ti < tols.size(); ++ti)
      for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        const auto r = run_cell(c, ti, ni);
        const bool ok = r.complete() && r.r_ratio && *r.r_ratio < 1.0;
        ++cells;
        below += ok;
        pass = pass && ok;
        detail("seed %llu (%g,%d) tau*=(%.4f,%.4f) R_B %.1f R_E %.1f R_E/R_B %.4f U_tilde %.4f",
               static_cast<unsigned long long>(seed), r.tol, r.n, r.tau_star[0], r.tau_star[1],
               r.ball->r_hat, r.ellipse->r_hat, r.r_ratio.value_or(NAN), r.u_tilde.value_or(NAN));
      }
  }
  return {pass, fmt("R_E/R_B < 1 in %d/%d seeded cells (K=%zu)", below, cells, particles)};
}

Outcome criterion8() { return monte_carlo_trend({0.25, 1.0}, {300, 1000}, 200); }

Outcome criterion9() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    detail("%-58s %s", what.c_str(), ok ? "ok" : "FAIL");
    if (!ok) failed.push_back(what);
  };
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_prior = [&] {
    return NormalGammaParams(-1.0 + 2.0 * u(rng), 0.2 + 3.0 * u(rng), 0.5 + 3.0 * u(rng),
                             0.2 + 3.0 * u(rng));
  };
  auto random_stat = [&](int n) {
    return ObservedStat::normal(n, -1.0 + 2.0 * u(rng), 0.2 + 3.0 * u(rng));
  };

  double wm = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(2000 * u(rng));
    const auto post = update_normal(random_prior(), random_stat(n));
    wm = std::max({wm, std::abs(weight_mean(Params(post), 0)), std::abs(weight_mean(Params(post), 1))});
    const auto g = update_exponential(GammaParams(0.5 + 3 * u(rng), 0.5 + 3 * u(rng)),
                                      ObservedStat::exponential(n, 0.1 + 3 * u(rng)));
    wm = std::max(wm, std::abs(weight_mean(Params(g), 0)));
  }
  check(wm <= 1e-12, fmt("weight_mean over 200 posteriors per model: max %.1e", wm));

  {
    const SmallVec c{0.1, 0.9};
    const double e = 0.37;
    const auto b = AcceptanceRegion::ball(c, e);
    const auto el = AcceptanceRegion::ellipse(c, {e, e});
    const auto m = AcceptanceRegion::metric(c, e * e * Eigen::MatrixXd::Identity(2, 2));
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    int disagree = 0;
    for (int i = 0; i < 100000; ++i) {
      const double t[] = {c[0] + d(rng), c[1] + d(rng)};
      const bool in = b.contains(t);
      disagree += in != el.contains(t) || in != m.contains(t);
    }
    check(disagree == 0, fmt("ball/ellipse/metric membership over 1e5 points: %d disagree", disagree));
  }

  int dominated = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 10 + static_cast<int>(1990 * u(rng));
    const auto form = re_form_normal(update_normal(random_prior(), random_stat(n)), n);
    const double tol = std::pow(10.0, -4.0 + 4.0 * u(rng));
    dominated += calibrate_ellipse_closed(form, tol).volume >=
                 calibrate_ball(form, tol).volume * (1.0 - 1e-12);
  }
  check(dominated == 200, fmt("ellipse volume >= ball volume: %d/200", dominated));

  double spread = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto prior = random_prior();
    const auto stat = random_stat(2 + static_cast<int>(500 * u(rng)));
    const auto post = update_normal(prior, stat);
    double lo = INFINITY, hi = -INFINITY;
    for (int k = 0; k < 40; ++k) {
      const Theta th = Theta::normal(-2.0 + 4.0 * u(rng), 0.1 + 3.0 * u(rng));
      const double r = log_posterior_density(post, th) - log_stat_likelihood(stat, th) -
                       log_posterior_density(prior, th);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    spread = std::max(spread, hi - lo);
  }
  check(spread <= 1e-10, fmt("conjugacy log-ratio spread over theta: %.1e", spread));

  // ABC particles against quadrature moments of the perturbed posterior for
  // the statistic the sampler actually tests.
  const int n = 50;
  const auto stat = ObservedStat::normal(n, 0.1, 0.95);
  for (const auto& region : {AcceptanceRegion::ball(stat.tau(), 0.08),
                             AcceptanceRegion::ellipse(stat.tau(), {0.12, 0.06})}) {
    const auto run = run_abc(kUnitPrior, n, region, 1000, 4242);
    for (const auto& h : {Observable::mean_mu(), Observable::precision_lambda()}) {
      const auto e = estimate(run, h);
      const double q = perturbed_moment({kUnitPrior, stat, region}, h);
      const double z = (e.value - q) / *e.std_error;
      check(std::abs(z) <= 4.0, fmt("%s E[%s]: ABC %.5f quadrature %.5f (z = %+.2f)",
                                    to_string(region.geometry()), h.name.c_str(), e.value, q, z));
    }
  }
  {
    const auto es = ObservedStat::exponential(n, 1.2);
    const GammaParams gp(2.0, 2.0);
    const auto region = AcceptanceRegion::ball(es.tau(), 0.1);
    const auto run = run_abc(gp, n, region, 1000, 777);
    const auto e = estimate(run, Observable::rate_theta());
    const double q = perturbed_moment({gp, es, region}, Observable::rate_theta());
    const double z = (e.value - q) / *e.std_error;
    check(std::abs(z) <= 4.0, fmt("exponential E[theta]: ABC %.5f quadrature %.5f (z = %+.2f)",
                                  e.value, q, z));
  }
  return {failed.empty(), failed.empty() ? "all property checks hold"
                                         : fmt("%zu property checks failed", failed.size())};
}

// Perturbed posterior against the posterior for a region stretched along one
// natural coordinate: g(delta) = f^delta / f - 1 should carry no linear term,
// and 2 (q + 2) g(delta) / delta^2 should approach the bracket
//   d2 f(tau, theta) / f(tau, theta) - d2 f_T / f_T,
// here with the joint density's second derivative n^2 eta_i^2 and the
// marginal's taken by central differences of f_T.
Outcome criterion10() {
  const int n = 50;
  const auto stat = ObservedStat::normal(n, 0.2, 1.1);
  const auto post = update_normal(kUnitPrior, stat);
  auto spec = natural_conjugate();
  spec.rel_tol = 1e-10;
  spec.abs_tol = 1e-15;
  const double q = 2.0;
  const double zeta[2] = {stat[0], (n - 1.0) / n * stat[1] + stat[0] * stat[0]};

  auto log_ft = [&](double z1, double z2) {
    const double s2 = n / (n - 1.0) * (z2 - z1 * z1);
    return marginal_stat_density(kUnitPrior, ObservedStat::normal(n, z1, s2)).log_reduced;
  };
  double d2ft[2];
  for (int i = 0; i < 2; ++i) {
    const double h = 1e-4 * (i == 0 ? 1.0 : zeta[1]);
    const double base = log_ft(zeta[0], zeta[1]);
    const double up = i == 0 ? log_ft(zeta[0] + h, zeta[1]) : log_ft(zeta[0], zeta[1] + h);
    const double dn = i == 0 ? log_ft(zeta[0] - h, zeta[1]) : log_ft(zeta[0], zeta[1] - h);
    d2ft[i] = (std::exp(up - base) - 2.0 + std::exp(dn - base)) / (h * h);
  }
  detail("f_T''/f_T by differences: (%.6g, %.6g); n^2 E[eta_i^2] closed form: (%.6g, %.6g)",
         d2ft[0], d2ft[1], n * n * eta_moment(post, 2, 2), n * n * 0.25 * eta_moment(post, 0, 2));

  const double sd_mu = std::sqrt(post.beta() / (post.alpha() * post.kappa()));
  const double mean_l = post.alpha() / post.beta();
  const std::vector<Theta> thetas = {
      Theta::normal(post.mu0() + 2.0 * sd_mu, mean_l), Theta::normal(post.mu0() - 2.0 * sd_mu, 1.3 * mean_l),
      Theta::normal(post.mu0() + 1.0 * sd_mu, 0.75 * mean_l), Theta::normal(post.mu0(), 1.35 * mean_l)};

  bool pass = true;
  double worst_lin = 0.0, worst_rel = 0.0;
  int used = 0;
  for (int i = 0; i < 2; ++i) {
    // Thresholds in the natural coordinate with n delta about 0.1 at the
    // largest; the other axis is shrunk by 1e-3 so its contribution drops
    // below 1e-6 relative.
    const double delta0 = i == 0 ? 2e-3 : 2e-3 * zeta[1];
    for (const auto& th : thetas) {
      const auto eta = natural_parameters(th);
      const double bracket = n * n * eta[i] * eta[i] - d2ft[i];
      const double scale = n * n * std::sqrt(i == 0 ? eta_moment(post, 4, 4) : 0.0625 * eta_moment(post, 0, 4));
      if (std::abs(bracket) < 0.25 * scale) continue;  // near a zero of the weight
      ++used;
      auto g = [&](double d) {
        const SmallVec axes = i == 0 ? SmallVec{d, 1e-3 * d} : SmallVec{1e-3 * d, d};
        return perturbed_density_ratio(
                   {kUnitPrior, stat, AcceptanceRegion::ellipse(stat.tau(), axes)}, th, spec) -
               1.0;
      };
      std::vector<double> rel;
      double gd = g(delta0);
      for (double d : {delta0, delta0 / 2.0, delta0 / 4.0}) {
        const double gh = g(d / 2.0);
        const double lin = (4.0 * gh - gd) / d * d / gd;  // linear coefficient times d over g(d)
        const double est = 2.0 * (q + 2.0) * gd / (d * d);
        rel.push_back(est / bracket - 1.0);
        worst_lin = std::max(worst_lin, std::abs(lin));
        detail("i=%d theta=(%.4f,%.4f) delta=%.3g 2(q+2)g/delta^2 %.6g bracket %.6g rel %+.4f "
               "linear share %+.2e",
               i + 1, th.mu(), th.lambda(), d, est, bracket, rel.back(), lin);
        gd = gh;
      }
      const bool ok = std::abs(rel.back()) <= 0.05;
      worst_rel = std::max(worst_rel, std::abs(rel.back()));
      pass = pass && ok;
    }
  }
  pass = pass && used >= 4 && worst_lin <= 0.05;
  return {pass, fmt("%d theta points; second-derivative bracket max rel dev %.4f (limit 0.05); "
                    "linear share max %.2e (limit 0.05)",
                    used, worst_rel, worst_lin)};
}

Outcome long_checks() {
  detail("Monte Carlo trend including the (0.05,1000) cell at K=1000");
  return monte_carlo_trend({0.05, 0.25, 1.0}, {300, 1000}, 1000);
}

int run(int id, const std::function<Outcome()>& f, const char* label) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (id > 0)
    std::printf("criterion %d: %s  %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.summary.c_str(), secs);
  else
    std::printf("%s: %s  %s [%.1f s]\n", label, o.pass ? "PASS" : "FAIL", o.summary.c_str(), secs);
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  if (argc == 2 && std::strcmp(argv[1], "--long") == 0) return run(0, long_checks, "long");
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    const int id = std::atoi(argv[2]);
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", criteria.size());
      return 2;
    }
    return run(id, criteria[id - 1], "");
  }
  if (argc != 1) {
    std::fprintf(stderr, "usage: acceptance [--criterion N | --long]\n");
    return 2;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i)
    failures += run(static_cast<int>(i + 1), criteria[i], "");
  return failures == 0 ? 0 : 1;
}
