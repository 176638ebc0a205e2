// abcre: calibrate thresholds, run ABC cells, reproduce the simulation
// tables, verify published rows, compare against quadrature, plot.

#include "abcre/calibrate.hpp"
#include "abcre/diagnostics.hpp"
#include "abcre/error.hpp"
#include "abcre/expansion.hpp"
#include "abcre/harness.hpp"
#include "abcre/oracle.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

using namespace abcre;

enum Exit { kOk = 0, kVerifyFailed = 1, kBudget = 2, kConfig = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> particles;
  std::optional<std::string> model;
  std::optional<unsigned> workers;
};

struct PriorFlags {
  std::optional<double> mu0, kappa, alpha, beta;
};

void add_prior_flags(CLI::App* app, PriorFlags& p) {
  app->add_option("--mu0", p.mu0, "prior location");
  app->add_option("--kappa", p.kappa, "prior precision scale");
  app->add_option("--alpha", p.alpha, "prior shape");
  app->add_option("--beta", p.beta, "prior rate");
}

// Config file, then the output-directory environment override, then flags.
ExperimentConfig resolve(const Common& c, const PriorFlags& pf) {
  ExperimentConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  if (c.model) {
    if (*c.model == "normal") {
      if (cfg.model != ModelKind::normal) {
        cfg.model = ModelKind::normal;
        cfg.prior = NormalGammaParams(0.0, 1.0, 1.0, 1.0);
        cfg.true_theta = Theta::normal(0.0, 1.0);
        cfg.ellipse = true;
      }
    } else if (*c.model == "exponential_rate" || *c.model == "exponential") {
      if (cfg.model != ModelKind::exponential_rate) {
        cfg.model = ModelKind::exponential_rate;
        cfg.prior = GammaParams(1.0, 1.0);
        cfg.true_theta = Theta::rate(1.0);
        cfg.ellipse = false;
      }
    } else {
      fail(Errc::config_error, "--model must be normal or exponential_rate");
    }
  }
  try {
    if (cfg.model == ModelKind::normal) {
      const auto& p = std::get<NormalGammaParams>(cfg.prior);
      cfg.prior = NormalGammaParams(pf.mu0.value_or(p.mu0()), pf.kappa.value_or(p.kappa()),
                                    pf.alpha.value_or(p.alpha()), pf.beta.value_or(p.beta()));
    } else {
      if (pf.mu0 || pf.kappa) fail(Errc::config_error, "exponential_rate prior takes alpha and beta");
      const auto& p = std::get<GammaParams>(cfg.prior);
      cfg.prior = GammaParams(pf.alpha.value_or(p.alpha()), pf.beta.value_or(p.beta()));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_parameter) fail(Errc::config_error, e.what());
    throw;
  }
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
  if (c.out) cfg.output_dir = *c.out;
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.particles) cfg.particles = *c.particles;
  if (c.workers) cfg.workers = *c.workers;
  cfg.validate();
  return cfg;
}

ObservedStat stat_from_flags(ModelKind kind, int n, double xbar, std::optional<double> s2) {
  try {
    if (kind == ModelKind::normal) {
      if (!s2) fail(Errc::config_error, "--s2 is required for the normal model");
      return ObservedStat::normal(n, xbar, *s2);
    }
    return ObservedStat::exponential(n, xbar);
  } catch (const Error& e) {
    if (e.code() == Errc::config_error) throw;
    fail(Errc::config_error, e.what());
  }
}

void print_vec(const char* label, const std::vector<double>& v) {
  std::printf("%s", label);
  for (double x : v) std::printf(" %.6g", x);
  std::printf("\n");
}

int cmd_calibrate(const ExperimentConfig& cfg, int n, double xbar, std::optional<double> s2,
                  double tol) {
  const auto stat = stat_from_flags(cfg.model, n, xbar, s2);
  const Params post = update(cfg.prior, stat);
  const auto form = re_form(post, stat);
  const auto ball = calibrate_ball(form, tol);
  std::printf("model %s  n %d  tol %g\n", to_string(cfg.model), n, tol);
  print_vec("ball epsilon        ", ball.epsilon);
  std::printf("ball volume          %.6g\n", ball.volume);
  if (stat.q() == 2) {
    const auto closed = calibrate_ellipse_closed(form, tol);
    const auto numeric = calibrate_ellipse_numeric(form, tol);
    print_vec("ellipse epsilon     ", closed.epsilon);
    print_vec("ellipse (numeric)   ", numeric.epsilon);
    std::printf("ellipse volume       %.6g\n", closed.volume);
    std::printf("U_tilde              %.6g\n",
                rejection_ratio_normal(std::get<NormalGammaParams>(post), n, ball.epsilon[0],
                                       closed.epsilon));
    if (outside_validity(n, closed.epsilon))
      std::printf("warning: n * max(eps) exceeds %.1f; expansion used outside its small-n*eps range\n",
                  kValidityLimit);
  } else if (outside_validity(n, ball.epsilon)) {
    std::printf("warning: n * eps exceeds %.1f\n", kValidityLimit);
  }
  return kOk;
}

void print_geometry(const char* name, const GeometryResult& g,
                    const std::vector<std::string>& names) {
  std::printf("%-8s eps", name);
  for (double e : g.epsilon) std::printf(" %.5g", e);
  for (std::size_t i = 0; i < g.estimates.size(); ++i)
    std::printf("  %s %.5g (sd %.4g)", names[i].c_str(), g.estimates[i].value,
                g.estimates[i].sd.value_or(0.0));
  std::printf("  R_hat %.6g  proposals %lld%s\n", g.r_hat, static_cast<long long>(g.proposals),
              g.complete ? "" : "  INCOMPLETE");
}

int cmd_simulate(ExperimentConfig cfg, double tol, int n) {
  cfg.tols = {tol};
  cfg.ns = {n};
  cfg.validate();
  const auto r = run_cell(cfg, 0, 0);
  std::printf("cell (tol %g, n %d)  tau*", r.tol, r.n);
  for (double t : r.tau_star) std::printf(" %.6g", t);
  std::printf("  seed %llu\n", static_cast<unsigned long long>(cfg.master_seed));
  if (r.ball) print_geometry("ball", *r.ball, r.observable_names);
  if (r.ellipse) print_geometry("ellipse", *r.ellipse, r.observable_names);
  if (r.u_tilde) std::printf("U_tilde %.5g", *r.u_tilde);
  if (r.r_ratio) std::printf("  R_E/R_B %.5g", *r.r_ratio);
  std::printf("\nwall time %.2f s\n", r.wall_time);
  return r.complete() ? kOk : kBudget;
}

int cmd_tables(const ExperimentConfig& cfg) {
  const auto out = reproduce_tables(cfg);
  for (const auto& r : out.records)
    std::printf("tol %-5g n %-5d R_B %-10.6g R_E %-10.6g U_tilde %-8.4g R_E/R_B %.4g%s\n", r.tol,
                r.n, r.ball ? r.ball->r_hat : 0.0, r.ellipse ? r.ellipse->r_hat : 0.0,
                r.u_tilde.value_or(0.0), r.r_ratio.value_or(0.0), r.complete() ? "" : "  INCOMPLETE");
  for (const auto& f : out.files) std::printf("wrote %s\n", f.string().c_str());
  return out.all_complete ? kOk : kBudget;
}

int cmd_verify(const std::string& fixture) {
  const auto report = verify_reference_rows(fixture.empty() ? default_fixture_path() : std::filesystem::path(fixture));
  for (const auto& c : report.checks)
    std::printf("table %d (%g,%d) %-5s %-18s printed %-8.4g computed %-8.4g dev %+7.2f%% %s\n",
                c.table, c.tol, c.n, c.variant.c_str(), c.quantity.c_str(), c.printed, c.computed,
                100.0 * c.rel_dev,
                c.informational ? "info" : c.excluded ? "suspect" : c.pass ? "ok" : "FAIL");
  for (int t = 1; t <= 3; ++t) {
    const auto s = report.summary(t);
    std::printf("table %d: %d/%d cells pass, %d excluded\n", t, s.passed, s.cells - s.excluded,
                s.excluded);
  }
  return report.all_pass() ? kOk : kVerifyFailed;
}

int cmd_oracle(const ExperimentConfig& cfg, int n, double xbar, std::optional<double> s2, double tol,
               const std::string& geometry, const std::string& frame,
               const std::string& weighting) {
  const auto stat = stat_from_flags(cfg.model, n, xbar, s2);
  const Params post = update(cfg.prior, stat);
  const auto form = re_form(post, stat);
  QuadratureSpec spec;
  if (frame == "natural")
    spec.frame = RegionFrame::natural;
  else if (frame != "summary")
    fail(Errc::config_error, "--frame must be summary or natural");
  if (weighting == "conjugate")
    spec.weighting = StatWeighting::conjugate;
  else if (weighting != "sampling")
    fail(Errc::config_error, "--weighting must be sampling or conjugate");

  CalibrationResult cal;
  AcceptanceRegion region;
  if (geometry == "ellipse" && stat.q() == 2) {
    cal = calibrate_ellipse_closed(form, tol);
    region = AcceptanceRegion::ellipse(stat.tau(), SmallVec{cal.epsilon[0], cal.epsilon[1]});
  } else if (geometry == "ball" || geometry == "ellipse") {
    cal = calibrate_ball(form, tol);
    region = AcceptanceRegion::ball(stat.tau(), cal.epsilon[0]);
  } else {
    fail(Errc::config_error, "--geometry must be ball or ellipse");
  }
  const OracleProblem p{cfg.prior, stat, region};
  std::printf("frame %s  weighting %s  geometry %s\n", to_string(spec.frame),
              to_string(spec.weighting), geometry.c_str());
  print_vec("epsilon            ", cal.epsilon);
  const double kl = kl_numeric(p, spec);
  std::printf("expansion H        %.6g\nquadrature H       %.6g\nratio              %.4f\n",
              cal.achieved_re, kl, kl / cal.achieved_re);
  if (const auto* ng = std::get_if<NormalGammaParams>(&post)) {
    const auto bm = bias_normal_mean(*ng, n, cal.epsilon);
    const auto bv = bias_normal_variance(*ng, n, cal.epsilon);
    std::printf("bias mu     predicted %.4g  quadrature %.4g\n", bm.predicted_bias,
                perturbation_bias(p, Observable::mean_mu(), spec));
    std::printf("bias sigma2 predicted %.4g  quadrature %.4g\n", bv.predicted_bias,
                perturbation_bias(p, Observable::variance_sigma2(), spec));
  } else {
    const auto bt = bias_exponential_rate(std::get<GammaParams>(post), n, xbar, cal.epsilon[0]);
    std::printf("bias theta  predicted %.4g  quadrature %.4g\n", bt.predicted_bias,
                perturbation_bias(p, Observable::rate_theta(), spec));
  }
  std::printf("acceptance probability %.6g\n", acceptance_probability(cfg.prior, stat, region, spec));
  return kOk;
}

int cmd_plot(const ExperimentConfig& cfg, std::string csv, std::string svg) {
  if (csv.empty()) csv = (cfg.output_dir / "figure2.csv").string();
  if (svg.empty()) svg = (cfg.output_dir / "figure2.svg").string();
  plot_figure2(csv, svg);
  std::printf("wrote %s\n", svg.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rejection ABC with acceptance regions calibrated by relative entropy"};
  app.require_subcommand(1);
  Common common;
  PriorFlags prior;
  app.add_option("--config", common.config, "INI configuration file");
  app.add_option("--seed", common.seed, "master seed");
  app.add_option("--out", common.out, "output directory (overrides ABCRE_OUTPUT_DIR)");
  app.add_option("--particles", common.particles, "accepted particles per run");
  app.add_option("--model", common.model, "normal or exponential_rate");
  app.add_option("--workers", common.workers, "worker threads (0 = all cores)");
  add_prior_flags(&app, prior);
  app.fallthrough();

  int n = 100;
  double xbar = 0.0, tol = 0.05;
  std::optional<double> s2;
  auto add_stat = [&](CLI::App* sub) {
    sub->add_option("--n", n, "sample size")->required();
    sub->add_option("--xbar", xbar, "observed sample mean")->required();
    sub->add_option("--s2", s2, "observed sample variance (normal model)");
    sub->add_option("--tol", tol, "relative entropy tolerance")->required();
  };

  auto* calibrate = app.add_subcommand("calibrate", "thresholds for an observed statistic");
  add_stat(calibrate);

  auto* simulate = app.add_subcommand("simulate", "run one (tol, n) cell");
  simulate->add_option("--tol", tol, "relative entropy tolerance")->required();
  simulate->add_option("--n", n, "sample size")->required();

  auto* tables = app.add_subcommand("tables", "run all cells and write the result tables");

  std::string fixture;
  auto* verify = app.add_subcommand("verify", "recompute published thresholds and ratios");
  verify->add_option("--fixture", fixture, "reference rows CSV");

  std::string geometry = "ball", frame = "summary", weighting = "sampling";
  auto* oracle = app.add_subcommand("oracle-check", "compare the expansion with quadrature");
  add_stat(oracle);
  oracle->add_option("--geometry", geometry, "ball or ellipse");
  oracle->add_option("--frame", frame, "summary or natural");
  oracle->add_option("--weighting", weighting, "sampling or conjugate");

  std::string csv, svg;
  auto* plot = app.add_subcommand("plot", "render figure2.csv as SVG");
  plot->add_option("--csv", csv, "input CSV (default <out>/figure2.csv)");
  plot->add_option("--svg", svg, "output SVG (default <out>/figure2.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*verify) return cmd_verify(fixture);
    const auto cfg = resolve(common, prior);
    if (*calibrate) return cmd_calibrate(cfg, n, xbar, s2, tol);
    if (*simulate) return cmd_simulate(cfg, tol, n);
    if (*tables) return cmd_tables(cfg);
    if (*oracle) return cmd_oracle(cfg, n, xbar, s2, tol, geometry, frame, weighting);
    if (*plot) return cmd_plot(cfg, csv, svg);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == Errc::config_error ? kConfig : kVerifyFailed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kVerifyFailed;
  }
  return kOk;
}
