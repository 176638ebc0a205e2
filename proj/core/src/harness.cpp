#include "abcre/harness.hpp"

#include "abcre/diagnostics.hpp"
#include "abcre/error.hpp"
#include "abcre/expansion.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef ABCRE_DEFAULT_FIXTURE
#define ABCRE_DEFAULT_FIXTURE "data/reference_rows.csv"
#endif
#ifndef ABCRE_VERSION
#define ABCRE_VERSION "unknown"
#endif

namespace abcre {
namespace {

namespace pt = boost::property_tree;

[[noreturn]] void config_fail(const std::string& what) { fail(Errc::config_error, what); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    config_fail(key + ": expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    config_fail(key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<Observable> observables_for(ModelKind kind) {
  if (kind == ModelKind::normal) return {Observable::mean_mu(), Observable::variance_sigma2()};
  return {Observable::rate_theta()};
}

GeometryResult run_geometry(const ExperimentConfig& c, int n, const AcceptanceRegion& region,
                            std::vector<double> eps, std::uint64_t seed) {
  const auto run = run_abc(c.prior, n, region, c.particles, seed, c.max_proposals);
  GeometryResult g;
  g.epsilon = std::move(eps);
  g.seed = seed;
  g.proposals = run.total_proposals;
  g.complete = run.complete;
  if (run.accepted() > 0) {
    for (const auto& o : observables_for(c.model)) g.estimates.push_back(estimate(run, o));
    g.r_hat = run.mean_rejections();
  }
  return g;
}

nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["model"] = to_string(c.model);
  if (const auto* p = std::get_if<NormalGammaParams>(&c.prior)) {
    j["prior"] = {{"mu0", p->mu0()}, {"kappa", p->kappa()}, {"alpha", p->alpha()},
                  {"beta", p->beta()}};
    j["truth"] = {{"mu", c.true_theta[0]}, {"sigma2", 1.0 / c.true_theta[1]}};
  } else {
    const auto& g = std::get<GammaParams>(c.prior);
    j["prior"] = {{"alpha", g.alpha()}, {"beta", g.beta()}};
    j["truth"] = {{"rate", c.true_theta[0]}};
  }
  j["tols"] = c.tols;
  j["ns"] = c.ns;
  j["particles"] = c.particles;
  j["master_seed"] = c.master_seed;
  std::vector<std::string> geo;
  if (c.ball) geo.emplace_back("ball");
  if (c.ellipse) geo.emplace_back("ellipse");
  j["geometry"] = geo;
  j["max_proposals"] = c.max_proposals;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir.string();
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (kind_of(prior) != model) config_fail("prior does not match the model");
  if (true_theta.size() != (model == ModelKind::normal ? 2u : 1u))
    config_fail("true parameter does not match the model");
  if (model == ModelKind::normal && !(true_theta[1] > 0.0)) config_fail("true sigma2 must be positive");
  if (model == ModelKind::exponential_rate && !(true_theta[0] > 0.0))
    config_fail("true rate must be positive");
  if (tols.empty() || ns.empty()) config_fail("at least one tol and one n are required");
  for (double t : tols)
    if (!(t > 0.0) || !std::isfinite(t)) config_fail("tolerances must be positive");
  for (int n : ns) {
    if (model == ModelKind::normal && n < 2) config_fail("normal model needs n >= 2 in every cell");
    if (n < 1) config_fail("n must be positive");
  }
  if (particles < 1) config_fail("particle count must be at least 1");
  if (!ball && !ellipse) config_fail("no geometry selected");
  if (ellipse && model != ModelKind::normal)
    config_fail("ellipse geometry needs a two-component statistic");
  if (max_proposals < static_cast<std::int64_t>(particles))
    config_fail("max_proposals must be at least the particle count");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    config_fail(std::string("cannot parse config: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> known = {
      {"model", {"type"}},
      {"prior", {"mu0", "kappa", "alpha", "beta"}},
      {"truth", {"mu", "sigma2", "rate"}},
      {"experiment", {"tols", "ns", "particles", "seed", "geometry", "max_proposals", "workers"}},
      {"output", {"dir"}},
  };
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end()) config_fail("unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) config_fail("unknown key " + section + "." + key);
  }
  auto get = [&](const std::string& path) { return tree.get_optional<std::string>(path); };

  ExperimentConfig c;
  if (auto v = get("model.type")) {
    if (*v == "normal")
      c.model = ModelKind::normal;
    else if (*v == "exponential_rate" || *v == "exponential")
      c.model = ModelKind::exponential_rate;
    else
      config_fail("model.type must be normal or exponential_rate");
  }
  auto num = [&](const std::string& path, double fallback) {
    const auto v = get(path);
    return v ? to_double(path, *v) : fallback;
  };
  try {
    if (c.model == ModelKind::normal) {
      c.prior = NormalGammaParams(num("prior.mu0", 0.0), num("prior.kappa", 1.0),
                                  num("prior.alpha", 1.0), num("prior.beta", 1.0));
      const double s2 = num("truth.sigma2", 1.0);
      if (!(s2 > 0.0)) config_fail("truth.sigma2 must be positive");
      c.true_theta = Theta::normal(num("truth.mu", 0.0), 1.0 / s2);
    } else {
      if (get("prior.mu0") || get("prior.kappa"))
        config_fail("exponential_rate prior takes alpha and beta only");
      c.prior = GammaParams(num("prior.alpha", 1.0), num("prior.beta", 1.0));
      c.true_theta = Theta::rate(num("truth.rate", 1.0));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::config_error) throw;
    config_fail(e.what());
  }
  if (auto v = get("experiment.tols")) {
    c.tols.clear();
    for (const auto& s : split_list(*v)) c.tols.push_back(to_double("experiment.tols", s));
  }
  if (auto v = get("experiment.ns")) {
    c.ns.clear();
    for (const auto& s : split_list(*v))
      c.ns.push_back(static_cast<int>(to_integer("experiment.ns", s)));
  }
  if (auto v = get("experiment.particles")) {
    const auto k = to_integer("experiment.particles", *v);
    if (k < 1) config_fail("experiment.particles must be positive");
    c.particles = static_cast<std::size_t>(k);
  }
  if (auto v = get("experiment.seed"))
    c.master_seed = static_cast<std::uint64_t>(to_integer("experiment.seed", *v));
  if (auto v = get("experiment.geometry")) {
    c.ball = c.ellipse = false;
    for (const auto& g : split_list(*v)) {
      if (g == "ball")
        c.ball = true;
      else if (g == "ellipse")
        c.ellipse = true;
      else
        config_fail("unknown geometry " + g);
    }
  } else if (c.model != ModelKind::normal) {
    c.ellipse = false;
  }
  if (auto v = get("experiment.max_proposals"))
    c.max_proposals = to_integer("experiment.max_proposals", *v);
  if (auto v = get("experiment.workers")) {
    const auto w = to_integer("experiment.workers", *v);
    if (w < 0) config_fail("experiment.workers must be nonnegative");
    c.workers = static_cast<unsigned>(w);
  }
  if (auto v = get("output.dir")) c.output_dir = *v;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t derive_seed(std::uint64_t master, std::size_t tol_index, std::size_t n_index,
                          const std::string& tag) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tol_index));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n_index));
  return splitmix64(h ^ fnv1a(tag));
}

bool CellRecord::complete() const {
  return (!ball || ball->complete) && (!ellipse || ellipse->complete);
}

CellRecord run_cell(const ExperimentConfig& config, std::size_t tol_index, std::size_t n_index) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  CellRecord r;
  r.tol = config.tols.at(tol_index);
  r.n = config.ns.at(n_index);
  r.tol_index = tol_index;
  r.n_index = n_index;
  r.data_seed = derive_seed(config.master_seed, tol_index, n_index, "data");
  for (const auto& o : observables_for(config.model)) r.observable_names.push_back(o.name);

  Rng rng(r.data_seed);
  const ObservedStat stat = sample_stat(config.true_theta, r.n, rng);
  r.tau_star = stat.tau();
  const Params post = update(config.prior, stat);
  const REQuadraticForm form = re_form(post, stat);

  if (config.ball) {
    const auto cal = calibrate_ball(form, r.tol);
    const auto region = AcceptanceRegion::ball(stat.tau(), cal.epsilon[0]);
    r.ball = run_geometry(config, r.n, region, cal.epsilon,
                          derive_seed(config.master_seed, tol_index, n_index, "ball"));
  }
  if (config.ellipse) {
    const auto cal = calibrate_ellipse_closed(form, r.tol);
    const auto region =
        AcceptanceRegion::ellipse(stat.tau(), SmallVec{cal.epsilon[0], cal.epsilon[1]});
    r.ellipse = run_geometry(config, r.n, region, cal.epsilon,
                             derive_seed(config.master_seed, tol_index, n_index, "ellipse"));
  }
  if (r.ball && r.ellipse) {
    r.u_tilde = rejection_ratio_normal(std::get<NormalGammaParams>(post), r.n, r.ball->epsilon[0],
                                       r.ellipse->epsilon);
    if (r.ball->complete && r.ellipse->complete && r.ball->r_hat > 0.0)
      r.r_ratio = r.ellipse->r_hat / r.ball->r_hat;
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

std::vector<std::string> stat_fields(const CellRecord& r) {
  return {format_number(r.tol), format_number(r.n), format_number(r.tau_star[0]),
          format_number(r.tau_star[1])};
}

void append_estimates(std::vector<std::string>& row, const GeometryResult& g) {
  for (const auto& e : g.estimates) {
    row.push_back(format_number(e.value));
    row.push_back(format_number(e.sd.value()));
  }
  row.push_back(format_number(g.r_hat));
}

bool tabulable(const CellRecord& r, const std::optional<GeometryResult>& g) {
  return g && g->complete && g->estimates.size() == 2 && g->estimates[0].sd && r.tau_star.size() == 2;
}

}  // namespace

CsvTable table1_csv(const std::vector<CellRecord>& records) {
  CsvTable t;
  t.header = {"tol", "n", "xbar", "s2", "epsilon", "mu_hat", "sd_mu", "sigma2_hat", "sd_sigma2", "R_hat"};
  for (const auto& r : records) {
    if (!tabulable(r, r.ball)) continue;
    auto row = stat_fields(r);
    row.push_back(format_number(r.ball->epsilon[0]));
    append_estimates(row, *r.ball);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable table2_csv(const std::vector<CellRecord>& records) {
  CsvTable t;
  t.header = {"tol", "n", "xbar", "s2", "epsilon1", "epsilon2", "mu_hat",
              "sd_mu", "sigma2_hat", "sd_sigma2", "R_hat"};
  for (const auto& r : records) {
    if (!tabulable(r, r.ellipse)) continue;
    auto row = stat_fields(r);
    row.push_back(format_number(r.ellipse->epsilon[0]));
    row.push_back(format_number(r.ellipse->epsilon[1]));
    append_estimates(row, *r.ellipse);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable table3_csv(const std::vector<CellRecord>& records) {
  CsvTable t;
  t.header = {"tol", "n", "U_tilde", "R_ratio"};
  for (const auto& r : records) {
    if (!r.u_tilde || !r.r_ratio) continue;
    t.rows.push_back({format_number(r.tol), format_number(r.n), format_number(*r.u_tilde),
                      format_number(*r.r_ratio)});
  }
  return t;
}

CsvTable figure2_csv(const std::vector<CellRecord>& records) {
  CsvTable t;
  t.header = {"tol", "n", "R_ratio"};
  for (const auto& r : records) {
    if (!r.r_ratio) continue;
    t.rows.push_back({format_number(r.tol), format_number(r.n), format_number(*r.r_ratio)});
  }
  return t;
}

TablesOutput reproduce_tables(const ExperimentConfig& config) {
  config.validate();
  if (config.model != ModelKind::normal) config_fail("tables are defined for the normal model");
  if (!config.ball || !config.ellipse) config_fail("tables need both geometries");
  if (config.particles < 2) config_fail("tables need at least 2 particles per cell");

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < config.tols.size(); ++i)
    for (std::size_t j = 0; j < config.ns.size(); ++j) cells.emplace_back(i, j);

  std::vector<CellRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      try {
        records[k] = run_cell(config, cells[k].first, cells[k].second);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = cells.size();
      }
    }
  };
  unsigned workers = config.workers ? config.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cells.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::sort(records.begin(), records.end(), [](const CellRecord& a, const CellRecord& b) {
    return std::tie(a.tol, a.n) < std::tie(b.tol, b.n);
  });

  TablesOutput out;
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) fail(Errc::io_error, "cannot create " + config.output_dir.string() + ": " + ec.message());
  const std::pair<const char*, CsvTable> tables[] = {
      {"table1.csv", table1_csv(records)},
      {"table2.csv", table2_csv(records)},
      {"table3.csv", table3_csv(records)},
      {"figure2.csv", figure2_csv(records)},
  };
  for (const auto& [name, table] : tables) {
    const auto path = config.output_dir / name;
    write_csv(path, table);
    out.files.push_back(path);
  }

  nlohmann::json manifest;
  manifest["config"] = config_json(config);
  manifest["versions"] = {{"abcre", ABCRE_VERSION}, {"compiler", __VERSION__}};
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json durations = nlohmann::json::array();
  nlohmann::json incomplete = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json s = {{"tol", r.tol}, {"n", r.n}, {"data", r.data_seed}};
    if (r.ball) s["ball"] = r.ball->seed;
    if (r.ellipse) s["ellipse"] = r.ellipse->seed;
    seeds.push_back(s);
    durations.push_back({{"tol", r.tol}, {"n", r.n}, {"seconds", r.wall_time}});
    if (!r.complete()) {
      out.all_complete = false;
      incomplete.push_back({{"tol", r.tol}, {"n", r.n}});
    }
  }
  manifest["seeds"] = seeds;
  manifest["incomplete_cells"] = incomplete;
  manifest["timestamps"] = {{"started", iso_time(started)},
                            {"finished", iso_time(std::chrono::system_clock::now())}};
  manifest["durations"] = {
      {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
      {"cells", durations}};
  const auto mpath = config.output_dir / "manifest.json";
  std::ofstream mf(mpath);
  if (!mf) fail(Errc::io_error, "cannot write " + mpath.string());
  mf << manifest.dump(2) << '\n';
  out.files.push_back(mpath);
  out.records = std::move(records);
  return out;
}

std::filesystem::path default_fixture_path() { return ABCRE_DEFAULT_FIXTURE; }

VerificationReport::TableSummary VerificationReport::summary(int table) const {
  std::map<std::pair<double, int>, std::vector<const RowCheck*>> cells;
  for (const auto& c : checks)
    if (c.table == table && !c.informational) cells[{c.tol, c.n}].push_back(&c);
  TableSummary s;
  for (const auto& [key, list] : cells) {
    ++s.cells;
    const bool excluded = std::all_of(list.begin(), list.end(), [](auto* c) { return c->excluded; });
    if (excluded) {
      ++s.excluded;
      continue;
    }
    auto variant_passes = [&](const std::string& v) {
      bool any = false, ok = true;
      for (const auto* c : list)
        if (c->variant == v) {
          any = true;
          ok = ok && c->pass;
        }
      return any && ok;
    };
    if (variant_passes("own")) ++s.passed;
  }
  return s;
}

bool VerificationReport::table_passes(int table) const {
  const auto s = summary(table);
  return s.passed + s.excluded == s.cells;
}

bool VerificationReport::all_pass() const {
  return table_passes(1) && table_passes(2) && table_passes(3);
}

VerificationReport verify_reference_rows(const std::filesystem::path& fixture,
                                         const NormalGammaParams& prior) {
  if (!std::filesystem::exists(fixture))
    fail(Errc::fixture_missing, "reference rows not found at " + fixture.string());
  const CsvTable t = read_csv(fixture);
  struct Row {
    int table;
    double tol;
    int n;
    double xbar, s2, eps1, eps2, u_tilde;
    std::string variant;
    bool suspect;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto opt = [&](const char* name) { return t.has_value(i, name) ? t.number(i, name) : 0.0; };
    rows.push_back({static_cast<int>(t.number(i, "table")), t.number(i, "tol"),
                    static_cast<int>(t.number(i, "n")), opt("xbar"), opt("s2"), opt("eps1"),
                    opt("eps2"), opt("u_tilde"), t.rows[i][t.column("variant")],
                    t.rows[i][t.column("flag")] == "suspect"});
  }
  auto find = [&](int table, double tol, int n) -> const Row* {
    for (const auto& r : rows)
      if (r.table == table && r.tol == tol && r.n == n && r.variant == "own") return &r;
    return nullptr;
  };

  VerificationReport report;
  auto add = [&](const Row& r, const std::string& quantity, double printed, double computed,
                 double limit, bool informational) {
    RowCheck c;
    c.table = r.table;
    c.tol = r.tol;
    c.n = r.n;
    c.variant = r.variant;
    c.quantity = quantity;
    c.printed = printed;
    c.computed = computed;
    c.rel_dev = computed / printed - 1.0;
    c.limit = limit;
    c.pass = std::abs(c.rel_dev) <= limit;
    c.excluded = r.suspect;
    // Sister-table inputs are reported next to the row's own, never scored.
    c.informational = informational || r.variant == "cross";
    report.checks.push_back(c);
  };
  auto form_at = [&](const Row& r) {
    const auto post = update_normal(prior, ObservedStat::normal(r.n, r.xbar, r.s2));
    return std::pair{post, re_form_normal(post, r.n)};
  };

  for (const auto& r : rows) {
    if (r.table == 1) {
      const auto [post, form] = form_at(r);
      add(r, "epsilon", r.eps1, calibrate_ball(form, r.tol).epsilon[0], 0.05, false);
    } else if (r.table == 2) {
      const auto [post, form] = form_at(r);
      const auto e = calibrate_ellipse_closed(form, r.tol).epsilon;
      add(r, "epsilon1", r.eps1, e[0], 0.05, false);
      add(r, "epsilon2", r.eps2, e[1], 0.05, false);
    } else if (r.table == 3) {
      const Row* b = find(1, r.tol, r.n);
      const Row* e = find(2, r.tol, r.n);
      if (!b || !e) fail(Errc::fixture_missing, "table 3 cell lacks its table 1 or 2 row");
      Row in = r;
      in.xbar = b->xbar;
      in.s2 = b->s2;
      in.suspect = false;
      const auto [post, form] = form_at(in);
      const double printed_eps[2] = {e->eps1, e->eps2};
      add(in, "U_tilde", r.u_tilde, rejection_ratio_normal(post, r.n, b->eps1, printed_eps), 0.02,
          false);
      const auto ball = calibrate_ball(form, r.tol).epsilon[0];
      const auto ell = calibrate_ellipse_closed(form, r.tol).epsilon;
      add(in, "U_tilde_recomputed", r.u_tilde, rejection_ratio_normal(post, r.n, ball, ell), 0.02,
          true);
    }
  }
  return report;
}

std::string render_figure2_svg(const CsvTable& figure2) {
  if (figure2.rows.empty()) fail(Errc::empty_plot, "figure2 data has no rows");
  std::map<int, std::vector<std::pair<double, double>>> series;
  double xmin = INFINITY, xmax = -INFINITY, ymin = 1.0, ymax = 1.0;
  for (std::size_t i = 0; i < figure2.rows.size(); ++i) {
    const double tol = figure2.number(i, "tol");
    const double n = figure2.number(i, "n");
    const double y = figure2.number(i, "R_ratio");
    if (!std::isfinite(tol) || !std::isfinite(y) || n != std::floor(n))
      fail(Errc::malformed_csv, "figure2 row " + std::to_string(i + 1) + " is not numeric");
    series[static_cast<int>(n)].emplace_back(tol, y);
    xmin = std::min(xmin, tol);
    xmax = std::max(xmax, tol);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  const double pad = 0.1 * (ymax - ymin) + 0.05;
  ymin = std::max(0.0, ymin - pad);
  ymax += pad;

  const double w = 640, h = 400, left = 70, right = 130, top = 30, bottom = 60;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (w - left - right); };
  auto sy = [&](double y) { return h - bottom - (y - ymin) / (ymax - ymin) * (h - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\""
    << h - bottom << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n";
  std::set<double> xt;
  for (const auto& [n, pts] : series)
    for (const auto& p : pts) xt.insert(p.first);
  for (double x : xt)
    s << "<text x=\"" << sx(x) << "\" y=\"" << h - bottom + 18 << "\" text-anchor=\"middle\">"
      << format_number(x) << "</text>\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = ymin + (ymax - ymin) * k / 5.0;
    char label[16];
    std::snprintf(label, sizeof label, "%.2f", y);
    s << "<text x=\"" << left - 8 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">" << label
      << "</text>\n";
  }
  s << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 15
    << "\" text-anchor=\"middle\">tolerance</text>\n";
  s << "<text x=\"18\" y=\"" << (top + h - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (top + h - bottom) / 2 << ")\">R_E / R_B</text>\n";
  s << "<line class=\"reference\" x1=\"" << left << "\" y1=\"" << sy(1.0) << "\" x2=\"" << w - right
    << "\" y2=\"" << sy(1.0) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  std::size_t idx = 0;
  for (auto& [n, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = colors[idx % std::size(colors)];
    s << "<polyline class=\"series\" data-n=\"" << n << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      s << (i ? " " : "") << sx(pts[i].first) << ',' << sy(pts[i].second);
    s << "\"/>\n";
    const double ly = top + 20 * idx;
    s << "<line x1=\"" << w - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << w - right + 40
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << w - right + 45 << "\" y=\"" << ly + 4 << "\">n = " << n << "</text>\n";
    ++idx;
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void plot_figure2(const std::filesystem::path& csv, const std::filesystem::path& svg) {
  const auto table = read_csv(csv);
  const auto text = render_figure2_svg(table);
  std::ofstream out(svg);
  if (!out) fail(Errc::io_error, "cannot write " + svg.string());
  out << text;
}

}  // namespace abcre
