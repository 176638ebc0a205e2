#include "abcre/calibrate.hpp"
#include "abcre/oracle.hpp"
#include "abcre/sampler.hpp"

#include <benchmark/benchmark.h>

using namespace abcre;

namespace {

const NormalGammaParams kUnitPrior(0.0, 1.0, 1.0, 1.0);

REQuadraticForm row_form() {
  const auto stat = ObservedStat::normal(1000, -0.027, 1.013);
  return re_form_normal(update_normal(kUnitPrior, stat), 1000);
}

void BM_CalibrateEllipseClosed(benchmark::State& state) {
  const auto f = row_form();
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_ellipse_closed(f, 0.05));
}
BENCHMARK(BM_CalibrateEllipseClosed);

void BM_CalibrateEllipseNumeric(benchmark::State& state) {
  const auto f = row_form();
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_ellipse_numeric(f, 0.05));
}
BENCHMARK(BM_CalibrateEllipseNumeric);

// Proposals per second through the accept/reject loop.
void BM_RunAbc(benchmark::State& state) {
  const auto stat = ObservedStat::normal(300, 0.02, 1.0);
  const auto region = AcceptanceRegion::ball(stat.tau(), 0.03);
  std::int64_t proposals = 0;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const auto run = run_abc(kUnitPrior, 300, region, static_cast<std::size_t>(state.range(0)), seed++);
    proposals += run.total_proposals;
  }
  state.counters["proposals/s"] = benchmark::Counter(static_cast<double>(proposals), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RunAbc)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_KlNumeric(benchmark::State& state) {
  const auto stat = ObservedStat::normal(50, 0.0, 1.0);
  const OracleProblem p{kUnitPrior, stat, AcceptanceRegion::ball(stat.tau(), 0.02)};
  QuadratureSpec spec;
  spec.check_convergence = false;
  for (auto _ : state) benchmark::DoNotOptimize(kl_numeric(p, spec));
}
BENCHMARK(BM_KlNumeric)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
