// Serial reference vs OpenMP kernel, one pair of benchmarks per kernel.
// Thread count follows OMP_NUM_THREADS.

#include "support.hpp"

#include "dstlift/lasserre_sdp.hpp"
#include "dstlift/rounding.hpp"

#include <benchmark/benchmark.h>

using namespace dstlift;
using namespace testing;

namespace {

std::vector<Eigen::MatrixXd> random_blocks(int count, int dim) {
  boost::random::mt19937_64 gen(3);
  std::vector<Eigen::MatrixXd> out;
  for (int b = 0; b < count; ++b) {
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = static_cast<double>(gen() % 2001) / 1000.0 - 1.0;
    out.push_back(m);
  }
  return out;
}

void psd_blocks(benchmark::State& state, bool parallel) {
  const auto blocks = random_blocks(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto work = blocks;
    project_psd_blocks(work, parallel);
    benchmark::DoNotOptimize(work.data());
  }
}
void BM_PsdBlocksSerial(benchmark::State& s) { psd_blocks(s, false); }
void BM_PsdBlocksParallel(benchmark::State& s) { psd_blocks(s, true); }
BENCHMARK(BM_PsdBlocksSerial)->Args({64, 37})->Args({256, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PsdBlocksParallel)->Args({64, 37})->Args({256, 16})->Unit(benchmark::kMillisecond);

struct ThreeLevelOracle {
  LayeredInstance li = LayeredInstance::from_layered(three_level_instance());
  DistributionOracle y = make();
  DistributionOracle make() const {
    auto sols = enumerate_integral_solutions(li);
    return DistributionOracle(solution_distribution(li.graph(), {sols[0].edges, sols[3].edges, sols[10].edges}, {1, 2, 3}));
  }
};

void rounding_trials(benchmark::State& state, bool parallel) {
  static const ThreeLevelOracle f;
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    StatsReport r = parallel ? stats(f.y, f.li, trials, 7) : stats_serial(f.y, f.li, trials, 7);
    benchmark::DoNotOptimize(r.mean_cost);
  }
}
void BM_RoundingTrialsSerial(benchmark::State& s) { rounding_trials(s, false); }
void BM_RoundingTrialsParallel(benchmark::State& s) { rounding_trials(s, true); }
BENCHMARK(BM_RoundingTrialsSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RoundingTrialsParallel)->Arg(20000)->Unit(benchmark::kMillisecond);

void closure(benchmark::State& state, bool parallel) {
  const int n = static_cast<int>(state.range(0));
  DstInstance g = random_digraph(5, n, 4 * n, 4, 9);
  for (auto _ : state) {
    MetricClosure mc = parallel ? metric_closure(g) : metric_closure_serial(g);
    benchmark::DoNotOptimize(&mc);
  }
}
void BM_MetricClosureSerial(benchmark::State& s) { closure(s, false); }
void BM_MetricClosureParallel(benchmark::State& s) { closure(s, true); }
BENCHMARK(BM_MetricClosureSerial)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MetricClosureParallel)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);

struct CertifyInput {
  ConstraintSystem cs = build_flow_lp(LayeredInstance::from_layered(star_instance(3)));
  FloatMoments y = solve(assemble(cs, 1), SolverConfig{}).y;
};

void certify_rows(benchmark::State& state, bool parallel) {
  static const CertifyInput in;
  for (auto _ : state) {
    CertifyReport r = parallel ? certify(in.y, in.cs, 1, 1e-5) : certify_serial(in.y, in.cs, 1, 1e-5);
    benchmark::DoNotOptimize(r.ok);
  }
}
void BM_CertifyRowsSerial(benchmark::State& s) { certify_rows(s, false); }
void BM_CertifyRowsParallel(benchmark::State& s) { certify_rows(s, true); }
BENCHMARK(BM_CertifyRowsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CertifyRowsParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
