// Serial reference loops against their OpenMP versions. Run with
// DEPCAG_THREADS unset to use every core.
#include "depcag/certify.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace depcag;

const Problem& planar() {
  static const Problem p = build_problem(load_preset("planar-saddle"), 0.0, 5.0, Exec::Serial);
  return p;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_TransitionTable(benchmark::State& st) {
  const Problem& p = planar();
  for (auto _ : st) {
    TransitionTable tab(p.ctx->system(), -60, 60, exec_of(st));
    benchmark::DoNotOptimize(tab.Z_tk_0(60));
  }
}

void BM_VerifyEd1(benchmark::State& st) {
  const Problem& p = planar();
  for (auto _ : st) {
    Ed1Report rep = verify_ed1(*p.ctx, -10, 10, 8, true, exec_of(st));
    benchmark::DoNotOptimize(rep.worst_ratio);
  }
}

void BM_SweepApply(benchmark::State& st) {
  const Problem& p = planar();
  std::vector<double> evals;
  for (int k = -200; k <= 200; ++k) evals.push_back(0.01 * k);
  SweepPlan plan(*p.ctx, -40.0, 40.0, evals, 0.005, false, Exec::Serial);
  Mat g = Mat::Ones(p.ctx->system().dim(), static_cast<Eigen::Index>(plan.stage_count()));
  for (auto _ : st) {
    Mat out = plan.apply(g, exec_of(st));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_SweepPlanBuild(benchmark::State& st) {
  const Problem& p = planar();
  for (auto _ : st) {
    SweepPlan plan(*p.ctx, -40.0, 40.0, {0.0}, 0.005, true, exec_of(st));
    benchmark::DoNotOptimize(plan.stage_count());
  }
}

}  // namespace

// Argument 0 = serial reference, 1 = parallel.
BENCHMARK(BM_TransitionTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyEd1)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepApply)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepPlanBuild)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
