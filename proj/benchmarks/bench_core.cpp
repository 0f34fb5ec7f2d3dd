#include "cggm/datagen.hpp"
#include "cggm/em.hpp"
#include "cggm/m_step.hpp"
#include "cggm/penalty.hpp"
#include "cggm/random.hpp"

#include <benchmark/benchmark.h>

using namespace cggm;

namespace {

SyntheticData highdim(int n) {
  HighDimConfig cfg;
  cfg.n = n;
  cfg.theta_magnitude = {1.25, 2.5};
  cfg.intercept_effects = false;
  cfg.seed = 7;
  return gen_highdim(cfg);
}

void bm_e_step(benchmark::State& state) {
  const auto s = highdim(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(e_step(s.data, s.truth));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_e_step)->Arg(100)->Arg(1000)->Arg(10000);

void bm_m_step(benchmark::State& state) {
  const auto s = highdim(static_cast<int>(state.range(0)));
  const auto stats = sufficient_stats(s.data, e_step(s.data, s.truth));
  const auto init = random_init_params(s.data.p(), s.data.q(), 3, 11);
  const PenaltyConfig pen{0.02, 0.02, 0.05, 0.05};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_m_step(init.classes, stats, pen, {}));
  }
}
BENCHMARK(bm_m_step)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void bm_prox(benchmark::State& state) {
  Rng rng(3);
  std::vector<Matrix> stack;
  for (int k = 0; k < state.range(0); ++k) stack.push_back(standard_normal(10, 10, rng));
  for (auto _ : state) benchmark::DoNotOptimize(prox_ggl(stack, 0.5, 0.1, 0.1));
}
BENCHMARK(bm_prox)->Arg(2)->Arg(5)->Arg(20);

void bm_em_fit(benchmark::State& state) {
  const auto s = highdim(100);
  EMConfig cfg;
  cfg.pen = {0.02, 0.02, 0.05, 0.05};
  cfg.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(em_fit(s.data, 3, cfg));
}
BENCHMARK(bm_em_fit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
