#include <stacklq/closedloop.hpp>
#include <stacklq/montecarlo.hpp>
#include <stacklq/noise.hpp>
#include <stacklq/riccati.hpp>

#include <benchmark/benchmark.h>

#include <memory>

using namespace stacklq;

namespace {

// Generic game of dimension n with all noise channels active.
GameSpec generic(int n, std::size_t steps) {
  GameSpec s = zero_spec(n, 1.0, steps);
  const Mat I = Mat::Identity(n, n);
  Mat A = 0.2 * I;
  if (n > 1) A(0, 1) = 0.4;
  s.coeffs.A = TimeFunction::constant(A);
  s.coeffs.b = TimeFunction::constant(Vec::Constant(n, 0.1));
  const double Bs[] = {1.0, 0.6, 0.4}, Cs[] = {0.2, 0.15, 0.1};
  for (int i = 0; i < 3; ++i) {
    s.coeffs.B[i] = TimeFunction::constant(Bs[i] * I);
    s.coeffs.C[i] = TimeFunction::constant(Cs[i] * I);
    s.coeffs.sigma[i] = TimeFunction::constant(Vec::Constant(n, 0.2));
    s.costs.player[i].Q = TimeFunction::constant(I);
    s.costs.player[i].R = TimeFunction::constant((1.0 + 0.5 * i) * I);
    s.costs.player[i].G = 0.5 * I;
    s.costs.player[i].m = TimeFunction::constant(Vec::Constant(n, 0.05));
  }
  s.x0 = Vec::Ones(n);
  return s;
}

std::shared_ptr<const FeedbackLaw> make_law(const GameSpec& s) {
  auto b = std::make_shared<const RiccatiBundle>(solve_riccati(s));
  auto o = std::make_shared<const OffsetBundle>(solve_offsets(*b));
  return std::make_shared<const FeedbackLaw>(b, o);
}

void BM_SolveRiccati(benchmark::State& state) {
  const GameSpec s = generic(static_cast<int>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(solve_riccati(s));
}
BENCHMARK(BM_SolveRiccati)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_FeedbackLaw(benchmark::State& state) {
  const GameSpec s = generic(static_cast<int>(state.range(0)), 200);
  auto b = std::make_shared<const RiccatiBundle>(solve_riccati(s));
  auto o = std::make_shared<const OffsetBundle>(solve_offsets(*b));
  for (auto _ : state) benchmark::DoNotOptimize(FeedbackLaw(b, o));
}
BENCHMARK(BM_FeedbackLaw)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SimulateEquilibrium(benchmark::State& state) {
  const auto law = make_law(generic(static_cast<int>(state.range(0)), 200));
  const std::size_t paths = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_equilibrium(*law, NoiseSource(1), paths));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * paths));
}
BENCHMARK(BM_SimulateEquilibrium)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_NoiseIncrements(benchmark::State& state) {
  const TimeGrid g = TimeGrid::uniform(1.0, 1000);
  const NoiseSource src(7);
  std::vector<std::array<double, 3>> dW;
  std::uint64_t path = 0;
  for (auto _ : state) {
    src.increments(g, path++, dW);
    benchmark::DoNotOptimize(dW.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 3000));
}
BENCHMARK(BM_NoiseIncrements);

void BM_Philox(benchmark::State& state) {
  PhiloxCounter c{0, 0, 0, 0};
  for (auto _ : state) {
    c = philox4x32_10(c, {1, 2});
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_Philox);

}  // namespace

BENCHMARK_MAIN();
