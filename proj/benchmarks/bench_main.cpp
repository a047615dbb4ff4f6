#include <benchmark/benchmark.h>

#include "mixpanjer/compound.hpp"
#include "mixpanjer/counts.hpp"
#include "mixpanjer/mc_oracle.hpp"
#include "mixpanjer/mixing.hpp"

using namespace mixpanjer;
using PM = ParameterMap;

namespace {

void BM_Quadrature(benchmark::State& state) {
  const MixingLaw law = law::InverseGaussian{2, 5};
  const auto nodes = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(quadrature(law, nodes));
}
BENCHMARK(BM_Quadrature)->Arg(50)->Arg(200)->Arg(800);

void BM_MixedCountPmf(benchmark::State& state) {
  const CountModel m(family::MNB{PM::scale(2), PM::reciprocal1p()}, law::Gamma{5, 4});
  const auto rule = quadrature(m.law());
  const auto n_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mixed_count_pmf(m, rule, n_max));
}
BENCHMARK(BM_MixedCountPmf)->Arg(50)->Arg(500);

void BM_AggregatePmf(benchmark::State& state) {
  const CountModel m(family::MNB{PM::scale(2), PM::reciprocal1p()}, law::InverseGaussian{2, 5});
  const ClaimModel c(claim::ZeroTruncGeometric{PM::logistic()});
  const auto rule = quadrature(m.law());
  const auto x_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_pmf(m, c, rule, x_max, false, false));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AggregatePmf)->RangeMultiplier(4)->Range(32, 32768)->Complexity(benchmark::oN);

void BM_AggregateWithD(benchmark::State& state) {
  const CountModel m(family::MB{5, PM::exp_neg()}, law::Gamma{3, 4});
  const ClaimModel c(claim::ZeroTruncGeometric{PM::logistic()});
  const auto rule = quadrature(m.law());
  const auto x_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_pmf(m, c, rule, x_max, true));
}
BENCHMARK(BM_AggregateWithD)->Arg(30)->Arg(300);

void BM_Oracle(benchmark::State& state) {
  const CountModel m(family::MP{PM::identity()}, law::Gamma{5, 4});
  const ClaimModel c(claim::GeometricOnN0{PM::logistic()});
  const auto rule = quadrature(m.law());
  for (auto _ : state) benchmark::DoNotOptimize(truncated_mixture_oracle(m, c, rule, 30, 200));
}
BENCHMARK(BM_Oracle);

void BM_Tail(benchmark::State& state) {
  const auto rule = quadrature(law::Beta{3, 3});
  double u = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tail_mixed_compound_geometric(PM::identity(), PM::neg_log_sq(), rule, u));
    u = u < 20 ? u + 0.5 : 0.5;
  }
}
BENCHMARK(BM_Tail);

void BM_Simulate(benchmark::State& state) {
  const CountModel m(family::MNB{PM::scale(2), PM::reciprocal1p()}, law::InverseGaussian{2, 5});
  const ClaimModel c(claim::ZeroTruncGeometric{PM::logistic()});
  SimulationOptions opt;
  opt.paths = 100000;
  opt.x_max = 50;
  opt.u_grid = {1, 5, 10};
  opt.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, c, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opt.paths));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
