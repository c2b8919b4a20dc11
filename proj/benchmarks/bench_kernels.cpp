#include <benchmark/benchmark.h>

#include "molsim/counting.hpp"
#include "molsim/micromaser.hpp"
#include "molsim/momentum.hpp"
#include "molsim/passage.hpp"

#include <numbers>

namespace mm = molsim::micromaser;

// one generator application, the inner loop of every steady-state search
static void BM_LiouvillianApply(benchmark::State& state) {
  mm::MicromaserParams p;
  p.n_max = static_cast<int>(state.range(0));
  p.t_j = 2.5;
  p.u_b = 1.4;
  const mm::Liouvillian l(p);
  auto rho = mm::TwoModeDensityMatrix::vacuum(p.n_max);
  mm::Vector out;
  for (auto _ : state) {
    l.apply(rho.data(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * rho.data().size());
}
BENCHMARK(BM_LiouvillianApply)->Arg(8)->Arg(14)->Arg(22);

static void BM_SteadyStateUncoupled(benchmark::State& state) {
  mm::MicromaserParams p;
  p.theta = std::numbers::pi;
  p.n_max = 12;
  p.dt = 0.05;
  p.t_max = 400.0;
  for (auto _ : state) benchmark::DoNotOptimize(mm::evolve_to_steady_state(p).rho.data().data());
}
BENCHMARK(BM_SteadyStateUncoupled)->Unit(benchmark::kMillisecond);

static void BM_SectorPopulations(benchmark::State& state) {
  const auto sector = molsim::passage::build_sector(static_cast<int>(state.range(0)));
  const molsim::passage::SectorEvolver ev(sector, molsim::passage::Initial::all_atoms);
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-4;
    benchmark::DoNotOptimize(ev.populations(t));
  }
}
BENCHMARK(BM_SectorPopulations)->Arg(100)->Arg(500);

// includes the block eigendecompositions
static void BM_CountingSetupBcs(benchmark::State& state) {
  molsim::counting::CountingModelSpec s;
  s.kind = molsim::counting::ModelKind::bcs;
  s.v = 0.03;
  s.pair_energies = molsim::counting::caption_pair_energies(static_cast<int>(state.range(0)), s.mu);
  for (auto _ : state) {
    const molsim::counting::CountingEvolver ev(s);
    benchmark::DoNotOptimize(ev.mean(0.1));
  }
}
BENCHMARK(BM_CountingSetupBcs)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_BecFormFactor(benchmark::State& state) {
  const molsim::momentum::BecTrap trap;
  double p = 0.1;
  for (auto _ : state) {
    p += 1e-6;
    benchmark::DoNotOptimize(molsim::momentum::bec_form_factor(trap, p).value);
  }
}
BENCHMARK(BM_BecFormFactor);

static void BM_LocalGap(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(molsim::momentum::local_gap(1.0, 0.5));
}
BENCHMARK(BM_LocalGap);

BENCHMARK_MAIN();
