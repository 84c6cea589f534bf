#include <benchmark/benchmark.h>

#include "rom/offline.hpp"
#include "rom/online.hpp"
#include "rom/rng.hpp"

namespace {

using namespace rom;

// One reusable offline build at n=16; benchmark setup cost is paid once.
struct Setup {
  Mesh mesh;
  AffineOperator ops;
  OfflineResult off;
  DeimOperator deim;
  Preconditioner offline_stokes;
  Vector xi;

  Setup() : mesh(build_mesh(GridSpec{16, 2})), ops(assemble_operators(mesh)) {
    OfflineOptions options;
    options.tau = 1e-3;
    options.n_trial = 40;
    options.seed = 5;
    off = build_reduced_basis(mesh, ops, options);
    const PodResult pod = pod_nonlinear(off.snapshots.columns);
    deim = build_deim_operator(off.basis.velocity, pod.basis, deim_select(pod.basis),
                               mesh);
    offline_stokes =
        make_stokes_preconditioner(off.rop, off.xi_mean, PrecondVariant::kOffline);
    xi = CounterRng(9).uniform_vector(CounterRng::kAudit, 0, 4, 0.01, 1.0);
  }

  static const Setup& get() {
    static Setup setup;
    return setup;
  }
};

void BM_FullPicard(benchmark::State& state) {
  const Setup& s = Setup::get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(picard_full(s.mesh, s.ops, s.xi, 1e-8));
  }
}
BENCHMARK(BM_FullPicard)->Unit(benchmark::kMillisecond);

void BM_ReducedPicard(benchmark::State& state) {
  const Setup& s = Setup::get();
  OnlineConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_reduced(s.mesh, s.ops, s.off.rop, s.off.basis, s.xi, config));
  }
}
BENCHMARK(BM_ReducedPicard)->Unit(benchmark::kMillisecond);

void BM_DeimPicardDirect(benchmark::State& state) {
  const Setup& s = Setup::get();
  OnlineConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_deim(s.mesh, s.ops, s.off.rop, s.off.basis, s.deim, s.xi, config));
  }
}
BENCHMARK(BM_DeimPicardDirect)->Unit(benchmark::kMillisecond);

void BM_DeimPicardKrylov(benchmark::State& state) {
  const Setup& s = Setup::get();
  OnlineConfig config;
  config.linear_solver = LinearSolverKind::kBicgstab;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_deim(s.mesh, s.ops, s.off.rop, s.off.basis, s.deim,
                                        s.xi, config, &s.offline_stokes));
  }
}
BENCHMARK(BM_DeimPicardKrylov)->Unit(benchmark::kMillisecond);

void BM_StokesPreconditionerBuild(benchmark::State& state) {
  const Setup& s = Setup::get();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        make_stokes_preconditioner(s.off.rop, s.xi, PrecondVariant::kOnline));
  }
}
BENCHMARK(BM_StokesPreconditionerBuild)->Unit(benchmark::kMicrosecond);

}  // namespace
