#include <benchmark/benchmark.h>

#include "rom/assembly.hpp"
#include "rom/rng.hpp"

namespace {

using namespace rom;

const Mesh& mesh_for(int n) {
  static std::map<int, Mesh> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_mesh(GridSpec{n, 2})).first;
  return it->second;
}

void BM_ConvectionFullGrid(benchmark::State& state) {
  const Mesh& mesh = mesh_for(static_cast<int>(state.range(0)));
  const ScalarPattern pattern = build_scalar_pattern(mesh);
  const CounterRng rng(1);
  const Vector u = rng.normal_vector(CounterRng::kAudit, 0, mesh.n_velocity);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_convection(mesh, pattern, u));
  }
  state.SetLabel(std::to_string(mesh.n_elements) + " elements");
}
BENCHMARK(BM_ConvectionFullGrid)->Arg(16)->Arg(32)->Arg(64);

// Sample-mesh assembly with a fixed index budget; work should not grow with
// the grid.
void BM_ConvectionSampled(benchmark::State& state) {
  const Mesh& mesh = mesh_for(static_cast<int>(state.range(0)));
  const CounterRng rng(2);
  std::vector<int> rows;
  for (int i = 0; i < 100; ++i) {
    rows.push_back(static_cast<int>(rng.bits(CounterRng::kAudit, 100 + i) %
                                    static_cast<std::uint64_t>(mesh.n_velocity)));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const SampleMesh sample = build_sample_mesh(mesh, rows);
  const Vector u = rng.normal_vector(CounterRng::kAudit, 1, mesh.n_velocity);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_convection_sampled(mesh, sample, u, rows));
  }
  state.SetLabel(std::to_string(sample.elements.size()) + " elements visited");
}
BENCHMARK(BM_ConvectionSampled)->Arg(16)->Arg(32)->Arg(64);

void BM_AssembleOperators(benchmark::State& state) {
  const Mesh& mesh = mesh_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_operators(mesh));
  }
}
BENCHMARK(BM_AssembleOperators)->Arg(16)->Arg(32);

}  // namespace
