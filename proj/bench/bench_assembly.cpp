#include <benchmark/benchmark.h>

#include <random>

#include "svfem/config.hpp"
#include "svfem/forms.hpp"

using namespace svfem;

namespace {

struct Setup {
  Mesh mesh;
  FESpace space;
  Vector w;

  explicit Setup(int level) : mesh(make_mesh(level)), space(mesh, 2) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    w = Vector::NullaryExpr(space.n_u(), [&] { return d(rng); });
  }
  static Mesh make_mesh(int level) {
    MeshSpec ms;
    ms.level = level;
    return build_mesh(ms);
  }
};

Setup& setup(int level) {
  static Setup s1(1), s2(2);
  return level == 1 ? s1 : s2;
}

Execution mode(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::serial : Execution::parallel;
}

void BM_convection(benchmark::State& state) {
  Setup& s = setup(static_cast<int>(state.range(0)));
  FormContext ctx(s.space, mode(state));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_c_vol(ctx, s.w).nonzeros());
  state.SetLabel(state.range(1) == 0 ? "serial" : "parallel");
}

void BM_convection_cached(benchmark::State& state) {
  Setup& s = setup(static_cast<int>(state.range(0)));
  FormContext ctx(s.space, mode(state));
  ctx.enable_cache();
  for (auto _ : state) benchmark::DoNotOptimize(assemble_c_vol(ctx, s.w).nonzeros());
  state.SetLabel(state.range(1) == 0 ? "serial" : "parallel");
}

void BM_viscous(benchmark::State& state) {
  Setup& s = setup(static_cast<int>(state.range(0)));
  FormContext ctx(s.space, mode(state));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_a_h(ctx).nonzeros());
  state.SetLabel(state.range(1) == 0 ? "serial" : "parallel");
}

void BM_divergence(benchmark::State& state) {
  Setup& s = setup(static_cast<int>(state.range(0)));
  FormContext ctx(s.space, mode(state));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_b(ctx).nonzeros());
  state.SetLabel(state.range(1) == 0 ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_convection)->ArgsProduct({{1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convection_cached)->ArgsProduct({{1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_viscous)->ArgsProduct({{1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_divergence)->ArgsProduct({{1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
