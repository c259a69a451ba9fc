#include <benchmark/benchmark.h>

#include "confsym/dynamics.hpp"
#include "confsym/entropy.hpp"
#include "confsym/rng.hpp"
#include "confsym/systems.hpp"

using namespace confsym;

namespace {

void BM_SuspensionOmegaEval(benchmark::State& state) {
  auto ex = make_suspension_example();
  CounterRng rng(1);
  Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
  Vec u = rng.direction(4);
  Vec v = rng.direction(4);
  for (auto _ : state) benchmark::DoNotOptimize(ex.omega(x, u, v));
}
BENCHMARK(BM_SuspensionOmegaEval);

void BM_Torus6Pullback(benchmark::State& state) {
  auto ex = make_torus6_example();
  DifferentialForm pulled = pullback(ex.map.forward, ex.omega);
  CounterRng rng(2);
  Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
  Vec u = rng.direction(6);
  Vec v = rng.direction(6);
  for (auto _ : state) benchmark::DoNotOptimize(pulled(x, u, v));
}
BENCHMARK(BM_Torus6Pullback);

void BM_Rk4LiftStep(benchmark::State& state) {
  auto lift = make_mane_lift(
      2,
      [](const Vec& q) {
        Vec X(2);
        X << std::sin(6.283 * q(1)), std::cos(6.283 * q(0));
        return X;
      },
      1.5);
  Point x0{lift.manifold, Vec::Constant(4, 0.3)};
  IntegrationOptions opts;
  opts.dt = 1e-2;
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate(lift.flow, x0, 0.1, opts));
}
BENCHMARK(BM_Rk4LiftStep);

void BM_ItineraryCounting(benchmark::State& state) {
  auto cat = make_cat_map();
  const double p = golden_p();
  const Eigen::Vector2d dir = Eigen::Vector2d(1.0, p).normalized() * 0.5;
  ParamSubmanifold seg(
      cat.manifold, 1, {false},
      [dir](const Vec& u) {
        Vec x(2);
        x(0) = 0.51 + u(0) * dir(0);
        x(1) = 0.5 + u(0) * dir(1);
        return x;
      },
      nullptr);
  CubePartition part(cat.manifold, 32);
  ItineraryOptions opts;
  opts.k_max = static_cast<int>(state.range(0));
  opts.grid = 100000;
  for (auto _ : state)
    benchmark::DoNotOptimize(itinerary_entropy(cat, seg, part, opts));
}
BENCHMARK(BM_ItineraryCounting)->Arg(6)->Arg(10);

void BM_LineIntegral(benchmark::State& state) {
  auto m = ChartedManifold::cotangent_torus(1);
  DifferentialForm lambda = cotangent_lambda(m, 1);
  Loop loop(m, [](double t) {
    Vec x(2);
    x << t, 0.4 + 0.2 * std::sin(6.283185307179586 * t);
    return x;
  });
  for (auto _ : state) benchmark::DoNotOptimize(line_integral(lambda, loop));
}
BENCHMARK(BM_LineIntegral);

}  // namespace

BENCHMARK_MAIN();
