#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "silcal/barcode.hpp"
#include "silcal/epigeom.hpp"
#include "silcal/hull.hpp"
#include "silcal/solver.hpp"
#include "silcal/synth.hpp"

using namespace silcal;

namespace {

// Every vertex far from every other, uniform random priors.
TrellisGraph random_trellis(int frames, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 5000.0), prob(0.05, 0.95);
  std::vector<std::vector<TrellisVertex>> layers(frames);
  for (auto& layer : layers) {
    for (int i = 0; i < k; ++i) {
      TrellisVertex v;
      v.left = v.right = i;
      v.x = Vec2(pos(rng), pos(rng));
      v.x_prime = Vec2(pos(rng), pos(rng));
      v.prior = VertexPrior{prob(rng)};
      layer.push_back(v);
    }
  }
  std::vector<std::vector<double>> tr(frames - 1);
  for (auto& stage : tr) {
    for (int n = 0; n < k * k; ++n) stage.push_back(prob(rng));
  }
  return TrellisGraph(std::move(layers), std::move(tr), 15.0);
}

std::vector<Correspondence> projected_points(int n, double outlier_rate, std::uint64_t seed) {
  const CameraPair cams = CameraPair::standard();
  const Mat34 P1 = cams.P1(), P2 = cams.P2();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), z(4.0, 6.0), px(0.0, 640.0), unit(0.0, 1.0);
  std::vector<Correspondence> out;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector4d X(u(rng), u(rng), z(rng), 1.0);
    Correspondence c;
    c.x = (P1 * X).hnormalized();
    c.x_prime = (P2 * X).hnormalized();
    if (unit(rng) < outlier_rate) c.x_prime = Vec2(px(rng), px(rng));
    out.push_back(c);
  }
  return out;
}

void BM_IterativeSolver(benchmark::State& state) {
  const TrellisGraph g = random_trellis(50, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_two_paths(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_IterativeSolver)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNSquared);

void BM_ExactSolver(benchmark::State& state) {
  const TrellisGraph g = random_trellis(50, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_two_paths_exact(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactSolver)->DenseRange(4, 20, 4)->Complexity([](benchmark::IterationCount k) {
  return static_cast<double>(k) * k * k * k;
});

void BM_MotionBarcode(benchmark::State& state) {
  const Scene scene = generate_scene("single-ellipsoid", 0, static_cast<int>(state.range(0)));
  const auto [left, right] = render_silhouettes(scene.script, scene.cameras);
  const Line2 line = Line2::from_normal(Vec2(0.6, 0.8), Vec2(320, 240));
  for (auto _ : state) benchmark::DoNotOptimize(motion_barcode(line, left));
}
BENCHMARK(BM_MotionBarcode)->Arg(50)->Arg(100)->Arg(200);

void BM_ConvexHull(benchmark::State& state) {
  const Scene scene = generate_scene("articulated-pair", 0, 1);
  const auto [left, right] = render_silhouettes(scene.script, scene.cameras);
  for (auto _ : state) benchmark::DoNotOptimize(extract_convex_hull(left[0]));
}
BENCHMARK(BM_ConvexHull);

void BM_Ransac(benchmark::State& state) {
  const auto pts = projected_points(static_cast<int>(state.range(0)), 0.4, 3);
  RansacOptions opt;
  opt.iterations = 2000;
  for (auto _ : state) benchmark::DoNotOptimize(ransac_fundamental(pts, opt));
}
BENCHMARK(BM_Ransac)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
