#include <benchmark/benchmark.h>

#include <random>

#include "helpers.hpp"
#include "scenefit/geometry.hpp"

using namespace scenefit;
using namespace scenefit::testing;

static void BM_ShadowHull(benchmark::State& bench) {
  std::mt19937_64 rng(3);
  const Vec3 eye{-6.0, 0.0, 1.7};
  PlacedCuboid c;
  c.center = Vec3{0.4, -0.2, 0.6};
  c.half_extents = Vec3{0.4, 0.3, 0.6};
  c.yaw = 0.7;
  for (auto _ : bench) {
    benchmark::DoNotOptimize(shadow_hull(eye, c));
  }
}
BENCHMARK(BM_ShadowHull);

static void BM_OcclusionQuery(benchmark::State& bench) {
  const Vec3 eye{-6.0, 0.0, 1.7};
  PlacedCuboid c;
  c.center = Vec3{0.4, -0.2, 0.6};
  c.half_extents = Vec3{0.4, 0.3, 0.6};
  c.yaw = 0.7;
  const ShadowHull hull = shadow_hull(eye, c);
  std::mt19937_64 rng(5);
  std::vector<Vec3> queries;
  for (int i = 0; i < 512; ++i) {
    queries.push_back(Vec3{uniform(rng, -1, 3), uniform(rng, -2, 2), uniform(rng, 0, 2)});
  }
  size_t i = 0;
  for (auto _ : bench) {
    benchmark::DoNotOptimize(shadow_signed_distance(hull, queries[i++ & 511]));
  }
}
BENCHMARK(BM_OcclusionQuery);

static void BM_PolygonSignedDistance(benchmark::State& bench) {
  const GroundPolygon rect = GroundPolygon::rectangle({0.3, -0.4}, {0.6, 0.4}, 0.8);
  std::mt19937_64 rng(7);
  std::vector<Vec2> queries;
  for (int i = 0; i < 512; ++i) {
    queries.push_back(Vec2{uniform(rng, -2, 2), uniform(rng, -2, 2)});
  }
  size_t i = 0;
  for (auto _ : bench) {
    benchmark::DoNotOptimize(rect.signed_distance(queries[i++ & 511]));
  }
}
BENCHMARK(BM_PolygonSignedDistance);
