#include <benchmark/benchmark.h>

#include "helpers.hpp"
#include "scenefit/descriptor.hpp"
#include "scenefit/synthetic.hpp"

using namespace scenefit;
using namespace scenefit::testing;

static void BM_MotionDescriptor(benchmark::State& bench) {
  double phase = 0.0;
  const auto walk = walk_frames({0, 0}, {3, 1}, 30.0, 1.0, &phase);
  for (auto _ : bench) {
    benchmark::DoNotOptimize(motion_descriptor(walk));
  }
}
BENCHMARK(BM_MotionDescriptor);

static void BM_DescriptorDistance(benchmark::State& bench) {
  double phase = 0.0;
  const MotionDescriptor a = motion_descriptor(walk_frames({0, 0}, {3, 1}, 30.0, 1.0, &phase));
  const MotionDescriptor b = motion_descriptor(walk_frames({0, 0}, {2, -1}, 30.0, 1.2, &phase));
  for (auto _ : bench) {
    benchmark::DoNotOptimize(descriptor_distance(a, b));
  }
}
BENCHMARK(BM_DescriptorDistance);

static void BM_PoseDescriptor(benchmark::State& bench) {
  const SkeletonFrame f = standing_frame({0.3, 0.4}, 0.7);
  for (auto _ : bench) {
    benchmark::DoNotOptimize(pose_descriptor(f));
  }
}
BENCHMARK(BM_PoseDescriptor);
