#include <benchmark/benchmark.h>

#include "helpers.hpp"
#include "scenefit/energy.hpp"
#include "scenefit/synthetic.hpp"

using namespace scenefit;
using namespace scenefit::testing;

namespace {

struct Fixture {
  std::shared_ptr<SceneletDatabase> db;
  SceneState state{nullptr, 0};
  ObservationTrack track;
  Camera camera = lookat_camera({-6.0, 0.0, 1.7}, {0.0, 0.0, 1.0});
  Weights weights;

  Fixture() : db(std::make_shared<SceneletDatabase>()) {
    Scenelet s;
    for (int i = 0; i < 12; ++i) s.frames.push_back(standing_frame({0.08 * i, 0.0}, 0.0));
    s.center = 6;
    s.id = "bench/sit";
    s.source_scene = "bench";
    s.objects = {make_box_object("chair", Placement{0.5, 0.0, 0.0, 0.0}, {0.25, 0.25, 0.35}),
                 make_box_object("table", Placement{0.4, 0.9, 0.0, 0.4}, {0.55, 0.35, 0.36})};
    db->add(canonicalize(s));
    db->finalize();

    const int n = 60;
    state = SceneState(db, n);
    std::vector<std::optional<JointPositions>> poses(n);
    for (int t = 0; t < n; ++t) {
      const SkeletonFrame f = standing_frame({0, 0}, 0.0);
      JointPositions local;
      for (int k = 0; k < kJointCount; ++k) local[k] = f.joints[k] - f[kPelvis];
      poses[t] = local;
    }
    state.set_local_poses(std::move(poses));
    state.assign(0, 20);
    std::mt19937_64 rng(1);
    for (int t = 0; t < n; ++t) state.set_placement(t, random_placement(rng, 1.0));

    track.fps = 10.0;
    track.frames.resize(n);
    const auto q = state.combined_joints();
    for (int t = 0; t < n; ++t) {
      for (int k = 0; k < kJointCount; ++k) {
        track.frames[t].joints[k].pixel = camera.project(q[t][k]).value_or(Vec2{0, 0});
        track.frames[t].joints[k].confidence = (t + k) % 3 == 0 ? 0.2 : 0.9;
      }
      track.frames[t].local_pose = state.local_poses()[t];
    }
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

static void BM_TotalEnergy(benchmark::State& bench) {
  Fixture& f = fixture();
  for (auto _ : bench) {
    benchmark::DoNotOptimize(total_energy(f.state, f.track, f.camera, f.weights));
  }
}
BENCHMARK(BM_TotalEnergy);

static void BM_EnergyGradient(benchmark::State& bench) {
  Fixture& f = fixture();
  for (auto _ : bench) {
    benchmark::DoNotOptimize(energy_gradient(f.state, f.track, f.camera, f.weights));
  }
}
BENCHMARK(BM_EnergyGradient);

static void BM_SceneObjects(benchmark::State& bench) {
  Fixture& f = fixture();
  for (auto _ : bench) {
    benchmark::DoNotOptimize(f.state.scene_objects());
  }
}
BENCHMARK(BM_SceneObjects);

BENCHMARK_MAIN();
