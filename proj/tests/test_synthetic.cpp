#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "scenefit/database.hpp"
#include "scenefit/synthetic.hpp"

using namespace scenefit;
using namespace scenefit::testing;

namespace {

SceneletDatabase small_db() {
  RecordingTemplate tmpl;
  tmpl.name = "roomA";
  tmpl.fps = 10.0;
  tmpl.start = {-2.5, 0.0};
  tmpl.objects = {make_box_object("chair", Placement{1.0, 0.0, 0.0, kPi}, {0.25, 0.25, 0.22}),
                  make_box_object("shelf", Placement{0.5, 2.0, 0.0, -kPi / 2}, {0.5, 0.22, 0.9})};
  tmpl.actions = {SitAt{0, 1.5}, ReachAt{1, 1.0}, WalkTo{{-2.0, 1.0}}};
  DatabaseParams params;
  params.charness_sigma = 0.15;
  return build_database({make_recording(tmpl, 3)}, params);
}

int sit_record(const SceneletDatabase& db) {
  int best = 0;
  for (size_t i = 0; i < db.size(); ++i) {
    if (db[i].charness.scenelet_charness > db[best].charness.scenelet_charness) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

SceneTemplate template_for(const SceneletDatabase& db) {
  SceneTemplate tmpl;
  tmpl.camera = lookat_camera({-5.0, 0.0, 1.7}, {0.0, 0.0, 1.0});
  tmpl.fps = 10.0;
  tmpl.entry = {-2.5, -1.5};
  tmpl.exit = {-2.5, 1.5};
  tmpl.interactions = {{sit_record(db), Placement{0.7, 0.3, 0.0, 0.5}}};
  return tmpl;
}

}  // namespace

TEST_CASE("procedural poses stay on the ground and articulate") {
  PoseParams standing;
  const SkeletonFrame stand = make_pose({0, 0}, 0.3, standing);
  CHECK(stand[kAnkleLeft].z() < 0.15);
  CHECK(stand[kPelvis].z() == doctest::Approx(0.95));
  CHECK(stand[kHeadTop].z() > 1.6);

  PoseParams seated;
  seated.pelvis_z = 0.5;
  seated.knee_pitch = 0.5 * kPi;
  const SkeletonFrame sit = make_pose({0, 0}, 0.0, seated);
  CHECK(sit[kPelvis].z() == doctest::Approx(0.5));
  // Knees land in front of the pelvis when seated.
  CHECK(sit[kKneeLeft].x() > sit[kPelvis].x() + 0.3);
  // Descriptors tell sitting from standing apart.
  CHECK((pose_descriptor(sit) - pose_descriptor(stand)).norm() > 0.1);
}

TEST_CASE("recordings assemble walks and interactions") {
  RecordingTemplate tmpl;
  tmpl.name = "r";
  tmpl.fps = 10.0;
  tmpl.start = {-2.0, 0.0};
  tmpl.objects = {make_box_object("chair", Placement{1.0, 0.0, 0.0, kPi}, {0.25, 0.25, 0.22})};
  tmpl.actions = {SitAt{0, 1.0}};
  const Recording rec = make_recording(tmpl, 7);
  REQUIRE(rec.frames.size() > 20);
  // The actor reaches the chair and sits: pelvis drops below 0.7 m somewhere.
  double min_pelvis = 1e9;
  for (const SkeletonFrame& f : rec.frames) min_pelvis = std::min(min_pelvis, f[kPelvis].z());
  CHECK(min_pelvis < 0.7);
  // Timestamps follow the frame rate.
  CHECK(rec.frames[5].time == doctest::Approx(0.5));
}

TEST_CASE("scene generation") {
  const SceneletDatabase db = small_db();
  REQUIRE(db.size() > 3);
  const SceneTemplate tmpl = template_for(db);

  SUBCASE("the same seed reproduces the scene exactly") {
    const GroundTruthScene a = generate_scene(tmpl, db, 42);
    const GroundTruthScene b = generate_scene(tmpl, db, 42);
    REQUIRE(a.motion.size() == b.motion.size());
    for (size_t t = 0; t < a.motion.size(); ++t) {
      for (int k = 0; k < kJointCount; ++k) {
        CHECK((a.motion[t].joints[k] - b.motion[t].joints[k]).norm() == 0.0);
      }
    }
    REQUIRE(a.objects.size() == b.objects.size());
  }

  SUBCASE("different seeds change the connecting walks") {
    const GroundTruthScene a = generate_scene(tmpl, db, 1);
    const GroundTruthScene b = generate_scene(tmpl, db, 2);
    CHECK(a.motion.size() != b.motion.size());
  }

  SUBCASE("an empty template yields an empty scene") {
    SceneTemplate empty;
    empty.camera = tmpl.camera;
    empty.entry = empty.exit = Vec2{0, 0};
    const GroundTruthScene scene = generate_scene(empty, db, 3);
    CHECK(scene.objects.empty());
    CHECK(scene.motion.empty());
  }

  SUBCASE("interacted objects land at the placed scenelet's objects") {
    const GroundTruthScene scene = generate_scene(tmpl, db, 4);
    REQUIRE(!scene.objects.empty());
    const Scenelet& s = db[tmpl.interactions[0].scenelet].scenelet;
    REQUIRE(!s.objects.empty());
    // Every scenelet object appears, transformed by the placement.
    for (const SceneObject& obj : s.objects) {
      const SceneObject placed = transform_object(obj, tmpl.interactions[0].placement);
      bool found = false;
      for (const SceneObject& got : scene.objects) {
        if (got.label == placed.label &&
            (got.ground_centroid() - placed.ground_centroid()).norm() < 1e-9) {
          found = true;
        }
      }
      CHECK(found);
    }
  }
}

TEST_CASE("rendered observations") {
  const SceneletDatabase db = small_db();
  const SceneTemplate tmpl = template_for(db);
  GroundTruthScene scene = generate_scene(tmpl, db, 11);
  SynthConfig cfg;

  SUBCASE("zero noise reproduces exact projections for visible joints") {
    cfg.pixel_noise_sigma = 0.0;
    const ObservationTrack track = render_observations(scene, cfg, 5);
    REQUIRE(track.size() == static_cast<int>(scene.motion.size()));
    for (int t = 0; t < track.size(); ++t) {
      for (int k = 0; k < kJointCount; ++k) {
        if (!scene.visibility[t][k]) continue;
        const auto proj = scene.camera.project(scene.motion[t].joints[k]);
        REQUIRE(proj.has_value());
        CHECK((track.frames[t].joints[k].pixel - *proj).norm() < 1e-9);
      }
    }
  }

  SUBCASE("confidences follow visibility with the 0.5 split") {
    const ObservationTrack track = render_observations(scene, cfg, 6);
    for (int t = 0; t < track.size(); ++t) {
      for (int k = 0; k < kJointCount; ++k) {
        const double c = track.frames[t].joints[k].confidence;
        if (scene.visibility[t][k]) {
          CHECK(c >= 0.5);
        } else {
          CHECK(c < 0.5);
        }
      }
    }
  }

  SUBCASE("visibility flags agree with the ray-cast oracle") {
    const ObservationTrack track = render_observations(scene, cfg, 7);
    std::vector<PlacedCuboid> cuboids;
    for (const SceneObject& o : scene.objects) {
      for (const PlacedCuboid& c : o.placed()) cuboids.push_back(c);
    }
    int checked = 0;
    for (int t = 0; t < track.size(); t += 3) {
      for (int k = 0; k < kJointCount; k += 2) {
        const Vec3& q = scene.motion[t].joints[k];
        const double sd = occlusion_signed_distance(scene.camera, cuboids, q);
        if (std::abs(sd) < 0.02) continue;  // boundary band
        const auto proj = scene.camera.project(q);
        if (!proj || !scene.camera.pixel_in_image(*proj)) continue;
        CHECK(scene.visibility[t][k] == raycast_visible(scene.camera.eye(), q, cuboids));
        ++checked;
      }
    }
    CHECK(checked > 20);
  }

  SUBCASE("a wall in front of the actor drives all confidences low") {
    GroundTruthScene blocked = scene;
    blocked.objects.push_back(
        make_box_object("shelf", Placement{-2.0, 0.0, 0.0, 0.0}, {0.4, 4.0, 2.5}));
    blocked.interacted.push_back(false);
    render_observations(blocked, cfg, 8);
    int occluded_frames = 0;
    for (int t = 0; t < blocked.track.size(); ++t) {
      bool all_low = true;
      for (int k = 0; k < kJointCount; ++k) {
        if (blocked.track.frames[t].joints[k].confidence >= 0.5) all_low = false;
      }
      if (all_low) ++occluded_frames;
    }
    CHECK(occluded_frames > blocked.track.size() / 2);
  }
}

TEST_CASE("pose evaluation metrics") {
  const Camera cam = lookat_camera({-5, 0, 1.7}, {0, 0, 1});
  std::vector<SkeletonFrame> truth;
  for (int i = 0; i < 12; ++i) truth.push_back(standing_frame({0.1 * i, 0.2}, 0.1 * i));

  SUBCASE("identical poses have zero error") {
    std::vector<JointPositions> result;
    for (const SkeletonFrame& f : truth) result.push_back(f.joints);
    const PoseError err = eval_pose(result, truth, cam);
    CHECK(err.world_rmse == doctest::Approx(0.0));
    CHECK(err.local_rmse == doctest::Approx(0.0));
    CHECK(err.pixel_rmse == doctest::Approx(0.0));
  }

  SUBCASE("a uniform world offset moves world RMSE but not local") {
    std::vector<JointPositions> result;
    for (const SkeletonFrame& f : truth) {
      JointPositions j = f.joints;
      for (Vec3& v : j) v += Vec3{0.1, 0.0, 0.0};
      result.push_back(j);
    }
    const PoseError err = eval_pose(result, truth, cam);
    CHECK(err.world_rmse == doctest::Approx(0.1));
    CHECK(err.local_rmse == doctest::Approx(0.0));
  }

  SUBCASE("random perturbations match the direct-formula oracle") {
    std::mt19937_64 rng(13);
    std::vector<JointPositions> result;
    for (const SkeletonFrame& f : truth) {
      JointPositions j = f.joints;
      for (Vec3& v : j) {
        v += Vec3{uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05),
                  uniform(rng, -0.05, 0.05)};
      }
      result.push_back(j);
    }
    const PoseError err = eval_pose(result, truth, cam);

    double world_acc = 0.0, local_acc = 0.0;
    int count = 0;
    for (size_t t = 0; t < truth.size(); ++t) {
      for (Joint j : metric_joints()) {
        world_acc += (result[t][j] - truth[t].joints[j]).squaredNorm();
        const Vec3 rl = result[t][j] - result[t][kPelvis];
        const Vec3 tl = truth[t].joints[j] - truth[t].joints[kPelvis];
        local_acc += (rl - tl).squaredNorm();
        ++count;
      }
    }
    CHECK(err.world_rmse == doctest::Approx(std::sqrt(world_acc / count)).epsilon(1e-12));
    CHECK(err.local_rmse == doctest::Approx(std::sqrt(local_acc / count)).epsilon(1e-12));
  }

  SUBCASE("the frame mask restricts the average") {
    std::vector<JointPositions> result;
    for (const SkeletonFrame& f : truth) result.push_back(f.joints);
    for (Vec3& v : result[0]) v += Vec3{1.0, 0.0, 0.0};  // corrupt frame 0 only
    std::vector<bool> mask(truth.size(), true);
    mask[0] = false;
    const PoseError err = eval_pose(result, truth, cam, mask);
    CHECK(err.world_rmse == doctest::Approx(0.0));
    CHECK(err.frames_used == static_cast<int>(truth.size()) - 1);
  }
}

TEST_CASE("object evaluation") {
  const auto summary = [](const std::string& label, double x, double y) {
    return ObjectSummary{label, Vec2{x, y}};
  };

  SUBCASE("identical scenes match perfectly") {
    const std::vector<ObjectSummary> objs = {summary("chair", 1, 0), summary("table", 0, 2)};
    const ObjectEval eval = eval_objects(objs, objs);
    CHECK(eval.matched == 2);
    CHECK(eval.mean_centroid_distance == doctest::Approx(0.0));
    CHECK(eval.unmatched_result == 0);
    CHECK(eval.unmatched_truth == 0);
  }

  SUBCASE("a missing object counts as unmatched truth") {
    const std::vector<ObjectSummary> truth = {summary("chair", 1, 0), summary("table", 0, 2)};
    const std::vector<ObjectSummary> result = {summary("chair", 1.1, 0)};
    const ObjectEval eval = eval_objects(result, truth);
    CHECK(eval.matched == 1);
    CHECK(eval.unmatched_truth == 1);
    CHECK(eval.unmatched_result == 0);
    CHECK(eval.mean_centroid_distance == doctest::Approx(0.1));
  }

  SUBCASE("labels never cross-match") {
    const std::vector<ObjectSummary> truth = {summary("chair", 0, 0)};
    const std::vector<ObjectSummary> result = {summary("table", 0, 0)};
    const ObjectEval eval = eval_objects(result, truth);
    CHECK(eval.matched == 0);
    CHECK(eval.unmatched_truth == 1);
    CHECK(eval.unmatched_result == 1);
  }

  SUBCASE("three jittered objects match the exhaustive assignment") {
    const std::vector<ObjectSummary> truth = {summary("chair", 0, 0), summary("chair", 2, 0),
                                              summary("table", 0, 2)};
    const std::vector<ObjectSummary> result = {summary("chair", 0.05, 0.02),
                                               summary("chair", 2.04, -0.03),
                                               summary("table", 0.01, 2.02)};
    const ObjectEval eval = eval_objects(result, truth);
    CHECK(eval.matched == 3);
    // Exhaustive oracle: the only sensible assignment pairs nearest copies.
    const double expected =
        ((Vec2{0.05, 0.02}).norm() + (Vec2{0.04, -0.03}).norm() + (Vec2{0.01, 0.02}).norm()) /
        3.0;
    CHECK(eval.mean_centroid_distance == doctest::Approx(expected).epsilon(1e-9));
    CHECK(eval.matched_per_category.at("chair") == 2);
  }
}
