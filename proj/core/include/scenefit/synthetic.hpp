#pragma once

// Ground-truth scene and motion generation plus evaluation metrics. The
// generator composes database scenelet clips placed at chosen object
// locations with connecting walk segments, renders noisy 2D observations
// with visibility-driven confidences, and scores results against the truth.

#include <cstdint>
#include <map>
#include <variant>

#include "scenefit/config.hpp"
#include "scenefit/database.hpp"
#include "scenefit/energy.hpp"
#include "scenefit/track.hpp"

namespace scenefit {

// ------------------------------------------------------ procedural humanoid

struct BodyShape {
  double pelvis_height = 0.95;
  double hip_half_width = 0.15;
  double shoulder_half_width = 0.20;
  double spine_length = 0.50;
  double neck_length = 0.11;
  double head_length = 0.12;
  double thigh_length = 0.45;
  double shank_length = 0.42;
  double upper_arm_length = 0.30;
  double forearm_length = 0.26;
};

struct PoseParams {
  double pelvis_z = 0.95;
  double torso_lean = 0.0;   // forward pitch, radians
  double knee_pitch = 0.0;   // thigh pitch from vertical; pi/2 when seated
  double arm_raise = 0.0;    // 0 hanging, 1 extended forward-up
  double step_phase = 0.0;   // gait phase; legs/arms swing on sin(phase)
  double step_amplitude = 0.0;
};

/// A full 16-joint pose at a ground position and facing angle.
SkeletonFrame make_pose(const Vec2& ground, double facing, const PoseParams& params,
                        const BodyShape& shape = {});

std::vector<SkeletonFrame> walk_frames(const Vec2& from, const Vec2& to, double fps,
                                       double speed = 1.0, double* phase_io = nullptr,
                                       const BodyShape& shape = {});

/// Approach stance, sit-down, seated dwell with small sway, stand-up. The
/// actor ends standing in front of the seat again.
std::vector<SkeletonFrame> sit_cycle_frames(const Placement& seat_pose, double seat_height,
                                            double fps, double dwell_seconds = 1.5,
                                            const BodyShape& shape = {});

/// Stand at a shelf front, raise an arm toward it, hold, lower.
std::vector<SkeletonFrame> reach_cycle_frames(const Placement& shelf_pose, double fps,
                                              double dwell_seconds = 1.0,
                                              const BodyShape& shape = {});

SceneObject make_box_object(const std::string& label, const Placement& placement,
                            const Vec3& half_extents);

// ------------------------------------------------------------- recordings

struct WalkTo {
  Vec2 target = Vec2::Zero();
};
struct SitAt {
  int object_index = 0;
  double dwell_seconds = 1.5;
};
struct ReachAt {
  int object_index = 0;
  double dwell_seconds = 1.0;
};
using RecordingAction = std::variant<WalkTo, SitAt, ReachAt>;

struct RecordingTemplate {
  std::string name;
  double fps = 10.0;
  Vec2 start = Vec2::Zero();
  std::vector<SceneObject> objects;
  std::vector<RecordingAction> actions;
};

/// Assembles a labeled capture: connecting walks are inserted automatically
/// before each interaction. The seed jitters walking speed and dwell times.
Recording make_recording(const RecordingTemplate& tmpl, uint64_t seed);

// ------------------------------------------------------------ scene truth

struct InteractionSpec {
  int scenelet = -1;  // database record index
  Placement placement;
};

struct SceneTemplate {
  Camera camera;
  double fps = 10.0;
  Vec2 entry = Vec2::Zero();
  Vec2 exit = Vec2::Zero();
  std::vector<InteractionSpec> interactions;
  std::vector<SceneObject> extra_objects;  // non-interacted occluders etc.
};

struct GroundTruthScene {
  Camera camera;
  double fps = 10.0;
  std::vector<SceneObject> objects;            // world frame
  std::vector<bool> interacted;                // per object: from a scenelet
  std::vector<SkeletonFrame> motion;           // world frame
  std::vector<std::pair<int, int>> clip_spans;  // frame ranges of placed clips

  ObservationTrack track;  // filled by render_observations
  std::vector<std::array<bool, kJointCount>> visibility;

  bool frame_fully_visible(int t) const;
};

/// Deterministic under (template, db, seed). Plays the chosen scenelets'
/// clips under their placements and walks between them; objects come from
/// the placed scenelets (compatible duplicates merged) plus the extras.
GroundTruthScene generate_scene(const SceneTemplate& tmpl, const SceneletDatabase& db,
                                uint64_t seed);

/// Projects the motion through the camera with Gaussian pixel noise, samples
/// confidences by visibility (high when visible, low when occluded), and
/// attaches canonical local poses. Fills scene.track and scene.visibility.
ObservationTrack render_observations(GroundTruthScene& scene, const SynthConfig& cfg,
                                     uint64_t seed);

// -------------------------------------------------------------- evaluation

struct PoseError {
  double world_rmse = 0.0;   // meters
  double local_rmse = 0.0;   // meters, pelvis-relative
  double pixel_rmse = 0.0;   // pixels
  int frames_used = 0;
};

/// RMSE over the 14 metric joints in world, pelvis-relative, and image
/// space. An empty frame mask means all frames.
PoseError eval_pose(const std::vector<JointPositions>& result,
                    const std::vector<SkeletonFrame>& truth, const Camera& camera,
                    const std::vector<bool>& frame_mask = {});

struct ObjectSummary {
  std::string label;
  Vec2 centroid = Vec2::Zero();
};

std::vector<ObjectSummary> summarize_objects(const std::vector<SceneObject>& objects);
std::vector<ObjectSummary> summarize_objects(const std::vector<PlacedObject>& objects);

struct ObjectEval {
  double mean_centroid_distance = 0.0;  // meters over matches
  double stddev_centroid_distance = 0.0;
  int matched = 0;
  int unmatched_result = 0;
  int unmatched_truth = 0;
  std::map<std::string, int> matched_per_category;
  std::vector<double> match_distances;
};

/// Greedy same-label nearest-centroid matching.
ObjectEval eval_objects(const std::vector<ObjectSummary>& result,
                        const std::vector<ObjectSummary>& truth);

}  // namespace scenefit
