#pragma once

// The scene state (per-frame placements plus the scenelet assignment) and
// the five-term fitting energy with analytic gradients with respect to all
// active placement parameters.

#include <memory>
#include <span>
#include <vector>

#include "scenefit/database.hpp"
#include "scenefit/track.hpp"

namespace scenefit {

// ----------------------------------------------------------------- weights

struct Weights {
  double reprojection = 1.0;    // w_r
  double occlusion = 0.1;       // w_o
  double smoothness = 0.005;    // w_s, calibrated at 10 fps
  double object_isect = 1.0;    // w_c
  double motion_isect = 1.0;    // w_m

  /// Smoothness weight scaled linearly with frame rate so the physical
  /// penalty strength is fps-independent.
  double smoothness_at(double fps) const { return smoothness * fps / 10.0; }
};

struct EnergyOptions {
  /// Sample spacing for the object-intersection integral, meters.
  double isect_grid_pitch = 0.1;
  /// Angular tolerance for the same-orientation exemption, radians.
  double compat_angle_tol = 5.0 * kPi / 180.0;
  /// Use the clamped (penetration-only) motion intersection term rather
  /// than the raw signed-distance sum.
  bool clamp_motion_isect = true;
  /// Visibility distances are capped here before the asymmetric occlusion
  /// cost: a missing detection that no object explains (including the
  /// no-object case, where the signed distance is +infinity) pays the
  /// full-cap penalty instead of an unbounded or skipped one.
  double occlusion_cap = 1.0;
};

// -------------------------------------------------------------- assignment

/// Sparse scenelet-to-start-frame assignment. At most one scenelet covers
/// any frame (eta_t <= 1).
class Assignment {
 public:
  struct Entry {
    int scenelet = -1;  // database record index
    int start = 0;      // first covered video frame
  };

  /// Throws std::invalid_argument if the new span overlaps an existing one
  /// or leaves the video.
  void assign(int scenelet_index, int start_frame, int clip_length, int video_frames);

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); spans_.clear(); }

  /// Number of scenelets covering frame t (0 or 1 by the invariant).
  int eta(int t) const { return covering(t) >= 0 ? 1 : 0; }

  /// Index into entries() of the scenelet covering frame t, or -1.
  int covering(int t) const;

 private:
  std::vector<Entry> entries_;
  std::vector<std::pair<int, int>> spans_;  // [start, end) per entry
};

// -------------------------------------------------------------- scene state

struct PlacedObject {
  std::string label;
  double world_yaw = 0.0;             // object orientation after placement
  std::vector<PlacedCuboid> cuboids;  // world frame, ground-anchored
  std::vector<GroundPolygon> footprint;
  Vec2 ground_centroid = Vec2::Zero();
  int owner_entry = -1;  // index into Assignment::entries(), -1 for static
};

/// Placements, assignment, and the track they explain. Placement P_t is the
/// scenelet placement when a scenelet starts at t and the static-skeleton
/// placement when frame t is uncovered; covered non-start frames have
/// inactive placements.
class SceneState {
 public:
  /// Empty state: zero frames over an empty database.
  SceneState();
  SceneState(std::shared_ptr<const SceneletDatabase> db, int n_frames);

  int frames() const { return n_frames_; }
  const SceneletDatabase& db() const { return *db_; }
  const std::shared_ptr<const SceneletDatabase>& db_ptr() const { return db_; }

  const Assignment& assignment() const { return assignment_; }
  void assign(int scenelet_index, int start_frame);
  void clear_assignment() { assignment_.clear(); }

  const std::vector<Placement>& placements() const { return placements_; }
  std::vector<Placement>& placements() { return placements_; }
  void set_placement(int t, const Placement& p) { placements_[t] = p; }

  /// Local 3D poses for uncovered frames, usually copied from the track.
  void set_local_poses(std::vector<std::optional<JointPositions>> poses);
  const std::vector<std::optional<JointPositions>>& local_poses() const { return local_poses_; }

  /// Extra objects treated as part of the scene but not owned by any
  /// placement (earlier actors' furniture, for example).
  void set_static_objects(std::vector<SceneObject> objects);
  const std::vector<SceneObject>& static_objects() const { return static_objects_; }

  /// After object selection: restrict the scene to this subset of derived
  /// object indices (indices into the unfiltered scene_objects() list).
  void set_object_filter(std::vector<int> keep);
  void clear_object_filter();
  const std::vector<int>& object_filter() const { return object_filter_; }
  bool object_filter_engaged() const { return filter_engaged_; }

  /// Index of the placement that moves frame t's joints: the covering
  /// scenelet's start frame, or t itself.
  int placement_index(int t) const;

  /// True for frames that own an active placement (scenelet starts and
  /// uncovered frames).
  std::vector<bool> active_placements() const;

  /// q-hat: zero for uncovered frames.
  std::vector<JointPositions> joints_from_scenelets() const;
  /// q-check: zero for covered frames. Throws std::logic_error when an
  /// uncovered frame has no local pose.
  std::vector<JointPositions> joints_from_skeletons() const;
  /// q = q-hat + q-check.
  std::vector<JointPositions> combined_joints() const;

  /// Objects derived from assigned scenelets (plus static extras), placed in
  /// the world and re-anchored to the ground, with the object filter applied.
  std::vector<PlacedObject> scene_objects() const;

 private:
  std::shared_ptr<const SceneletDatabase> db_;
  int n_frames_ = 0;
  Assignment assignment_;
  std::vector<Placement> placements_;
  std::vector<std::optional<JointPositions>> local_poses_;
  std::vector<SceneObject> static_objects_;
  std::vector<int> object_filter_;
  bool filter_engaged_ = false;
};

// ------------------------------------------------------------------- energy

struct EnergyBreakdown {
  double reprojection = 0.0;   // L_r
  double occlusion = 0.0;      // L_o
  double smoothness = 0.0;     // L_s
  double object_isect = 0.0;   // L_c
  double motion_isect = 0.0;   // L_m
  double total = 0.0;

  int skipped_behind_camera = 0;
  /// Smallest margin to any selection/topology boundary encountered while
  /// evaluating the non-smooth terms; finite-difference gradient checks
  /// reject states where this is tiny.
  double boundary_margin = std::numeric_limits<double>::infinity();
};

double asymmetric_occlusion_cost(double v, double c);

double reprojection_term(const SceneState& state, const ObservationTrack& track,
                         const Camera& camera, int* skipped = nullptr);
double occlusion_term(const SceneState& state, const ObservationTrack& track,
                      const Camera& camera, const EnergyOptions& opts = {});
double smoothness_term(const SceneState& state);
double object_intersection_term(std::span<const PlacedObject> objects,
                                const EnergyOptions& opts = {});
double motion_intersection_term(const SceneState& state, std::span<const PlacedObject> objects,
                                const EnergyOptions& opts = {});

EnergyBreakdown total_energy(const SceneState& state, const ObservationTrack& track,
                             const Camera& camera, const Weights& weights,
                             const EnergyOptions& opts = {});

/// Gradient of the weighted total with respect to every active placement:
/// one Vec4 (x, y, z, theta) per frame; inactive rows are zero.
struct EnergyGradient {
  EnergyBreakdown breakdown;
  std::vector<Vec4> d_placement;
};

EnergyGradient energy_gradient(const SceneState& state, const ObservationTrack& track,
                               const Camera& camera, const Weights& weights,
                               const EnergyOptions& opts = {});

/// True when two objects are duplicate representations of one real object:
/// same label and same orientation within the tolerance.
bool objects_compatible(const PlacedObject& a, const PlacedObject& b, double angle_tol);

/// Ground positions of the three motion-intersection joints for one frame.
struct GroundJoints {
  std::array<Vec2, 3> points{};  // pelvis, knee left, knee right
};

/// Motion-intersection contribution of fixed (non-optimized) frames against
/// objects that all ride on the placement `owner`: per frame the max over
/// the three joints of the min over objects of the footprint signed
/// distance, clamped per the options. `grad`, when given, accumulates the
/// derivative with respect to the owner placement (weighted by `weight`).
double motion_isect_fixed_frames(std::span<const GroundJoints> frames,
                                 std::span<const PlacedObject> objects, const Placement& owner,
                                 const EnergyOptions& opts, double weight = 1.0,
                                 Vec4* grad = nullptr);

}  // namespace scenefit
