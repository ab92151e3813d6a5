#pragma once

// Scenelets: short motion clips together with the labeled objects within
// interaction range, stored in a canonical local frame (pelvis of the center
// frame at the ground-plane origin, facing +X).

#include <string>
#include <vector>

#include "scenefit/geometry.hpp"
#include "scenefit/skeleton.hpp"

namespace scenefit {

/// Default object category set; database files may extend it.
const std::vector<std::string>& default_categories();

struct SceneObject {
  Placement placement;          // object pose within its containing frame
  std::vector<Cuboid> cuboids;  // geometry, in the object's local frame
  std::string label;

  std::vector<PlacedCuboid> placed() const;
  std::vector<GroundPolygon> footprint() const;
  /// Area-weighted ground centroid of the footprint rectangles.
  Vec2 ground_centroid() const;
  /// min over the footprint rectangles of the signed distance.
  double ground_signed_distance(const Vec2& p) const;
};

SceneObject transform_object(const SceneObject& obj, const Placement& p);

struct LocalFrameRecord {
  int source_center_frame = 0;  // index into the source recording
  Placement world_from_local;   // inverse of the canonicalization transform
};

struct Scenelet {
  std::string id;
  std::vector<SkeletonFrame> frames;  // canonical local frame
  std::vector<SceneObject> objects;   // canonical local frame
  std::string source_scene;
  int center = 0;  // index into frames of the clip's center frame
  LocalFrameRecord local_frame;

  /// Ground-plane origin of the scenelet in its source scene.
  Vec2 source_origin() const {
    return {local_frame.world_from_local.x, local_frame.world_from_local.y};
  }
};

/// A recording to chop into scenelets: a motion plus labeled static objects,
/// all in one world frame.
struct Recording {
  std::string name;
  double fps = 10.0;
  std::vector<SkeletonFrame> frames;
  std::vector<SceneObject> objects;
};

/// 10 iterations of an arc-length moving average with the given radius.
/// Every pass replaces each vertex by the mean of the polyline restricted to
/// a window of equal arc length on both sides (truncated symmetrically near
/// the ends, so endpoints are preserved). Output length equals input length.
std::vector<Vec3> smooth_trajectory(const std::vector<Vec3>& points, double radius = 0.01,
                                    int iterations = 10);

/// Cumulative arc length of a polyline; front() == 0.
std::vector<double> cumulative_arc_length(const std::vector<Vec3>& points);

/// Objects whose ground footprint comes within `radius` (closed ball) of any
/// clip frame's ground-projected pelvis.
std::vector<SceneObject> select_objects(const std::vector<SkeletonFrame>& clip,
                                        const std::vector<SceneObject>& scene_objects,
                                        double radius = 1.0);

/// The rigid transform taking the recording frame to the scenelet-local
/// frame of `center`: pelvis ground position to the origin, forward to +X.
Placement canonical_transform(const SkeletonFrame& center);

/// Re-expresses a scenelet in the canonical frame of its own center frame.
Scenelet canonicalize(const Scenelet& s);

struct ExtractionParams {
  double arc_length = 1.5;  // meters of smoothed pelvis arc per scenelet
  double spacing = 0.25;    // meters between consecutive scenelet centers
};

/// Chops a recording into scenelets: centers are sampled at regular arc
/// length intervals on the smoothed pelvis trajectory, each clip spans
/// center +- arc_length/2, objects within 1 m are attached, and each
/// scenelet is canonicalized. Empty when the recording is shorter than one
/// arc length.
std::vector<Scenelet> extract_scenelets(const Recording& recording,
                                        const ExtractionParams& params = {});

}  // namespace scenefit
