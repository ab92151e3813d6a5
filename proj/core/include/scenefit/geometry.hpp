#pragma once

// Geometric substrate: camera projection, rigid 4-DoF placements, cuboids,
// ground-plane polygons with signed distances, and camera shadow volumes.
//
// World frame convention: right-handed, Z up, ground plane at z = 0.
// Lengths in meters, angles in radians. The ground projection of a 3D
// point is its (x, y) pair.

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace scenefit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to [-pi, pi).
double wrap_angle(double theta);

/// Smallest absolute difference between two angles, in [0, pi].
double angle_distance(double a, double b);

// ---------------------------------------------------------------- placement

/// 4-DoF rigid placement: rotation by theta about the up (Z) axis followed
/// by a translation. theta is kept normalized to [-pi, pi).
struct Placement {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;

  static Placement identity() { return {}; }

  Placement normalized() const { return {x, y, z, wrap_angle(theta)}; }

  Vec3 translation() const { return {x, y, z}; }

  /// Rotates p about Z by theta, then translates.
  Vec3 apply(const Vec3& p) const;

  /// Rotates a ground-plane point about Z by theta, then translates by (x, y).
  Vec2 apply_ground(const Vec2& p) const;

  /// Composition: (*this) after `inner`, i.e. apply(inner.apply(p)).
  Placement compose(const Placement& inner) const;

  Placement inverse() const;

  Vec4 as_vector() const { return {x, y, z, theta}; }
  static Placement from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Derivative of Placement::apply(p) with respect to placement parameter
/// `param` (0:x, 1:y, 2:z, 3:theta), given the already-placed world point.
/// For theta the lever arm is taken about the placement origin.
Vec3 placement_point_derivative(const Placement& p, const Vec3& placed_point, int param);

// ------------------------------------------------------------------- camera

/// Pinhole camera: intrinsics in pixels plus a rigid world-to-camera pose.
/// Camera frame: x right, y down, z forward (positive depth).
struct Camera {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Eigen::Isometry3d world_to_camera = Eigen::Isometry3d::Identity();

  Vec3 to_camera(const Vec3& p_world) const { return world_to_camera * p_world; }

  /// Camera center in world coordinates.
  Vec3 eye() const { return world_to_camera.inverse().translation(); }

  /// Pinhole projection; empty when the point has non-positive camera depth
  /// (the joint is unobservable and the caller must skip it).
  std::optional<Vec2> project(const Vec3& p_world) const;

  /// Jacobian of the projected pixel with respect to the world point.
  /// Only valid where project() succeeds.
  Eigen::Matrix<double, 2, 3> projection_jacobian(const Vec3& p_world) const;

  bool pixel_in_image(const Vec2& px) const {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < width && px.y() < height;
  }
};

// ------------------------------------------------------------------ cuboids

/// Axis-extruded box in a local frame: center, strictly positive half
/// extents, and a yaw about the up axis.
struct Cuboid {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  double yaw = 0.0;
};

/// A cuboid after a placement has been applied. Stays upright: only the yaw
/// changes under placement, so the footprint is always a rectangle.
struct PlacedCuboid {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  double yaw = 0.0;

  /// 8 corners, indexed by bit pattern (bit0: +x, bit1: +y, bit2: +z).
  std::array<Vec3, 8> corners() const;

  double bottom() const { return center.z() - half_extents.z(); }
  double top() const { return center.z() + half_extents.z(); }
};

PlacedCuboid place_cuboid(const Cuboid& c, const Placement& p);

// ----------------------------------------------------------- ground polygon

/// Convex CCW polygon on the ground plane. Rectangles (the footprints of
/// placed cuboids) keep their local frame so the signed distance can use the
/// analytic box formula.
class GroundPolygon {
 public:
  static GroundPolygon rectangle(const Vec2& center, const Vec2& half_extents, double angle);

  /// Validates >= 3 vertices, strict convexity, CCW order, nonzero area.
  /// Throws std::invalid_argument otherwise.
  static GroundPolygon from_vertices(std::vector<Vec2> ccw_vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  double area() const;
  Vec2 centroid() const;
  bool contains(const Vec2& p) const { return signed_distance(p) <= 0.0; }

  /// Euclidean distance to the boundary, negative inside.
  double signed_distance(const Vec2& p) const;

  /// Unit gradient of the signed distance (one-sided at kinks).
  Vec2 signed_distance_gradient(const Vec2& p) const;

  /// Distance of p to the nearest gradient discontinuity of the signed
  /// distance field (diagonal axis switch inside a rectangle, corner-region
  /// boundary outside). +infinity where the field is locally smooth.
  double kink_margin(const Vec2& p) const;

  bool is_rectangle() const { return is_rect_; }
  const Vec2& rect_center() const { return rect_center_; }
  const Vec2& rect_half_extents() const { return rect_half_; }
  double rect_angle() const { return rect_angle_; }

 private:
  GroundPolygon() = default;

  std::vector<Vec2> vertices_;
  bool is_rect_ = false;
  Vec2 rect_center_ = Vec2::Zero();
  Vec2 rect_half_ = Vec2::Zero();
  double rect_angle_ = 0.0;
};

/// Footprints of the placed cuboids, one rectangle per cuboid.
std::vector<GroundPolygon> ground_projection(std::span<const Cuboid> cuboids, const Placement& p);

GroundPolygon cuboid_footprint(const PlacedCuboid& c);

/// Area of the intersection of two convex polygons (Sutherland-Hodgman).
double convex_intersection_area(const GroundPolygon& a, const GroundPolygon& b);

/// Clips a convex polygon (vertex list, CCW) against another; returns the
/// CCW vertex list of the intersection (possibly empty).
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip);

double polygon_area(const std::vector<Vec2>& ccw_vertices);

// ------------------------------------------------------------ shadow volume

/// The camera shadow of a single placed cuboid: the convex region hidden
/// behind the cuboid (its own interior included), expressed as an
/// intersection of half-spaces {x : n.x <= d}. Planes are either front faces
/// of the cuboid or planes through the eye and a silhouette edge.
struct ShadowPlane {
  Vec3 n = Vec3::Zero();  // unit outward normal
  double d = 0.0;
  enum class Kind { kFrontFace, kSilhouette } kind = Kind::kFrontFace;
  int face = -1;       // face index 0..5 for kFrontFace (0:+x 1:-x 2:+y 3:-y 4:+z 5:-z)
  int corner_a = -1;   // ordered silhouette edge corners (sign already fixed)
  int corner_b = -1;
};

struct ShadowHull {
  std::vector<ShadowPlane> planes;
  /// Smallest |n_f . eye - d_f| over the cuboid faces: how close the eye is
  /// to a silhouette topology change. Used to reject finite-difference
  /// comparisons near non-smooth configurations.
  double topology_margin = std::numeric_limits<double>::infinity();
  /// True when the eye is inside the cuboid (everything is hidden).
  bool eye_inside = false;
};

ShadowHull shadow_hull(const Vec3& eye, const PlacedCuboid& cuboid);

/// max over planes of (n.q - d): negative inside the shadow, exact distance
/// to the boundary there; a continuous lower bound on the distance outside.
/// `active_plane`, if given, receives the arg-max plane index, and
/// `runner_up_gap` the margin to the second-best plane.
double shadow_signed_distance(const ShadowHull& hull, const Vec3& q, int* active_plane = nullptr,
                              double* runner_up_gap = nullptr);

inline constexpr double kFullyVisible = std::numeric_limits<double>::infinity();

/// Signed distance of q to the union of the cuboids' shadow volumes:
/// min over cuboids; +infinity when there are no occluders.
double occlusion_signed_distance(const Camera& camera, std::span<const PlacedCuboid> occluders,
                                 const Vec3& q);

/// Visibility oracle by segment-vs-cuboid intersection: true when the open
/// segment from the camera center to q misses every cuboid (and q is outside
/// all of them).
bool segment_visible(const Camera& camera, std::span<const PlacedCuboid> occluders, const Vec3& q);

}  // namespace scenefit
