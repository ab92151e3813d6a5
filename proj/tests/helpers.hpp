#pragma once

// Shared fixtures for the test suites: cameras, random scene pieces, and a
// few independent oracles.

#include <random>

#include "scenefit/geometry.hpp"
#include "scenefit/skeleton.hpp"

namespace scenefit::testing {

/// World-up is +Z; camera x right, y down, z forward.
inline Camera lookat_camera(const Vec3& eye, const Vec3& target, double fx = 1000.0,
                            double fy = 1000.0, int width = 1920, int height = 1080) {
  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  const Vec3 fwd = (target - eye).normalized();
  Vec3 right = fwd.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) right = Vec3::UnitY();
  right.normalize();
  Mat3 rot;
  rot.row(0) = right;
  rot.row(1) = fwd.cross(right);  // image y grows downward
  rot.row(2) = fwd;
  Eigen::Isometry3d w2c = Eigen::Isometry3d::Identity();
  w2c.linear() = rot;
  w2c.translation() = -rot * eye;
  cam.world_to_camera = w2c;
  return cam;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Placement random_placement(std::mt19937_64& rng, double span = 2.0) {
  return Placement{uniform(rng, -span, span), uniform(rng, -span, span), uniform(rng, -0.2, 0.2),
                   uniform(rng, -kPi, kPi)};
}

inline Cuboid random_cuboid(std::mt19937_64& rng) {
  Cuboid c;
  c.center = Vec3{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.3, 0.8)};
  c.half_extents = Vec3{uniform(rng, 0.2, 0.7), uniform(rng, 0.2, 0.7), uniform(rng, 0.2, 0.7)};
  c.yaw = uniform(rng, -kPi, kPi);
  return c;
}

/// Independent visibility oracle: densely samples the open segment from the
/// eye to q and tests containment in any cuboid (in its local frame).
inline bool raycast_visible(const Vec3& eye, const Vec3& q,
                            std::span<const PlacedCuboid> cuboids, int steps = 2000) {
  for (const PlacedCuboid& c : cuboids) {
    const double cy = std::cos(-c.yaw), sy = std::sin(-c.yaw);
    const auto to_local = [&](const Vec3& p) {
      const Vec3 r = p - c.center;
      return Vec3{cy * r.x() - sy * r.y(), sy * r.x() + cy * r.y(), r.z()};
    };
    for (int i = 1; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const Vec3 local = to_local(eye + t * (q - eye));
      if (std::abs(local.x()) <= c.half_extents.x() &&
          std::abs(local.y()) <= c.half_extents.y() &&
          std::abs(local.z()) <= c.half_extents.z()) {
        return false;
      }
    }
  }
  return true;
}

/// A plausible standing skeleton used where joint articulation is irrelevant.
inline SkeletonFrame standing_frame(const Vec2& ground = Vec2::Zero(), double facing = 0.0) {
  SkeletonFrame f;
  const double c = std::cos(facing), s = std::sin(facing);
  const auto place = [&](double fx, double fy, double fz) {
    return Vec3{ground.x() + c * fx - s * fy, ground.y() + s * fx + c * fy, fz};
  };
  // Deliberately not mirror-symmetric, so max/min selections never tie.
  f[kPelvis] = place(0, 0, 0.95);
  f[kHipLeft] = place(0, 0.15, 0.93);
  f[kHipRight] = place(0.01, -0.14, 0.92);
  f[kKneeLeft] = place(0.02, 0.16, 0.50);
  f[kKneeRight] = place(0.04, -0.145, 0.52);
  f[kAnkleLeft] = place(0.0, 0.17, 0.08);
  f[kAnkleRight] = place(-0.02, -0.15, 0.09);
  f[kShoulderCenter] = place(0, 0, 1.45);
  f[kShoulderLeft] = place(0, 0.20, 1.43);
  f[kShoulderRight] = place(0.01, -0.21, 1.42);
  f[kElbowLeft] = place(0.03, 0.24, 1.15);
  f[kElbowRight] = place(0.05, -0.25, 1.13);
  f[kWristLeft] = place(0.06, 0.26, 0.90);
  f[kWristRight] = place(0.09, -0.27, 0.88);
  f[kHead] = place(0.01, 0, 1.58);
  f[kHeadTop] = place(0.012, 0.003, 1.70);
  return f;
}

inline SkeletonFrame random_frame(std::mt19937_64& rng) {
  SkeletonFrame f = standing_frame({uniform(rng, -2, 2), uniform(rng, -2, 2)},
                                   uniform(rng, -kPi, kPi));
  for (Vec3& j : f.joints) {
    j += Vec3{uniform(rng, -0.08, 0.08), uniform(rng, -0.08, 0.08), uniform(rng, -0.08, 0.08)};
  }
  return f;
}

}  // namespace scenefit::testing
