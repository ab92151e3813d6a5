#include "scenefit/skeleton.hpp"

#include <cmath>
#include <stdexcept>

namespace scenefit {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "pelvis",         "hip_left",      "knee_left",  "ankle_left",
    "hip_right",      "knee_right",    "ankle_right", "shoulder_center",
    "shoulder_left",  "elbow_left",    "wrist_left", "shoulder_right",
    "elbow_right",    "wrist_right",   "head",       "head_top"};

}  // namespace

std::string_view joint_name(Joint j) { return kJointNames[j]; }

Joint joint_from_name(std::string_view name) {
  for (int i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return static_cast<Joint>(i);
  }
  throw std::invalid_argument("unknown joint name: " + std::string(name));
}

const std::array<Joint, 14>& metric_joints() {
  static const std::array<Joint, 14> joints = {
      kHipLeft,      kKneeLeft,     kAnkleLeft,  kHipRight,   kKneeRight,
      kAnkleRight,   kShoulderCenter, kShoulderLeft, kElbowLeft,  kWristLeft,
      kShoulderRight, kElbowRight,  kWristRight, kHead};
  return joints;
}

Vec2 forward_direction(const SkeletonFrame& frame) {
  const Vec3 up = Vec3::UnitZ();
  Vec3 axis = frame[kHipRight] - frame[kHipLeft];
  Vec2 fwd = up.cross(axis).head<2>();
  if (fwd.norm() < 1e-9) {
    axis = frame[kShoulderRight] - frame[kShoulderLeft];
    fwd = up.cross(axis).head<2>();
  }
  if (fwd.norm() < 1e-9) return Vec2::UnitX();
  return fwd.normalized();
}

double forward_angle(const SkeletonFrame& frame) {
  const Vec2 f = forward_direction(frame);
  return std::atan2(f.y(), f.x());
}

double point_line_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len = ab.norm();
  if (len < 1e-12) return (p - a).norm();
  return (p - a).cross(ab).norm() / len;
}

PoseDescriptor pose_descriptor(const SkeletonFrame& f) {
  PoseDescriptor d;
  const Vec3& pelvis = f[kPelvis];
  const Vec3& neck = f[kShoulderCenter];
  const Vec3 ankle_mid = 0.5 * (f[kAnkleLeft] + f[kAnkleRight]);
  int i = 0;
  for (Joint j : {kWristLeft, kWristRight, kElbowLeft, kElbowRight, kAnkleLeft, kAnkleRight,
                  kKneeLeft, kKneeRight}) {
    d[i++] = point_line_distance(f[j], neck, pelvis);
  }
  d[i++] = point_line_distance(f[kWristLeft], f[kHipLeft], f[kHipRight]);
  d[i++] = point_line_distance(f[kWristRight], f[kHipLeft], f[kHipRight]);
  d[i++] = point_line_distance(f[kAnkleLeft], f[kShoulderLeft], f[kShoulderRight]);
  d[i++] = point_line_distance(f[kAnkleRight], f[kShoulderLeft], f[kShoulderRight]);
  d[i++] = point_line_distance(f[kHead], pelvis, ankle_mid);
  d[i++] = point_line_distance(pelvis, f[kAnkleLeft], f[kAnkleRight]);
  return d;
}

SkeletonFrame transform_frame(const SkeletonFrame& frame, const Placement& p) {
  SkeletonFrame out = frame;
  for (Vec3& j : out.joints) j = p.apply(j);
  return out;
}

}  // namespace scenefit
