#pragma once

// 16-joint skeleton frames and the pose descriptor built from 14 joint-line
// distances. The descriptor is invariant to translation and to rotation
// about the up axis.

#include <array>
#include <string_view>
#include <vector>

#include "scenefit/geometry.hpp"

namespace scenefit {

enum Joint : int {
  kPelvis = 0,
  kHipLeft,
  kKneeLeft,
  kAnkleLeft,
  kHipRight,
  kKneeRight,
  kAnkleRight,
  kShoulderCenter,
  kShoulderLeft,
  kElbowLeft,
  kWristLeft,
  kShoulderRight,
  kElbowRight,
  kWristRight,
  kHead,
  kHeadTop,
  kJointCount  // 16
};

std::string_view joint_name(Joint j);
Joint joint_from_name(std::string_view name);

/// The 14-joint subset used by the pose metrics: every joint except the
/// pelvis and the head top.
const std::array<Joint, 14>& metric_joints();

using JointPositions = std::array<Vec3, kJointCount>;

struct SkeletonFrame {
  JointPositions joints{};
  double time = 0.0;  // seconds

  const Vec3& operator[](Joint j) const { return joints[j]; }
  Vec3& operator[](Joint j) { return joints[j]; }
};

/// Horizontal facing direction of a frame: the up axis crossed with the
/// hip-left-to-hip-right axis, projected to the ground plane and
/// normalized. Falls back to the shoulder axis when the hips are
/// degenerate, and to +X when both are.
Vec2 forward_direction(const SkeletonFrame& frame);

/// Angle of forward_direction, in radians.
double forward_angle(const SkeletonFrame& frame);

inline constexpr int kPoseDescriptorSize = 14;
using PoseDescriptor = Eigen::Matrix<double, kPoseDescriptorSize, 1>;

/// 14 point-to-line distances between designated joints and joint-pair
/// lines: wrists/elbows/ankles/knees to the shoulder-center-pelvis line (8),
/// wrists to the hip line (2), ankles to the shoulder line (2), head to the
/// pelvis-ankle-midpoint line (1), pelvis to the ankle line (1).
/// A degenerate line (coincident endpoints) degrades to point distance.
PoseDescriptor pose_descriptor(const SkeletonFrame& frame);

/// Distance from point p to the infinite line through a and b; |p - a| when
/// the line is degenerate.
double point_line_distance(const Vec3& p, const Vec3& a, const Vec3& b);

SkeletonFrame transform_frame(const SkeletonFrame& frame, const Placement& p);

}  // namespace scenefit
