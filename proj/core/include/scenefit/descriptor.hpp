#pragma once

// Fixed-length scenelet descriptors: the motion descriptor (pose descriptors
// resampled at even arc length in the combined descriptor-location space)
// and the per-category object layout histograms.

#include <map>
#include <string>

#include "scenefit/scenelet.hpp"

namespace scenefit {

inline constexpr int kMotionSamples = 15;

struct MotionDescriptor {
  /// kMotionSamples x 14 matrix of joint-line distances.
  Eigen::Matrix<double, kMotionSamples, kPoseDescriptorSize> samples =
      Eigen::Matrix<double, kMotionSamples, kPoseDescriptorSize>::Zero();
  /// The 3D pelvis location at each sample.
  std::array<Vec3, kMotionSamples> pelvis{};
};

/// Samples the clip's pose descriptors at even arc-length intervals of the
/// 17-D trajectory (14 descriptor dims + 3D pelvis location), interpolating
/// linearly between bracketing frames. A frozen clip (zero 17-D arc length)
/// yields k copies of the single descriptor.
MotionDescriptor motion_descriptor(const Scenelet& s);
MotionDescriptor motion_descriptor(const std::vector<SkeletonFrame>& frames);

/// Weighted L2 distance with normalized triangular weights peaking at the
/// center sample.
double descriptor_distance(const MotionDescriptor& a, const MotionDescriptor& b);

/// The per-sample weights used by descriptor_distance; they sum to 1.
const std::array<double, kMotionSamples>& descriptor_weights();

inline constexpr int kObjectGrid = 5;

struct ObjectDescriptor {
  /// Per category: 5x5 row-major grid of coverage values in [0, 1]. The grid
  /// is centered at the scenelet origin with +X as the forward direction;
  /// rows run along +Y (lateral), columns along +X (forward).
  std::map<std::string, std::array<double, kObjectGrid * kObjectGrid>> histograms;

  double max_bin() const;
};

struct ObjectDescriptorParams {
  double bin_size = 0.4;  // meters; the grid spans 5 bins = 2 m per side
};

/// Phi_j = max over same-category objects of
/// area(footprint ^ bin) / min(area(footprint), area(bin)).
/// Footprint areas of multi-cuboid objects use inclusion-exclusion, so
/// overlapping cuboids are not double counted.
ObjectDescriptor object_descriptor(const Scenelet& s, const ObjectDescriptorParams& params = {});

}  // namespace scenefit
