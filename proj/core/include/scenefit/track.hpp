#pragma once

// Per-frame 2D joint observations with confidences, plus optional local 3D
// pose guesses (pelvis-centered) from an upstream estimator.

#include <optional>
#include <vector>

#include "scenefit/skeleton.hpp"

namespace scenefit {

struct Observation {
  Vec2 pixel = Vec2::Zero();
  double confidence = 0.0;  // in [0, 1]
};

struct TrackFrame {
  std::array<Observation, kJointCount> joints{};
  std::optional<JointPositions> local_pose;  // pelvis-centered, meters
  bool valid = true;

  double mean_confidence() const {
    double acc = 0.0;
    for (const Observation& o : joints) acc += o.confidence;
    return acc / static_cast<double>(kJointCount);
  }
};

struct ObservationTrack {
  std::vector<TrackFrame> frames;
  double fps = 10.0;

  int size() const { return static_cast<int>(frames.size()); }
  bool empty() const { return frames.empty(); }
};

}  // namespace scenefit
