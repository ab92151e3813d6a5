#pragma once

// Multi-actor re-identification: assign per-frame skeleton detections to
// actors by exact dynamic programming over a chain of per-frame assignment
// states, with a dummy "invisible" skeleton.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scenefit/track.hpp"

namespace scenefit {

struct DetectedSkeleton {
  std::array<Observation, kJointCount> joints{};

  double mean_confidence() const {
    double acc = 0.0;
    for (const Observation& o : joints) acc += o.confidence;
    return acc / kJointCount;
  }
};

struct DetectionFrame {
  std::vector<DetectedSkeleton> skeletons;
};

struct DetectionSequence {
  std::vector<DetectionFrame> frames;
  double image_half_diagonal = 1.0;  // pixels
  double fps = 10.0;
};

/// Sentinel for "actor invisible this frame".
inline constexpr int kDummySkeleton = -1;

struct TrackingConstraint {
  int actor = 0;
  int frame = 0;
  int skeleton = 0;  // index into that frame's detections
};

struct TrackingParams {
  double pairwise_weight = 1e3;  // w_pw
};

struct ActorAssignment {
  /// assignment[t][a] = skeleton index in frame t for actor a, or
  /// kDummySkeleton.
  std::vector<std::vector<int>> assignment;
  double objective = 0.0;
};

/// Unary cost of assigning actor a to skeleton s at frame t: minus the mean
/// joint confidence for a real skeleton, -1 for the dummy (the printed fixed
/// cost of 1, negated like the real case).
double unary_cost(const DetectionSequence& seq, int t, int skeleton);

/// Pairwise cost between consecutive assignments of one actor:
/// 1 when either side is the dummy, otherwise the confidence-weighted mean
/// of squared joint displacements normalized by the image half-diagonal.
double binary_cost(const DetectionSequence& seq, int t, int skeleton0, int skeleton1);

struct TrackingError {
  std::string message;
  int frame = -1;
};

/// Exact minimizer of sum(unary) + w_pw * sum(binary) subject to: every real
/// skeleton claimed by exactly one actor, every actor claiming at most one
/// real skeleton, plus the hard constraints. Ties break by lexicographic
/// state order. Returns the error when some frame has more skeletons than
/// actors or a constraint is inconsistent.
std::variant<ActorAssignment, TrackingError> solve_tracking(
    const DetectionSequence& seq, int n_actors,
    const std::vector<TrackingConstraint>& constraints = {}, const TrackingParams& params = {});

/// Recomputes the objective of a given labeling from scratch.
double tracking_objective(const DetectionSequence& seq, const ActorAssignment& labeling,
                          const TrackingParams& params = {});

/// Splits an assignment into per-actor observation tracks; invisible frames
/// get zero-confidence joints.
std::vector<ObservationTrack> tracks_from_assignment(const DetectionSequence& seq,
                                                     const ActorAssignment& assignment);

}  // namespace scenefit
