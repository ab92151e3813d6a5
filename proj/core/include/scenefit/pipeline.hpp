#pragma once

// The staged solver: occluded-frame detection, static-skeleton
// initialization, charness-guided scenelet candidate generation, pruning,
// full-energy refinement over candidate combinations, and object selection.

#include "scenefit/config.hpp"
#include "scenefit/energy.hpp"
#include "scenefit/solver.hpp"

namespace scenefit {

struct OcclusionMask {
  std::vector<bool> occluded;                             // per frame
  std::vector<std::array<bool, kJointCount>> reliable;    // per frame/joint

  int occluded_count() const {
    int n = 0;
    for (bool b : occluded) n += b ? 1 : 0;
    return n;
  }
};

/// Flags frames whose mean joint velocity exceeds the Winsorization bound
/// (95th percentile of per-frame mean velocities), frames with implausible
/// local poses (knees above the head), and frames with low mean confidence.
OcclusionMask detect_occluded_frames(const ObservationTrack& track,
                                     const PipelineConfig& cfg = {});

/// Linearly interpolates 2D joints and local poses of flagged frames from
/// the nearest unflagged neighbors; leading/trailing runs are held constant.
ObservationTrack interpolate_occluded(const ObservationTrack& track, const OcclusionMask& mask);

struct StaticFitResult {
  std::vector<Placement> placements;
  double energy = 0.0;
  bool converged = false;
  bool diverged = false;  // line search stalled; best iterate returned
};

/// Jointly minimizes the reprojection and smoothness terms over all
/// per-frame placements. Every frame needs a local pose (interpolate first).
StaticFitResult fit_static_skeletons(const ObservationTrack& track, const Camera& camera,
                                     const Config& cfg = {});

struct Candidate {
  int scenelet = -1;  // database record index
  int start = 0;      // video frame the clip starts at
  Placement placement;
  double partial_energy = std::numeric_limits<double>::infinity();
  double reprojection_rms = std::numeric_limits<double>::infinity();
  double charness = 0.0;
  double score = 0.0;  // charness weighted by fit quality
};

struct CandidateSet {
  int anchor = 0;  // the charness-maximum frame
  double score = 0.0;
  std::vector<Candidate> candidates;  // sorted by partial energy ascending
};

struct SweepResult {
  std::vector<int> anchors;             // strided frames evaluated
  std::vector<double> scores;           // interaction score per anchor
  std::vector<CandidateSet> per_anchor;
};

/// Fits every database scenelet at every strided anchor frame (reprojection
/// + smoothness only) against the static-skeleton scene and scores each
/// frame by fit-quality-weighted charness.
SweepResult charness_sweep(const ObservationTrack& track, const Camera& camera,
                           const std::shared_ptr<const SceneletDatabase>& db,
                           const std::vector<Placement>& static_placements, const Config& cfg);

/// Local maxima of the sweep scores above the charness threshold, plus one
/// anchor per occluded run; capped at cfg.pipeline.max_maxima sets.
std::vector<CandidateSet> charness_nms(const SweepResult& sweep, const OcclusionMask& mask,
                                       const PipelineConfig& cfg);

/// Sorted truncation to the stage-1 candidate budget.
CandidateSet prune_stage1(CandidateSet set, int keep = 200);

/// Re-optimizes survivors with the motion-intersection term added,
/// evaluates the occlusion term once per candidate, re-ranks by the
/// augmented energy and keeps the stage-2 budget.
CandidateSet prune_stage2(CandidateSet set, const ObservationTrack& track, const Camera& camera,
                          const std::shared_ptr<const SceneletDatabase>& db,
                          const std::vector<Placement>& static_placements, const Config& cfg);

struct RefineResult {
  SceneState state;
  EnergyBreakdown energy;
  int combination = -1;
  int combinations_evaluated = 0;
  int combinations_skipped = 0;  // overlapping spans
  bool beam_fallback = false;
};

/// Evaluates every combination of surviving candidates (one per maximum,
/// overlap-free), jointly optimizing all placements under the full energy;
/// returns the arg-min and optionally the top-k diverse alternatives.
std::vector<RefineResult> refine_combinations(
    const std::vector<CandidateSet>& sets, const ObservationTrack& track, const Camera& camera,
    const std::shared_ptr<const SceneletDatabase>& db,
    const std::vector<Placement>& static_placements, const Config& cfg, int top_diverse = 1);

/// Removes, for every intersecting compatible pair, the object whose removal
/// lowers the total energy; repeats until no compatible intersections are
/// left. The surviving subset is installed as the state's object filter.
void object_selection(SceneState& state, const ObservationTrack& track, const Camera& camera,
                      const Config& cfg);

struct PipelineResult {
  SceneState state;
  ObservationTrack processed_track;
  OcclusionMask mask;
  StaticFitResult static_fit;
  std::vector<CandidateSet> maxima;  // after stage 2
  EnergyBreakdown final_energy;
  std::vector<RefineResult> alternatives;  // diverse runner-ups when requested
  int combinations_evaluated = 0;
  bool beam_fallback = false;
};

struct FitOptions {
  bool enable_scenelets = true;  // false: static-skeleton-only baseline
  int top_diverse = 1;
};

/// The full single-actor pipeline.
PipelineResult fit_track(const ObservationTrack& track, const Camera& camera,
                         const std::shared_ptr<const SceneletDatabase>& db, const Config& cfg,
                         const FitOptions& opts = {});

/// Multi-actor: actors are fitted in order; earlier actors' objects act as
/// static occluders and intersection targets for later ones. Smoothness
/// never couples across actors and no scenelet spans two actors.
std::vector<PipelineResult> fit_actors(const std::vector<ObservationTrack>& tracks,
                                       const Camera& camera,
                                       const std::shared_ptr<const SceneletDatabase>& db,
                                       const Config& cfg, const FitOptions& opts = {});

/// Runs fn(i) for i in [0, n) across the requested worker count. Results
/// must be written to preallocated slots so the run stays deterministic.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace scenefit
