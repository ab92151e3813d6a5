#pragma once

// Every tunable parameter of the system with its default, overridable from
// a config file. Field names carry units.

#include "scenefit/database.hpp"
#include "scenefit/energy.hpp"
#include "scenefit/solver.hpp"

namespace scenefit {

struct PipelineConfig {
  // Occluded-frame detection.
  double winsor_percentile = 95.0;        // velocity outlier bound
  double min_mean_confidence = 0.5;       // frames below are occluded
  bool discard_implausible_poses = true;  // knees-above-head rule

  // Charness sweep.
  int frame_stride = 5;                 // T'
  double fit_quality_scale_px = 10.0;   // RMS residual scale for fit weight
  int sweep_max_iterations = 60;

  // Candidate selection.
  double min_charness = 0.3;
  int nms_window_frames = 20;
  /// Occluded runs shorter than this (a second at 10 fps) do not anchor
  /// scenelet candidates on their own.
  int min_occluded_run_frames = 10;
  int max_maxima = 5;
  int stage1_keep = 200;
  int stage2_keep = 3;
  /// Discrete start-frame search radius in the stage-2 re-optimization,
  /// countering the anchor stride's alignment error.
  int stage2_start_search = 2;

  // Refinement.
  int refine_max_iterations = 200;
  /// Every maximum also offers a "no scenelet" choice, so ill-fitted or
  /// time-overlapping candidates are never forced into the scene.
  bool allow_no_candidate = true;
  int max_combinations = 1300;  // beam fallback beyond this; 4^5 fits
  int beam_width = 64;
  int diversity_window_frames = 10;
};

struct SynthConfig {
  double pixel_noise_sigma = 2.0;
  double visible_confidence_min = 0.7;
  double visible_confidence_max = 1.0;
  double occluded_confidence_min = 0.0;
  double occluded_confidence_max = 0.3;
};

struct Config {
  Weights weights;
  EnergyOptions energy;
  DatabaseParams database;
  PipelineConfig pipeline;
  SynthConfig synth;
  SolverOptions solver;
  int threads = 1;
};

}  // namespace scenefit
