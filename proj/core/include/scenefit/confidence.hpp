#pragma once

// Keypoint confidence from grouped 3D pose-proposal variances and a
// per-pose score.

#include <vector>

namespace scenefit {

struct ConfidenceParams {
  /// Variances are clamped to this floor before the log.
  double variance_floor = 1e-12;
};

/// c_k from a per-joint proposal variance (m^2), the per-pose score s', and
/// the 99th percentile of log joint variances over the recording:
///   v_k = var_k / (1 + exp(-0.2 s' + 3.5))
///   c_k = 1 / (1 + exp(-10 exp(log(v_k) / P99) + 24))
/// The inner exp(log(v)/P99) is computed in log space. Result in (0, 1).
double joint_confidence(double variance, double pose_score, double p99_log_variance,
                        const ConfidenceParams& params = {});

/// Linear-interpolation percentile (0..100) of a sample vector.
double percentile(std::vector<double> values, double pct);

/// P99 of log variances over a whole recording (floor applied first).
double p99_log_variance(const std::vector<double>& variances,
                        const ConfidenceParams& params = {});

}  // namespace scenefit
