#include "scenefit/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scenefit {

double joint_confidence(double variance, double pose_score, double p99_log_variance,
                        const ConfidenceParams& params) {
  if (!(p99_log_variance != 0.0)) {
    throw std::invalid_argument("P99 of log variances must be nonzero");
  }
  const double var = std::max(variance, params.variance_floor);
  const double v = var / (1.0 + std::exp(-0.2 * pose_score + 3.5));
  // exp(log(v) / P99) kept in log space until the final exp.
  const double scaled = std::log(v) / p99_log_variance;
  const double inner = std::exp(scaled);
  const double c = 1.0 / (1.0 + std::exp(-10.0 * inner + 24.0));
  // The logistic saturates in double precision for extreme arguments; keep
  // the result strictly inside (0, 1).
  if (c >= 1.0) return std::nextafter(1.0, 0.0);
  if (c <= 0.0) return std::numeric_limits<double>::min();
  return c;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double rank = pct / 100.0 * (static_cast<double>(values.size()) - 1.0);
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double u = rank - static_cast<double>(lo);
  return (1.0 - u) * values[lo] + u * values[hi];
}

double p99_log_variance(const std::vector<double>& variances, const ConfidenceParams& params) {
  std::vector<double> logs;
  logs.reserve(variances.size());
  for (double v : variances) logs.push_back(std::log(std::max(v, params.variance_floor)));
  return percentile(std::move(logs), 99.0);
}

}  // namespace scenefit
