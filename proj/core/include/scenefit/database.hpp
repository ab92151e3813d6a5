#pragma once

// The scenelet database: extracted scenelets with their descriptors,
// per-scene spatial densities, and charness scores.

#include <map>
#include <string>
#include <vector>

#include "scenefit/descriptor.hpp"
#include "scenefit/scenelet.hpp"

namespace scenefit {

struct CharnessRecord {
  /// Per category: per-bin charness h_j in [0, 1].
  std::map<std::string, std::array<double, kObjectGrid * kObjectGrid>> bins;
  /// Max over all categories and bins.
  double scenelet_charness = 0.0;
  /// Spatial density of same-scene scenelet origins at this origin (1/m^2).
  double density = 0.0;
};

/// Max over all categories and bins of a charness record.
double scenelet_charness(const CharnessRecord& record);

struct SceneletRecord {
  Scenelet scenelet;
  MotionDescriptor motion;
  ObjectDescriptor objects;
  CharnessRecord charness;
};

struct DatabaseParams {
  ExtractionParams extraction;
  ObjectDescriptorParams descriptor;
  double charness_sigma = 13.0;
  double density_bandwidth = 0.5;  // meters
  std::vector<std::string> categories = default_categories();
};

class SceneletDatabase {
 public:
  SceneletDatabase() = default;
  explicit SceneletDatabase(DatabaseParams params) : params_(std::move(params)) {}

  const DatabaseParams& params() const { return params_; }
  DatabaseParams& params() { return params_; }

  const std::vector<SceneletRecord>& records() const { return records_; }
  std::vector<SceneletRecord>& records() { return records_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const SceneletRecord& operator[](size_t i) const { return records_[i]; }

  /// Appends a scenelet, computing its descriptors. Charness and densities
  /// are stale until finalize() runs.
  void add(Scenelet scenelet);

  /// Recomputes densities and charness for every record.
  void finalize();

 private:
  DatabaseParams params_;
  std::vector<SceneletRecord> records_;
};

/// Extracts scenelets from every recording, then finalizes.
SceneletDatabase build_database(const std::vector<Recording>& recordings,
                                const DatabaseParams& params = {});

/// Gaussian kernel density of same-scene scenelet origins at record `index`'s
/// origin. Sum over origins (including self) of
/// exp(-|x - x_k|^2 / (2 h^2)) / (2 pi h^2); strictly positive.
double scenelet_density(const SceneletDatabase& db, size_t index);

/// Charness bins of record `index`: for each category and bin j,
/// h_j = sum_k Phi_j^k G(d(Psi_k, Psi_l) | 0, sigma) / p_k
///     / sum_k G(d(Psi_k, Psi_l) | 0, sigma) / p_k,
/// over all records k (densities must be current).
CharnessRecord charness_bins(const SceneletDatabase& db, size_t index);

}  // namespace scenefit
