#include "scenefit/database.hpp"

#include <cmath>

namespace scenefit {

double scenelet_charness(const CharnessRecord& record) {
  double m = 0.0;
  for (const auto& [cat, bins] : record.bins) {
    for (double v : bins) m = std::max(m, v);
  }
  return m;
}

void SceneletDatabase::add(Scenelet scenelet) {
  SceneletRecord rec;
  rec.motion = motion_descriptor(scenelet);
  rec.objects = object_descriptor(scenelet, params_.descriptor);
  rec.scenelet = std::move(scenelet);
  records_.push_back(std::move(rec));
}

double scenelet_density(const SceneletDatabase& db, size_t index) {
  const double h = db.params().density_bandwidth;
  const double norm = 1.0 / (2.0 * kPi * h * h);
  const Vec2 origin = db[index].scenelet.source_origin();
  const std::string& scene = db[index].scenelet.source_scene;
  double density = 0.0;
  for (const SceneletRecord& rec : db.records()) {
    if (rec.scenelet.source_scene != scene) continue;
    const double d2 = (rec.scenelet.source_origin() - origin).squaredNorm();
    density += norm * std::exp(-d2 / (2.0 * h * h));
  }
  return density;
}

CharnessRecord charness_bins(const SceneletDatabase& db, size_t index) {
  CharnessRecord out;
  out.density = db[index].charness.density;
  const double sigma = db.params().charness_sigma;
  const MotionDescriptor& psi_l = db[index].motion;

  // One weight per record; the Gaussian normalization constant cancels.
  std::vector<double> weight(db.size());
  double denom = 0.0;
  for (size_t k = 0; k < db.size(); ++k) {
    const double d = descriptor_distance(db[k].motion, psi_l);
    const double g = std::exp(-d * d / (2.0 * sigma * sigma));
    weight[k] = g / db[k].charness.density;
    denom += weight[k];
  }

  for (const std::string& cat : db.params().categories) {
    std::array<double, kObjectGrid * kObjectGrid> bins{};
    bool any = false;
    for (size_t k = 0; k < db.size(); ++k) {
      const auto it = db[k].objects.histograms.find(cat);
      if (it == db[k].objects.histograms.end()) continue;
      any = true;
      for (int j = 0; j < kObjectGrid * kObjectGrid; ++j) {
        bins[j] += weight[k] * it->second[j];
      }
    }
    if (!any) continue;
    for (double& v : bins) v /= denom;
    out.bins[cat] = bins;
  }
  out.scenelet_charness = scenelet_charness(out);
  return out;
}

void SceneletDatabase::finalize() {
  for (size_t i = 0; i < records_.size(); ++i) {
    records_[i].charness.density = scenelet_density(*this, i);
  }
  for (size_t i = 0; i < records_.size(); ++i) {
    records_[i].charness = charness_bins(*this, i);
  }
}

SceneletDatabase build_database(const std::vector<Recording>& recordings,
                                const DatabaseParams& params) {
  SceneletDatabase db(params);
  for (const Recording& rec : recordings) {
    for (Scenelet& s : extract_scenelets(rec, params.extraction)) {
      db.add(std::move(s));
    }
  }
  db.finalize();
  return db;
}

}  // namespace scenefit
