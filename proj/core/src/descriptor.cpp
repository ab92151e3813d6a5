#include "scenefit/descriptor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace scenefit {

namespace {

using Vec17 = Eigen::Matrix<double, 17, 1>;

Vec17 combined_point(const PoseDescriptor& psi, const Vec3& pelvis) {
  Vec17 v;
  v.head<14>() = psi;
  v.tail<3>() = pelvis;
  return v;
}

}  // namespace

MotionDescriptor motion_descriptor(const Scenelet& s) { return motion_descriptor(s.frames); }

MotionDescriptor motion_descriptor(const std::vector<SkeletonFrame>& frames) {
  MotionDescriptor out;
  if (frames.empty()) return out;

  const size_t n = frames.size();
  std::vector<PoseDescriptor> psi(n);
  std::vector<Vec17> pts(n);
  for (size_t i = 0; i < n; ++i) {
    psi[i] = pose_descriptor(frames[i]);
    pts[i] = combined_point(psi[i], frames[i][kPelvis]);
  }

  std::vector<double> s(n, 0.0);
  for (size_t i = 1; i < n; ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = s.back();

  for (int k = 0; k < kMotionSamples; ++k) {
    if (total <= 0.0 || n == 1) {
      out.samples.row(k) = psi[0].transpose();
      out.pelvis[k] = frames[0][kPelvis];
      continue;
    }
    const double target = total * k / (kMotionSamples - 1);
    const auto it = std::upper_bound(s.begin(), s.end(), target);
    size_t hi = std::min<size_t>(static_cast<size_t>(it - s.begin()), n - 1);
    if (hi == 0) hi = 1;
    const size_t lo = hi - 1;
    const double seg = s[hi] - s[lo];
    const double u = seg > 0.0 ? std::clamp((target - s[lo]) / seg, 0.0, 1.0) : 0.0;
    out.samples.row(k) = ((1.0 - u) * psi[lo] + u * psi[hi]).transpose();
    out.pelvis[k] = (1.0 - u) * frames[lo][kPelvis] + u * frames[hi][kPelvis];
  }
  return out;
}

const std::array<double, kMotionSamples>& descriptor_weights() {
  static const std::array<double, kMotionSamples> weights = [] {
    std::array<double, kMotionSamples> w{};
    const double mid = 0.5 * (kMotionSamples + 1);
    double sum = 0.0;
    for (int i = 1; i <= kMotionSamples; ++i) {
      w[i - 1] = 1.0 - std::abs(i - mid) / mid;
      sum += w[i - 1];
    }
    for (double& v : w) v /= sum;
    return w;
  }();
  return weights;
}

double descriptor_distance(const MotionDescriptor& a, const MotionDescriptor& b) {
  const auto& w = descriptor_weights();
  double acc = 0.0;
  for (int i = 0; i < kMotionSamples; ++i) {
    acc += w[i] * (a.samples.row(i) - b.samples.row(i)).squaredNorm();
  }
  return std::sqrt(acc);
}

double ObjectDescriptor::max_bin() const {
  double m = 0.0;
  for (const auto& [cat, bins] : histograms) {
    for (double v : bins) m = std::max(m, v);
  }
  return m;
}

namespace {

// Area of the union of convex polygons intersected with `clip`, by
// inclusion-exclusion over subsets. Object geometries have few cuboids, so
// the 2^n expansion stays tiny.
double union_intersection_area(const std::vector<GroundPolygon>& polys,
                               const std::vector<Vec2>& clip) {
  const size_t n = polys.size();
  if (n == 0) return 0.0;
  double area = 0.0;
  const size_t subsets = size_t{1} << n;
  for (size_t mask = 1; mask < subsets; ++mask) {
    std::vector<Vec2> region = clip;
    for (size_t i = 0; i < n && region.size() >= 3; ++i) {
      if (mask & (size_t{1} << i)) region = clip_convex(region, polys[i].vertices());
    }
    if (region.size() < 3) continue;
    const int bits = std::popcount(mask);
    const double a = std::abs(polygon_area(region));
    area += (bits % 2 == 1) ? a : -a;
  }
  return std::max(area, 0.0);
}

std::vector<Vec2> big_square(double half) {
  return {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
}

}  // namespace

ObjectDescriptor object_descriptor(const Scenelet& s, const ObjectDescriptorParams& params) {
  ObjectDescriptor out;
  const double bin = params.bin_size;
  const double bin_area = bin * bin;
  const double half_span = 0.5 * kObjectGrid * bin;

  for (const SceneObject& obj : s.objects) {
    auto& hist = out.histograms[obj.label];
    const std::vector<GroundPolygon> foot = obj.footprint();
    const double obj_area = union_intersection_area(foot, big_square(1e3));
    if (obj_area <= 0.0) continue;
    for (int row = 0; row < kObjectGrid; ++row) {
      for (int col = 0; col < kObjectGrid; ++col) {
        const double x0 = -half_span + col * bin;
        const double y0 = -half_span + row * bin;
        const std::vector<Vec2> cell = {{x0, y0}, {x0 + bin, y0}, {x0 + bin, y0 + bin},
                                        {x0, y0 + bin}};
        const double inter = union_intersection_area(foot, cell);
        const double value = inter / std::min(obj_area, bin_area);
        double& slot = hist[row * kObjectGrid + col];
        slot = std::min(1.0, std::max(slot, value));
      }
    }
  }
  // Categories with no objects keep no entry; readers treat that as all-zero.
  return out;
}

}  // namespace scenefit
