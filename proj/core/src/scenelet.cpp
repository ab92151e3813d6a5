#include "scenefit/scenelet.hpp"

#include <algorithm>
#include <cmath>

namespace scenefit {

const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> cats = {"chair", "couch",   "table",      "bed",
                                                "shelf", "desk",    "monitor",    "whiteboard",
                                                "other"};
  return cats;
}

std::vector<PlacedCuboid> SceneObject::placed() const {
  std::vector<PlacedCuboid> out;
  out.reserve(cuboids.size());
  for (const Cuboid& c : cuboids) out.push_back(place_cuboid(c, placement));
  return out;
}

std::vector<GroundPolygon> SceneObject::footprint() const {
  return ground_projection(cuboids, placement);
}

Vec2 SceneObject::ground_centroid() const {
  Vec2 acc = Vec2::Zero();
  double total = 0.0;
  for (const GroundPolygon& poly : footprint()) {
    const double a = poly.area();
    acc += a * poly.centroid();
    total += a;
  }
  return total > 0.0 ? Vec2(acc / total) : Vec2::Zero();
}

double SceneObject::ground_signed_distance(const Vec2& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const GroundPolygon& poly : footprint()) d = std::min(d, poly.signed_distance(p));
  return d;
}

SceneObject transform_object(const SceneObject& obj, const Placement& p) {
  SceneObject out = obj;
  out.placement = p.compose(obj.placement);
  return out;
}

std::vector<double> cumulative_arc_length(const std::vector<Vec3>& points) {
  std::vector<double> s(points.size(), 0.0);
  for (size_t i = 1; i < points.size(); ++i) {
    s[i] = s[i - 1] + (points[i] - points[i - 1]).norm();
  }
  return s;
}

namespace {

// Point on the polyline at arc position t (clamped).
Vec3 point_at_arc(const std::vector<Vec3>& pts, const std::vector<double>& s, double t) {
  if (t <= s.front()) return pts.front();
  if (t >= s.back()) return pts.back();
  const auto it = std::upper_bound(s.begin(), s.end(), t);
  const size_t i = static_cast<size_t>(it - s.begin());
  const double seg = s[i] - s[i - 1];
  const double u = seg > 0.0 ? (t - s[i - 1]) / seg : 0.0;
  return pts[i - 1] + u * (pts[i] - pts[i - 1]);
}

// Mean of the polyline restricted to arc interval [ta, tb] (line integral
// divided by length). Exact for piecewise-linear curves.
Vec3 polyline_mean(const std::vector<Vec3>& pts, const std::vector<double>& s, double ta,
                   double tb) {
  Vec3 acc = Vec3::Zero();
  double len = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    const double a = std::max(ta, s[i - 1]);
    const double b = std::min(tb, s[i]);
    if (b <= a) continue;
    const double seg = s[i] - s[i - 1];
    if (seg <= 0.0) continue;
    const double ua = (a - s[i - 1]) / seg;
    const double ub = (b - s[i - 1]) / seg;
    const Vec3 pa = pts[i - 1] + ua * (pts[i] - pts[i - 1]);
    const Vec3 pb = pts[i - 1] + ub * (pts[i] - pts[i - 1]);
    acc += 0.5 * (pa + pb) * (b - a);
    len += b - a;
  }
  return len > 0.0 ? Vec3(acc / len) : point_at_arc(pts, s, ta);
}

}  // namespace

std::vector<Vec3> smooth_trajectory(const std::vector<Vec3>& points, double radius,
                                    int iterations) {
  if (points.size() < 2) return points;
  std::vector<Vec3> cur = points;
  for (int it = 0; it < iterations; ++it) {
    const std::vector<double> s = cumulative_arc_length(cur);
    if (s.back() <= 0.0) break;
    std::vector<Vec3> next(cur.size());
    for (size_t i = 0; i < cur.size(); ++i) {
      const double r = std::min({radius, s[i] - s.front(), s.back() - s[i]});
      next[i] = r > 0.0 ? polyline_mean(cur, s, s[i] - r, s[i] + r) : cur[i];
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<SceneObject> select_objects(const std::vector<SkeletonFrame>& clip,
                                        const std::vector<SceneObject>& scene_objects,
                                        double radius) {
  std::vector<SceneObject> out;
  for (const SceneObject& obj : scene_objects) {
    bool within = false;
    for (const SkeletonFrame& f : clip) {
      const Vec2 pelvis = f[kPelvis].head<2>();
      if (obj.ground_signed_distance(pelvis) <= radius) {
        within = true;
        break;
      }
    }
    if (within) out.push_back(obj);
  }
  return out;
}

Placement canonical_transform(const SkeletonFrame& center) {
  const Vec2 pelvis = center[kPelvis].head<2>();
  const double phi = forward_angle(center);
  // Rotate by -phi about the pelvis, then move the pelvis to the origin.
  Placement rot{0.0, 0.0, 0.0, -phi};
  const Vec2 rotated = rot.apply_ground(pelvis);
  return Placement{-rotated.x(), -rotated.y(), 0.0, -phi};
}

Scenelet canonicalize(const Scenelet& s) {
  Scenelet out = s;
  if (s.frames.empty()) return out;
  const Placement to_local = canonical_transform(s.frames[s.center]);
  for (SkeletonFrame& f : out.frames) f = transform_frame(f, to_local);
  for (SceneObject& obj : out.objects) obj = transform_object(obj, to_local);
  out.local_frame.world_from_local = s.local_frame.world_from_local.compose(to_local.inverse());
  return out;
}

std::vector<Scenelet> extract_scenelets(const Recording& recording,
                                        const ExtractionParams& params) {
  std::vector<Scenelet> out;
  if (recording.frames.empty() || params.arc_length <= 0.0 || params.spacing <= 0.0) return out;

  std::vector<Vec3> pelvis;
  pelvis.reserve(recording.frames.size());
  for (const SkeletonFrame& f : recording.frames) pelvis.push_back(f[kPelvis]);
  const std::vector<Vec3> smooth = smooth_trajectory(pelvis);
  const std::vector<double> s = cumulative_arc_length(smooth);
  const double total = s.back();
  if (total < params.arc_length) return out;

  const double half = 0.5 * params.arc_length;
  int index = 0;
  for (double c = half; c <= total - half + 1e-12; c += params.spacing) {
    const double lo = c - half;
    const double hi = c + half;
    size_t first = 0, last = 0;
    bool any = false;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= lo - 1e-12 && s[i] <= hi + 1e-12) {
        if (!any) first = i;
        last = i;
        any = true;
      }
    }
    if (!any) continue;
    if (last == first) {
      if (first > 0) --first;
      else if (last + 1 < s.size()) ++last;
    }
    Scenelet sl;
    sl.id = recording.name + "/" + std::to_string(index++);
    sl.source_scene = recording.name;
    sl.frames.assign(recording.frames.begin() + first, recording.frames.begin() + last + 1);

    // Center frame: the one nearest the center arc position.
    size_t center = first;
    for (size_t i = first; i <= last; ++i) {
      if (std::abs(s[i] - c) < std::abs(s[center] - c)) center = i;
    }
    sl.center = static_cast<int>(center - first);
    sl.local_frame.source_center_frame = static_cast<int>(center);
    sl.objects = select_objects(sl.frames, recording.objects);
    out.push_back(canonicalize(sl));
  }
  return out;
}

}  // namespace scenefit
