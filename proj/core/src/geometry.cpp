#include "scenefit/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace scenefit {

double wrap_angle(double theta) {
  double t = std::fmod(theta + kPi, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t - kPi;
}

double angle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

// ---------------------------------------------------------------- placement

namespace {

inline Mat3 rot_z(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

}  // namespace

Vec3 Placement::apply(const Vec3& p) const {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * p.x() - s * p.y() + x, s * p.x() + c * p.y() + y, p.z() + z};
}

Vec2 Placement::apply_ground(const Vec2& p) const {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * p.x() - s * p.y() + x, s * p.x() + c * p.y() + y};
}

Placement Placement::compose(const Placement& inner) const {
  const Vec3 t = apply(inner.translation());
  return Placement{t.x(), t.y(), t.z(), wrap_angle(theta + inner.theta)};
}

Placement Placement::inverse() const {
  const double c = std::cos(theta), s = std::sin(theta);
  // R(-theta) * (-t)
  return Placement{-(c * x + s * y), -(-s * x + c * y), -z, wrap_angle(-theta)};
}

Vec3 placement_point_derivative(const Placement& p, const Vec3& placed_point, int param) {
  switch (param) {
    case 0: return {1.0, 0.0, 0.0};
    case 1: return {0.0, 1.0, 0.0};
    case 2: return {0.0, 0.0, 1.0};
    case 3: return {-(placed_point.y() - p.y), placed_point.x() - p.x, 0.0};
    default: return Vec3::Zero();
  }
}

// ------------------------------------------------------------------- camera

std::optional<Vec2> Camera::project(const Vec3& p_world) const {
  const Vec3 pc = world_to_camera * p_world;
  if (!(pc.z() > 0.0)) return std::nullopt;
  return Vec2{fx * pc.x() / pc.z() + cx, fy * pc.y() / pc.z() + cy};
}

Eigen::Matrix<double, 2, 3> Camera::projection_jacobian(const Vec3& p_world) const {
  const Vec3 pc = world_to_camera * p_world;
  const double iz = 1.0 / pc.z();
  Eigen::Matrix<double, 2, 3> d_pix_d_pc;
  d_pix_d_pc << fx * iz, 0.0, -fx * pc.x() * iz * iz,
                0.0, fy * iz, -fy * pc.y() * iz * iz;
  return d_pix_d_pc * world_to_camera.linear();
}

// ------------------------------------------------------------------ cuboids

std::array<Vec3, 8> PlacedCuboid::corners() const {
  const Mat3 r = rot_z(yaw);
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 local{(i & 1) ? half_extents.x() : -half_extents.x(),
                     (i & 2) ? half_extents.y() : -half_extents.y(),
                     (i & 4) ? half_extents.z() : -half_extents.z()};
    out[i] = center + r * local;
  }
  return out;
}

PlacedCuboid place_cuboid(const Cuboid& c, const Placement& p) {
  PlacedCuboid out;
  out.center = p.apply(c.center);
  out.half_extents = c.half_extents;
  out.yaw = wrap_angle(c.yaw + p.theta);
  return out;
}

// ----------------------------------------------------------- ground polygon

GroundPolygon GroundPolygon::rectangle(const Vec2& center, const Vec2& half_extents,
                                       double angle) {
  GroundPolygon poly;
  poly.is_rect_ = true;
  poly.rect_center_ = center;
  poly.rect_half_ = half_extents;
  poly.rect_angle_ = angle;
  const double c = std::cos(angle), s = std::sin(angle);
  const auto corner = [&](double sx, double sy) {
    const double lx = sx * half_extents.x(), ly = sy * half_extents.y();
    return Vec2{center.x() + c * lx - s * ly, center.y() + s * lx + c * ly};
  };
  poly.vertices_ = {corner(-1, -1), corner(1, -1), corner(1, 1), corner(-1, 1)};
  return poly;
}

GroundPolygon GroundPolygon::from_vertices(std::vector<Vec2> ccw_vertices) {
  const size_t n = ccw_vertices.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = ccw_vertices[i];
    const Vec2& b = ccw_vertices[(i + 1) % n];
    const Vec2& c = ccw_vertices[(i + 2) % n];
    const double cross = (b.x() - a.x()) * (c.y() - b.y()) - (b.y() - a.y()) * (c.x() - b.x());
    if (!(cross > 1e-12)) {
      throw std::invalid_argument("polygon must be strictly convex and CCW");
    }
  }
  if (polygon_area(ccw_vertices) <= 0.0) throw std::invalid_argument("polygon has no area");
  GroundPolygon poly;
  poly.vertices_ = std::move(ccw_vertices);
  return poly;
}

double polygon_area(const std::vector<Vec2>& v) {
  double acc = 0.0;
  const size_t n = v.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    acc += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * acc;
}

double GroundPolygon::area() const { return polygon_area(vertices_); }

Vec2 GroundPolygon::centroid() const {
  double a6 = 0.0;
  Vec2 acc = Vec2::Zero();
  const size_t n = vertices_.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = vertices_[i];
    const Vec2& q = vertices_[(i + 1) % n];
    const double w = p.x() * q.y() - q.x() * p.y();
    acc += w * (p + q);
    a6 += w;
  }
  return acc / (3.0 * a6);
}

namespace {

// Analytic box signed distance in the rectangle's local frame.
double rect_signed_distance(const Vec2& q_local, const Vec2& h, Vec2* grad_local) {
  const Vec2 a{std::abs(q_local.x()), std::abs(q_local.y())};
  const Vec2 d = a - h;
  const Vec2 sgn{q_local.x() >= 0.0 ? 1.0 : -1.0, q_local.y() >= 0.0 ? 1.0 : -1.0};
  if (d.x() > 0.0 || d.y() > 0.0) {
    const Vec2 outside{std::max(d.x(), 0.0), std::max(d.y(), 0.0)};
    const double len = outside.norm();
    if (grad_local) {
      *grad_local = len > 0.0 ? Vec2{sgn.x() * outside.x() / len, sgn.y() * outside.y() / len}
                              : Vec2{sgn.x(), 0.0};
    }
    return len;
  }
  // Inside: nearest face along the axis with the larger (less negative) d.
  if (grad_local) {
    *grad_local = d.x() >= d.y() ? Vec2{sgn.x(), 0.0} : Vec2{0.0, sgn.y()};
  }
  return std::max(d.x(), d.y());
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, Vec2* closest) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 c = a + t * ab;
  if (closest) *closest = c;
  return (p - c).norm();
}

}  // namespace

double GroundPolygon::signed_distance(const Vec2& p) const {
  if (is_rect_) {
    const double c = std::cos(rect_angle_), s = std::sin(rect_angle_);
    const Vec2 r = p - rect_center_;
    const Vec2 q{c * r.x() + s * r.y(), -s * r.x() + c * r.y()};
    return rect_signed_distance(q, rect_half_, nullptr);
  }
  const size_t n = vertices_.size();
  double dmin = std::numeric_limits<double>::infinity();
  bool inside = true;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    dmin = std::min(dmin, point_segment_distance(p, a, b, nullptr));
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross < 0.0) inside = false;
  }
  return inside ? -dmin : dmin;
}

Vec2 GroundPolygon::signed_distance_gradient(const Vec2& p) const {
  if (is_rect_) {
    const double c = std::cos(rect_angle_), s = std::sin(rect_angle_);
    const Vec2 r = p - rect_center_;
    const Vec2 q{c * r.x() + s * r.y(), -s * r.x() + c * r.y()};
    Vec2 g_local;
    rect_signed_distance(q, rect_half_, &g_local);
    return {c * g_local.x() - s * g_local.y(), s * g_local.x() + c * g_local.y()};
  }
  const size_t n = vertices_.size();
  double dmin = std::numeric_limits<double>::infinity();
  Vec2 best = p;
  bool inside = true;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    Vec2 c;
    const double d = point_segment_distance(p, a, b, &c);
    if (d < dmin) {
      dmin = d;
      best = c;
    }
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross < 0.0) inside = false;
  }
  Vec2 dir = inside ? (best - p) : (p - best);
  const double len = dir.norm();
  if (len < 1e-15) {
    // On the boundary; fall back to the first edge normal.
    const Vec2 e = vertices_[1] - vertices_[0];
    return Vec2{e.y(), -e.x()}.normalized();
  }
  return dir / len;
}

double GroundPolygon::kink_margin(const Vec2& p) const {
  if (!is_rect_) return std::numeric_limits<double>::infinity();
  const double c = std::cos(rect_angle_), s = std::sin(rect_angle_);
  const Vec2 r = p - rect_center_;
  const Vec2 q{c * r.x() + s * r.y(), -s * r.x() + c * r.y()};
  const Vec2 d{std::abs(q.x()) - rect_half_.x(), std::abs(q.y()) - rect_half_.y()};
  if (d.x() <= 0.0 && d.y() <= 0.0) return std::abs(d.x() - d.y());
  if (d.x() > 0.0 && d.y() > 0.0) return std::min(d.x(), d.y());
  return std::numeric_limits<double>::infinity();
}

std::vector<GroundPolygon> ground_projection(std::span<const Cuboid> cuboids,
                                             const Placement& p) {
  std::vector<GroundPolygon> out;
  out.reserve(cuboids.size());
  for (const Cuboid& c : cuboids) {
    out.push_back(cuboid_footprint(place_cuboid(c, p)));
  }
  return out;
}

GroundPolygon cuboid_footprint(const PlacedCuboid& c) {
  return GroundPolygon::rectangle(c.center.head<2>(), c.half_extents.head<2>(), c.yaw);
}

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip) {
  std::vector<Vec2> poly = subject;
  const size_t nc = clip.size();
  for (size_t i = 0; i < nc && !poly.empty(); ++i) {
    const Vec2& a = clip[i];
    const Vec2& b = clip[(i + 1) % nc];
    const Vec2 edge = b - a;
    const auto inside = [&](const Vec2& p) {
      return edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x()) >= 0.0;
    };
    std::vector<Vec2> next;
    next.reserve(poly.size() + 1);
    const size_t np = poly.size();
    for (size_t j = 0; j < np; ++j) {
      const Vec2& cur = poly[j];
      const Vec2& prv = poly[(j + np - 1) % np];
      const bool cur_in = inside(cur);
      const bool prv_in = inside(prv);
      if (cur_in != prv_in) {
        const Vec2 d = cur - prv;
        const double denom = edge.x() * d.y() - edge.y() * d.x();
        const double t = denom != 0.0
                             ? (edge.x() * (a.y() - prv.y()) - edge.y() * (a.x() - prv.x())) / denom
                             : 0.0;
        next.push_back(prv + t * d);
      }
      if (cur_in) next.push_back(cur);
    }
    poly = std::move(next);
  }
  return poly;
}

double convex_intersection_area(const GroundPolygon& a, const GroundPolygon& b) {
  const std::vector<Vec2> inter = clip_convex(a.vertices(), b.vertices());
  if (inter.size() < 3) return 0.0;
  return std::abs(polygon_area(inter));
}

// ------------------------------------------------------------ shadow volume

namespace {

struct FaceDef {
  std::array<double, 3> normal_local;
  std::array<int, 4> corners;
};

// Face order: +x, -x, +y, -y, +z, -z (corner bits: 0:+x, 1:+y, 2:+z).
constexpr std::array<FaceDef, 6> kFaces = {{
    {{1, 0, 0}, {1, 3, 5, 7}},
    {{-1, 0, 0}, {0, 2, 4, 6}},
    {{0, 1, 0}, {2, 3, 6, 7}},
    {{0, -1, 0}, {0, 1, 4, 5}},
    {{0, 0, 1}, {4, 5, 6, 7}},
    {{0, 0, -1}, {0, 1, 2, 3}},
}};

struct EdgeDef {
  int a, b;
  int face0, face1;
};

constexpr std::array<EdgeDef, 12> kEdges = {{
    {0, 1, 3, 5}, {2, 3, 2, 5}, {4, 5, 3, 4}, {6, 7, 2, 4},  // along x
    {0, 2, 1, 5}, {1, 3, 0, 5}, {4, 6, 1, 4}, {5, 7, 0, 4},  // along y
    {0, 4, 1, 3}, {1, 5, 0, 3}, {2, 6, 1, 2}, {3, 7, 0, 2},  // along z
}};

}  // namespace

ShadowHull shadow_hull(const Vec3& eye, const PlacedCuboid& cuboid) {
  ShadowHull hull;
  const std::array<Vec3, 8> corners = cuboid.corners();
  const Mat3 r = rot_z(cuboid.yaw);

  std::array<bool, 6> front{};
  bool inside = true;
  for (int f = 0; f < 6; ++f) {
    const Vec3 n = r * Vec3{kFaces[f].normal_local[0], kFaces[f].normal_local[1],
                            kFaces[f].normal_local[2]};
    Vec3 c = Vec3::Zero();
    for (int k : kFaces[f].corners) c += corners[k];
    c *= 0.25;
    const double margin = n.dot(eye) - n.dot(c);
    hull.topology_margin = std::min(hull.topology_margin, std::abs(margin));
    front[f] = margin > 0.0;
    if (front[f]) inside = false;
    if (front[f]) {
      ShadowPlane plane;
      plane.n = n;
      plane.d = n.dot(c);
      plane.kind = ShadowPlane::Kind::kFrontFace;
      plane.face = f;
      hull.planes.push_back(plane);
    }
  }
  if (inside) {
    hull.eye_inside = true;
    hull.planes.clear();
    return hull;
  }

  for (const EdgeDef& e : kEdges) {
    if (front[e.face0] == front[e.face1]) continue;
    int a = e.a, b = e.b;
    Vec3 m = (corners[a] - eye).cross(corners[b] - eye);
    const double len = m.norm();
    if (len < 1e-12) continue;  // eye collinear with the edge
    Vec3 n = m / len;
    if (n.dot(cuboid.center - eye) > 0.0) {
      n = -n;
      std::swap(a, b);
    }
    ShadowPlane plane;
    plane.n = n;
    plane.d = n.dot(eye);
    plane.kind = ShadowPlane::Kind::kSilhouette;
    plane.corner_a = a;
    plane.corner_b = b;
    hull.planes.push_back(plane);
  }
  return hull;
}

double shadow_signed_distance(const ShadowHull& hull, const Vec3& q, int* active_plane,
                              double* runner_up_gap) {
  if (hull.eye_inside || hull.planes.empty()) {
    if (active_plane) *active_plane = -1;
    if (runner_up_gap) *runner_up_gap = std::numeric_limits<double>::infinity();
    return -std::numeric_limits<double>::infinity();
  }
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  int best_idx = -1;
  for (size_t i = 0; i < hull.planes.size(); ++i) {
    const double v = hull.planes[i].n.dot(q) - hull.planes[i].d;
    if (v > best) {
      second = best;
      best = v;
      best_idx = static_cast<int>(i);
    } else if (v > second) {
      second = v;
    }
  }
  if (active_plane) *active_plane = best_idx;
  if (runner_up_gap) *runner_up_gap = best - second;
  return best;
}

double occlusion_signed_distance(const Camera& camera, std::span<const PlacedCuboid> occluders,
                                 const Vec3& q) {
  const Vec3 eye = camera.eye();
  double v = kFullyVisible;
  for (const PlacedCuboid& c : occluders) {
    v = std::min(v, shadow_signed_distance(shadow_hull(eye, c), q));
  }
  return v;
}

bool segment_visible(const Camera& camera, std::span<const PlacedCuboid> occluders,
                     const Vec3& q) {
  const Vec3 eye = camera.eye();
  for (const PlacedCuboid& c : occluders) {
    const Mat3 r_inv = rot_z(-c.yaw);
    const Vec3 p0 = r_inv * (eye - c.center);
    const Vec3 p1 = r_inv * (q - c.center);
    const Vec3 d = p1 - p0;
    double t0 = 0.0, t1 = 1.0;
    bool miss = false;
    for (int axis = 0; axis < 3 && !miss; ++axis) {
      const double h = c.half_extents[axis];
      if (std::abs(d[axis]) < 1e-15) {
        if (std::abs(p0[axis]) > h) miss = true;
        continue;
      }
      double ta = (-h - p0[axis]) / d[axis];
      double tb = (h - p0[axis]) / d[axis];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) miss = true;
    }
    if (!miss) return false;
  }
  return true;
}

}  // namespace scenefit
