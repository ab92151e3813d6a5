#include "scenefit/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scenefit {

// -------------------------------------------------------------- assignment

void Assignment::assign(int scenelet_index, int start_frame, int clip_length, int video_frames) {
  if (clip_length <= 0) throw std::invalid_argument("scenelet clip is empty");
  const int end = start_frame + clip_length;
  if (start_frame < 0 || end > video_frames) {
    throw std::invalid_argument("scenelet span leaves the video");
  }
  for (const auto& [s, e] : spans_) {
    if (start_frame < e && s < end) {
      throw std::invalid_argument("scenelet spans overlap in time");
    }
  }
  entries_.push_back({scenelet_index, start_frame});
  spans_.emplace_back(start_frame, end);
}

int Assignment::covering(int t) const {
  for (size_t i = 0; i < spans_.size(); ++i) {
    if (t >= spans_[i].first && t < spans_[i].second) return static_cast<int>(i);
  }
  return -1;
}

// -------------------------------------------------------------- scene state

SceneState::SceneState() : SceneState(std::make_shared<SceneletDatabase>(), 0) {}

SceneState::SceneState(std::shared_ptr<const SceneletDatabase> db, int n_frames)
    : db_(std::move(db)), n_frames_(n_frames), placements_(n_frames), local_poses_(n_frames) {}

void SceneState::assign(int scenelet_index, int start_frame) {
  const int len = static_cast<int>(db_->records()[scenelet_index].scenelet.frames.size());
  assignment_.assign(scenelet_index, start_frame, len, n_frames_);
}

void SceneState::set_local_poses(std::vector<std::optional<JointPositions>> poses) {
  if (static_cast<int>(poses.size()) != n_frames_) {
    throw std::invalid_argument("local pose count must match frame count");
  }
  local_poses_ = std::move(poses);
}

void SceneState::set_static_objects(std::vector<SceneObject> objects) {
  static_objects_ = std::move(objects);
}

void SceneState::set_object_filter(std::vector<int> keep) {
  object_filter_ = std::move(keep);
  filter_engaged_ = true;
}

void SceneState::clear_object_filter() {
  object_filter_.clear();
  filter_engaged_ = false;
}

namespace {

int owner_placement_frame(const Assignment& assignment, int owner_entry) {
  const auto& entries = assignment.entries();
  if (owner_entry < 0 || owner_entry >= static_cast<int>(entries.size())) return -1;
  return entries[static_cast<size_t>(owner_entry)].start;
}

}  // namespace

int SceneState::placement_index(int t) const {
  const int cov = assignment_.covering(t);
  return cov >= 0 ? assignment_.entries()[cov].start : t;
}

std::vector<bool> SceneState::active_placements() const {
  std::vector<bool> active(n_frames_, false);
  for (int t = 0; t < n_frames_; ++t) {
    const int cov = assignment_.covering(t);
    if (cov < 0) {
      active[t] = true;
    } else {
      active[assignment_.entries()[cov].start] = true;
    }
  }
  return active;
}

std::vector<JointPositions> SceneState::joints_from_scenelets() const {
  std::vector<JointPositions> out(n_frames_);
  for (auto& jp : out) jp.fill(Vec3::Zero());
  for (const Assignment::Entry& e : assignment_.entries()) {
    const Scenelet& s = db_->records()[e.scenelet].scenelet;
    const Placement& p = placements_[e.start];
    const int len = static_cast<int>(s.frames.size());
    for (int i = 0; i < len; ++i) {
      const int t = e.start + i;
      for (int k = 0; k < kJointCount; ++k) {
        out[t][k] = p.apply(s.frames[i].joints[k]);
      }
    }
  }
  return out;
}

std::vector<JointPositions> SceneState::joints_from_skeletons() const {
  std::vector<JointPositions> out(n_frames_);
  for (auto& jp : out) jp.fill(Vec3::Zero());
  for (int t = 0; t < n_frames_; ++t) {
    if (assignment_.eta(t) > 0) continue;
    if (!local_poses_[t]) {
      throw std::logic_error("frame " + std::to_string(t) +
                             " has no scenelet and no local pose; interpolate first");
    }
    const Placement& p = placements_[t];
    for (int k = 0; k < kJointCount; ++k) {
      out[t][k] = p.apply((*local_poses_[t])[k]);
    }
  }
  return out;
}

std::vector<JointPositions> SceneState::combined_joints() const {
  std::vector<JointPositions> q = joints_from_scenelets();
  const std::vector<JointPositions> st = joints_from_skeletons();
  for (int t = 0; t < n_frames_; ++t) {
    for (int k = 0; k < kJointCount; ++k) q[t][k] += st[t][k];
  }
  return q;
}

namespace {

PlacedObject make_placed_object(const SceneObject& obj, const Placement& outer, int owner,
                                bool ground_anchor) {
  PlacedObject po;
  po.label = obj.label;
  po.owner_entry = owner;
  const Placement composed = outer.compose(obj.placement);
  po.world_yaw = composed.theta;
  double min_bottom = std::numeric_limits<double>::infinity();
  for (const Cuboid& c : obj.cuboids) {
    PlacedCuboid pc = place_cuboid(c, composed);
    min_bottom = std::min(min_bottom, pc.bottom());
    po.cuboids.push_back(pc);
  }
  if (ground_anchor && std::isfinite(min_bottom)) {
    // Snap the object to the ground plane. The shift cancels the placement's
    // z exactly, so object geometry does not depend on it.
    for (PlacedCuboid& pc : po.cuboids) pc.center.z() -= min_bottom;
  }
  double area_total = 0.0;
  Vec2 centroid = Vec2::Zero();
  for (const PlacedCuboid& pc : po.cuboids) {
    po.footprint.push_back(cuboid_footprint(pc));
    const double a = po.footprint.back().area();
    centroid += a * po.footprint.back().centroid();
    area_total += a;
  }
  if (area_total > 0.0) po.ground_centroid = centroid / area_total;
  return po;
}

}  // namespace

std::vector<PlacedObject> SceneState::scene_objects() const {
  std::vector<PlacedObject> all;
  const auto& entries = assignment_.entries();
  for (size_t e = 0; e < entries.size(); ++e) {
    const SceneletRecord& rec = db_->records()[entries[e].scenelet];
    const Placement& p = placements_[entries[e].start];
    for (const SceneObject& obj : rec.scenelet.objects) {
      all.push_back(make_placed_object(obj, p, static_cast<int>(e), /*ground_anchor=*/true));
    }
  }
  for (const SceneObject& obj : static_objects_) {
    all.push_back(make_placed_object(obj, Placement::identity(), -1, /*ground_anchor=*/false));
  }
  if (!filter_engaged_) return all;
  std::vector<PlacedObject> kept;
  kept.reserve(object_filter_.size());
  for (int idx : object_filter_) {
    if (idx >= 0 && idx < static_cast<int>(all.size())) kept.push_back(all[idx]);
  }
  return kept;
}

// ------------------------------------------------------------------- energy

double asymmetric_occlusion_cost(double v, double c) {
  if (c - 0.5 < 0.0 && v > 0.0) {
    const double a = c - 0.5;
    return a * a * v * v;
  }
  return 0.0;
}

bool objects_compatible(const PlacedObject& a, const PlacedObject& b, double angle_tol) {
  return a.label == b.label && angle_distance(a.world_yaw, b.world_yaw) <= angle_tol;
}

namespace {

inline Vec3 ez_cross(const Vec3& v) { return {-v.y(), v.x(), 0.0}; }

// Derivative of a world point rigidly attached to `p` with respect to
// parameter `param`. `z_free` is false for scene objects, whose height is
// pinned by the ground re-anchor.
inline Vec3 attached_point_derivative(const Placement& p, const Vec3& point, int param,
                                      bool z_free) {
  switch (param) {
    case 0: return {1.0, 0.0, 0.0};
    case 1: return {0.0, 1.0, 0.0};
    case 2: return z_free ? Vec3{0.0, 0.0, 1.0} : Vec3::Zero();
    case 3: return {-(point.y() - p.y), point.x() - p.x, 0.0};
    default: return Vec3::Zero();
  }
}

struct Margin {
  double value = std::numeric_limits<double>::infinity();
  void note(double m) { value = std::min(value, std::abs(m)); }
};

// Gradient sink: when grad is null only the value is computed.
struct Sink {
  std::vector<Vec4>* grad = nullptr;
  double weight = 1.0;

  void add(int placement_frame, int param, double value) const {
    if (grad && placement_frame >= 0) (*grad)[placement_frame][param] += weight * value;
  }
};

struct JointContext {
  std::vector<JointPositions> q;
  std::vector<int> pidx;           // placement frame per video frame
  const std::vector<Placement>* placements = nullptr;
};

JointContext make_joint_context(const SceneState& state) {
  JointContext ctx;
  ctx.q = state.combined_joints();
  ctx.pidx.resize(state.frames());
  for (int t = 0; t < state.frames(); ++t) ctx.pidx[t] = state.placement_index(t);
  ctx.placements = &state.placements();
  return ctx;
}

double eval_reprojection(const JointContext& ctx, const ObservationTrack& track,
                         const Camera& camera, const Sink& sink, Margin& margin, int* skipped) {
  double total = 0.0;
  const int n = static_cast<int>(ctx.q.size());
  for (int t = 0; t < n; ++t) {
    const Placement& p = (*ctx.placements)[ctx.pidx[t]];
    for (int k = 0; k < kJointCount; ++k) {
      const double c = track.frames[t].joints[k].confidence;
      if (c <= 0.0) continue;
      const Vec3& q = ctx.q[t][k];
      const auto proj = camera.project(q);
      if (!proj) {
        if (skipped) ++(*skipped);
        continue;
      }
      margin.note(camera.to_camera(q).z());
      const Vec2 r = *proj - track.frames[t].joints[k].pixel;
      total += c * r.squaredNorm();
      if (sink.grad) {
        const Eigen::Matrix<double, 2, 3> jac = camera.projection_jacobian(q);
        const Vec3 g = 2.0 * c * (jac.transpose() * r);
        for (int param = 0; param < 4; ++param) {
          sink.add(ctx.pidx[t], param,
                   g.dot(attached_point_derivative(p, q, param, /*z_free=*/true)));
        }
      }
    }
  }
  return total;
}

double eval_smoothness(const JointContext& ctx, const Sink& sink) {
  double total = 0.0;
  const int n = static_cast<int>(ctx.q.size());
  for (int t = 1; t < n; ++t) {
    const Vec3& a = ctx.q[t - 1][kPelvis];
    const Vec3& b = ctx.q[t][kPelvis];
    const Vec3 d = b - a;
    total += d.squaredNorm();
    if (sink.grad) {
      const Placement& pb = (*ctx.placements)[ctx.pidx[t]];
      const Placement& pa = (*ctx.placements)[ctx.pidx[t - 1]];
      for (int param = 0; param < 4; ++param) {
        sink.add(ctx.pidx[t], param,
                 2.0 * d.dot(attached_point_derivative(pb, b, param, true)));
        sink.add(ctx.pidx[t - 1], param,
                 -2.0 * d.dot(attached_point_derivative(pa, a, param, true)));
      }
    }
  }
  return total;
}

struct OccluderSet {
  struct Item {
    PlacedCuboid cuboid;
    ShadowHull hull;
    int owner_frame = -1;  // placement frame moving this cuboid, -1 if static
  };
  std::vector<Item> items;
};

OccluderSet make_occluders(std::span<const PlacedObject> objects, const SceneState& state,
                           const Vec3& eye, Margin& margin) {
  OccluderSet set;
  for (const PlacedObject& obj : objects) {
    const int owner = owner_placement_frame(state.assignment(), obj.owner_entry);
    for (const PlacedCuboid& c : obj.cuboids) {
      OccluderSet::Item item;
      item.cuboid = c;
      item.hull = shadow_hull(eye, c);
      item.owner_frame = owner;
      if (owner >= 0) margin.note(item.hull.topology_margin);
      set.items.push_back(std::move(item));
    }
  }
  return set;
}

// d(plane value at q)/d(owner placement param), for a plane of `item`'s hull.
double plane_value_derivative(const OccluderSet::Item& item, const ShadowPlane& plane,
                              const Vec3& q, const Vec3& eye, const Placement& owner, int param) {
  if (plane.kind == ShadowPlane::Kind::kFrontFace) {
    // V = n . (q - c_face)
    const auto corners = item.cuboid.corners();
    static constexpr int kFaceCorners[6][4] = {{1, 3, 5, 7}, {0, 2, 4, 6}, {2, 3, 6, 7},
                                               {0, 1, 4, 5}, {4, 5, 6, 7}, {0, 1, 2, 3}};
    Vec3 c_face = Vec3::Zero();
    for (int idx : kFaceCorners[plane.face]) c_face += corners[idx];
    c_face *= 0.25;
    const Vec3 dc = attached_point_derivative(owner, c_face, param, /*z_free=*/false);
    double v = -plane.n.dot(dc);
    if (param == 3) v += ez_cross(plane.n).dot(q - c_face);
    return v;
  }
  // Silhouette: V = n . (q - eye), n = (a - eye) x (b - eye) normalized.
  const auto corners = item.cuboid.corners();
  const Vec3 a = corners[plane.corner_a];
  const Vec3 b = corners[plane.corner_b];
  const Vec3 u = a - eye;
  const Vec3 w = b - eye;
  const Vec3 m = u.cross(w);
  const double len = m.norm();
  if (len < 1e-12) return 0.0;
  const Vec3 da = attached_point_derivative(owner, a, param, false);
  const Vec3 db = attached_point_derivative(owner, b, param, false);
  const Vec3 dm = da.cross(w) + u.cross(db);
  const Vec3 n = m / len;
  const Vec3 dn = (dm - n * n.dot(dm)) / len;
  return dn.dot(q - eye);
}

double eval_occlusion(const JointContext& ctx, const ObservationTrack& track,
                      const Camera& camera, const OccluderSet& occluders,
                      const std::vector<Placement>& placements, const Sink& sink,
                      Margin& margin, const EnergyOptions& opts) {
  double total = 0.0;
  const double cap = opts.occlusion_cap;
  const Vec3 eye = camera.eye();
  const int n = static_cast<int>(ctx.q.size());
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < kJointCount; ++k) {
      const double c = track.frames[t].joints[k].confidence;
      if (!(c < 0.5)) continue;
      const Vec3& q = ctx.q[t][k];
      double best = std::numeric_limits<double>::infinity();
      double second = std::numeric_limits<double>::infinity();
      int best_item = -1, best_plane = -1;
      int second_item = -1, second_plane = -1;
      for (size_t i = 0; i < occluders.items.size(); ++i) {
        int plane_idx = -1;
        double gap = 0.0;
        const double v = shadow_signed_distance(occluders.items[i].hull, q, &plane_idx, &gap);
        if (v < best) {
          second = best;
          second_item = best_item;
          second_plane = best_plane;
          best = v;
          best_item = static_cast<int>(i);
          best_plane = plane_idx;
        } else if (v < second) {
          second = v;
          second_item = static_cast<int>(i);
          second_plane = plane_idx;
        }
      }
      if (best == -std::numeric_limits<double>::infinity()) continue;  // eye inside a cuboid
      margin.note(std::isfinite(best) ? best : cap);  // the v = 0 case split
      if (std::isfinite(best)) margin.note(best - cap);  // the cap boundary
      if (std::isfinite(second) && second_item >= 0 && best_item >= 0) {
        // Coincident horizontal planes (equal-height furniture tops) are a
        // benign tie: both branches are the same affine function of q and
        // carry no placement derivative, so they need no margin.
        const ShadowPlane& pa = occluders.items[best_item].hull.planes[best_plane];
        const ShadowPlane& pb = occluders.items[second_item].hull.planes[second_plane];
        const bool coplanar_horizontal = std::abs(std::abs(pa.n.z()) - 1.0) < 1e-12 &&
                                         std::abs(std::abs(pb.n.z()) - 1.0) < 1e-12 &&
                                         std::abs(pa.d - pb.d) < 1e-12 &&
                                         (pa.n - pb.n).norm() < 1e-12;
        if (!coplanar_horizontal) margin.note(second - best);
      }
      if (best_plane >= 0) {
        const auto& hull = occluders.items[best_item].hull;
        double gap;
        shadow_signed_distance(hull, q, nullptr, &gap);
        margin.note(gap);
      }
      if (best <= 0.0) continue;
      const double a = c - 0.5;
      const double v_eff = std::min(best, cap);
      total += a * a * v_eff * v_eff;
      if (!sink.grad || best >= cap) continue;  // flat past the cap
      const double coef = 2.0 * a * a * best;
      const auto& item = occluders.items[best_item];
      const ShadowPlane& plane = item.hull.planes[best_plane];
      // Path 1: the joint moves with its own placement.
      const Placement& pj = placements[ctx.pidx[t]];
      for (int param = 0; param < 4; ++param) {
        sink.add(ctx.pidx[t], param,
                 coef * plane.n.dot(attached_point_derivative(pj, q, param, true)));
      }
      // Path 2: the occluder moves with its owner's placement.
      if (item.owner_frame >= 0) {
        const Placement& po = placements[item.owner_frame];
        for (int param = 0; param < 4; ++param) {
          sink.add(item.owner_frame, param,
                   coef * plane_value_derivative(item, plane, q, eye, po, param));
        }
      }
    }
  }
  return total;
}

// Signed distance from a point to an object's footprint (min over
// rectangles), with gradient and competition margin.
double object_ground_sd(const PlacedObject& obj, const Vec2& x, Vec2* grad, Margin* margin) {
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  const GroundPolygon* best_poly = nullptr;
  for (const GroundPolygon& poly : obj.footprint) {
    const double d = poly.signed_distance(x);
    if (d < best) {
      second = best;
      best = d;
      best_poly = &poly;
    } else if (d < second) {
      second = d;
    }
  }
  if (margin && std::isfinite(second)) margin->note(second - best);
  if (grad && best_poly) *grad = best_poly->signed_distance_gradient(x);
  return best;
}

double eval_object_isect(std::span<const PlacedObject> objects, const SceneState& state,
                         const EnergyOptions& opts, const Sink& sink, Margin& margin) {
  const auto owner_frame = [&](const PlacedObject& o) {
    return owner_placement_frame(state.assignment(), o.owner_entry);
  };

  double total = 0.0;
  const size_t n = objects.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const PlacedObject& a = objects[i];
      const PlacedObject& b = objects[j];
      if (a.label == b.label) {
        margin.note(angle_distance(a.world_yaw, b.world_yaw) - opts.compat_angle_tol);
        if (objects_compatible(a, b, opts.compat_angle_tol)) continue;
      }
      // Both directions of the penetration integral.
      for (int dir = 0; dir < 2; ++dir) {
        const PlacedObject& domain = dir == 0 ? a : b;
        const PlacedObject& field = dir == 0 ? b : a;
        const int domain_owner = owner_frame(domain);
        const int field_owner = owner_frame(field);
        const Placement* dp =
            domain_owner >= 0 ? &state.placements()[domain_owner] : nullptr;
        const Placement* fp = field_owner >= 0 ? &state.placements()[field_owner] : nullptr;
        for (const GroundPolygon& rect : domain.footprint) {
          const Vec2 center = rect.rect_center();
          const Vec2 half = rect.rect_half_extents();
          const double ang = rect.rect_angle();
          const double ca = std::cos(ang), sa = std::sin(ang);
          const int nx = std::max(1, static_cast<int>(std::ceil(2.0 * half.x() /
                                                                opts.isect_grid_pitch)));
          const int ny = std::max(1, static_cast<int>(std::ceil(2.0 * half.y() /
                                                                opts.isect_grid_pitch)));
          const double wx = 2.0 * half.x() / nx;
          const double wy = 2.0 * half.y() / ny;
          const double weight = wx * wy / 4.0;  // 2x2 Gauss-Legendre per cell
          const double gx = wx * 0.5 / std::sqrt(3.0);
          const double gy = wy * 0.5 / std::sqrt(3.0);
          for (int ix = 0; ix < nx; ++ix) {
            for (int iy = 0; iy < ny; ++iy) {
              const double cx_local = -half.x() + (ix + 0.5) * wx;
              const double cy_local = -half.y() + (iy + 0.5) * wy;
              for (int gp = 0; gp < 4; ++gp) {
                const double lx = cx_local + ((gp & 1) ? gx : -gx);
                const double ly = cy_local + ((gp & 2) ? gy : -gy);
                const Vec2 x{center.x() + ca * lx - sa * ly, center.y() + sa * lx + ca * ly};
                Vec2 gradd;
                const double d = object_ground_sd(field, x, &gradd, &margin);
                margin.note(d);
                if (d >= 0.0) continue;
                for (const GroundPolygon& fr : field.footprint) margin.note(fr.kink_margin(x));
                // L_c accumulates -delta^-.
                total -= weight * d;
                if (!sink.grad) continue;
                const Vec3 x3{x.x(), x.y(), 0.0};
                if (dp) {
                  for (int param = 0; param < 4; ++param) {
                    const Vec3 dx = attached_point_derivative(*dp, x3, param, false);
                    sink.add(domain_owner, param, -weight * gradd.dot(dx.head<2>()));
                  }
                }
                if (fp) {
                  for (int param = 0; param < 4; ++param) {
                    const Vec3 dx = attached_point_derivative(*fp, x3, param, false);
                    sink.add(field_owner, param, weight * gradd.dot(dx.head<2>()));
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return total;
}

double eval_motion_isect(const JointContext& ctx, std::span<const PlacedObject> objects,
                         const SceneState& state, const EnergyOptions& opts, const Sink& sink,
                         Margin& margin) {
  if (objects.empty()) return 0.0;
  double total = 0.0;
  const int n = static_cast<int>(ctx.q.size());
  const std::array<Joint, 3> joints = {kPelvis, kKneeLeft, kKneeRight};
  for (int t = 0; t < n; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    int best_joint = -1, best_obj = -1;
    Vec2 best_grad = Vec2::Zero();
    for (int ji = 0; ji < 3; ++ji) {
      const Vec2 x = ctx.q[t][joints[ji]].head<2>();
      double obj_best = std::numeric_limits<double>::infinity();
      double obj_second = std::numeric_limits<double>::infinity();
      int obj_idx = -1;
      Vec2 obj_grad = Vec2::Zero();
      for (size_t oi = 0; oi < objects.size(); ++oi) {
        Vec2 g;
        const double d = object_ground_sd(objects[oi], x, &g, &margin);
        if (d < obj_best) {
          obj_second = obj_best;
          obj_best = d;
          obj_idx = static_cast<int>(oi);
          obj_grad = g;
        } else if (d < obj_second) {
          obj_second = d;
        }
      }
      if (std::isfinite(obj_second)) margin.note(obj_second - obj_best);
      if (obj_best > best) {
        second = best;
        best = obj_best;
        best_joint = ji;
        best_obj = obj_idx;
        best_grad = obj_grad;
      } else if (obj_best > second) {
        second = obj_best;
      }
    }
    if (std::isfinite(second)) margin.note(best - second);
    margin.note(best);  // the clamp boundary
    const bool active = !opts.clamp_motion_isect || best < 0.0;
    if (!active) continue;
    total += opts.clamp_motion_isect ? -best : best;
    if (!sink.grad || best_joint < 0 || best_obj < 0) continue;
    const double sign = opts.clamp_motion_isect ? -1.0 : 1.0;
    const Vec3& qj = ctx.q[t][joints[best_joint]];
    const Placement& pj = (*ctx.placements)[ctx.pidx[t]];
    for (int param = 0; param < 4; ++param) {
      const Vec3 dq = attached_point_derivative(pj, qj, param, true);
      sink.add(ctx.pidx[t], param, sign * best_grad.dot(dq.head<2>()));
    }
    const PlacedObject& obj = objects[best_obj];
    const int of = owner_placement_frame(state.assignment(), obj.owner_entry);
    if (of >= 0) {
      const Placement& po = state.placements()[of];
      const Vec3 x3{qj.x(), qj.y(), 0.0};
      for (int param = 0; param < 4; ++param) {
        const Vec3 dx = attached_point_derivative(po, x3, param, false);
        sink.add(of, param, -sign * best_grad.dot(dx.head<2>()));
      }
    }
  }
  return total;
}

EnergyGradient evaluate(const SceneState& state, const ObservationTrack& track,
                        const Camera& camera, const Weights& w, const EnergyOptions& opts,
                        bool with_gradient) {
  if (track.size() != state.frames()) {
    throw std::invalid_argument("track and scene state disagree on frame count");
  }
  EnergyGradient out;
  if (with_gradient) out.d_placement.assign(state.frames(), Vec4::Zero());
  EnergyBreakdown& b = out.breakdown;
  Margin margin;

  const JointContext ctx = make_joint_context(state);
  std::vector<PlacedObject> objects;
  const bool needs_objects = w.occlusion > 0.0 || w.object_isect > 0.0 || w.motion_isect > 0.0;
  if (needs_objects) objects = state.scene_objects();

  const auto sink_for = [&](double weight) {
    return Sink{with_gradient ? &out.d_placement : nullptr, weight};
  };

  if (w.reprojection > 0.0) {
    b.reprojection = eval_reprojection(ctx, track, camera, sink_for(w.reprojection), margin,
                                       &b.skipped_behind_camera);
  }
  if (w.smoothness > 0.0) {
    const double ws = w.smoothness_at(track.fps);
    b.smoothness = eval_smoothness(ctx, sink_for(ws));
    b.total += ws * b.smoothness;
  }
  if (w.occlusion > 0.0) {
    const OccluderSet occ = make_occluders(objects, state, camera.eye(), margin);
    b.occlusion = eval_occlusion(ctx, track, camera, occ, state.placements(),
                                 sink_for(w.occlusion), margin, opts);
  }
  if (w.object_isect > 0.0) {
    b.object_isect = eval_object_isect(objects, state, opts, sink_for(w.object_isect), margin);
  }
  if (w.motion_isect > 0.0) {
    b.motion_isect = eval_motion_isect(ctx, objects, state, opts, sink_for(w.motion_isect),
                                       margin);
  }
  b.total += w.reprojection * b.reprojection + w.occlusion * b.occlusion +
             w.object_isect * b.object_isect + w.motion_isect * b.motion_isect;
  b.boundary_margin = margin.value;
  return out;
}

}  // namespace

double reprojection_term(const SceneState& state, const ObservationTrack& track,
                         const Camera& camera, int* skipped) {
  const JointContext ctx = make_joint_context(state);
  Margin margin;
  int local_skipped = 0;
  const double v = eval_reprojection(ctx, track, camera, Sink{}, margin, &local_skipped);
  if (skipped) *skipped = local_skipped;
  return v;
}

double occlusion_term(const SceneState& state, const ObservationTrack& track,
                      const Camera& camera, const EnergyOptions& opts) {
  const JointContext ctx = make_joint_context(state);
  Margin margin;
  const std::vector<PlacedObject> objects = state.scene_objects();
  const OccluderSet occ = make_occluders(objects, state, camera.eye(), margin);
  return eval_occlusion(ctx, track, camera, occ, state.placements(), Sink{}, margin, opts);
}

double smoothness_term(const SceneState& state) {
  const JointContext ctx = make_joint_context(state);
  return eval_smoothness(ctx, Sink{});
}

double object_intersection_term(std::span<const PlacedObject> objects,
                                const EnergyOptions& opts) {
  // Standalone evaluation path with no owning state: gradients disabled.
  SceneState dummy(std::make_shared<SceneletDatabase>(), 0);
  Margin margin;
  return eval_object_isect(objects, dummy, opts, Sink{}, margin);
}

double motion_intersection_term(const SceneState& state, std::span<const PlacedObject> objects,
                                const EnergyOptions& opts) {
  const JointContext ctx = make_joint_context(state);
  Margin margin;
  return eval_motion_isect(ctx, objects, state, opts, Sink{}, margin);
}

double motion_isect_fixed_frames(std::span<const GroundJoints> frames,
                                 std::span<const PlacedObject> objects, const Placement& owner,
                                 const EnergyOptions& opts, double weight, Vec4* grad) {
  if (objects.empty()) return 0.0;
  double total = 0.0;
  Margin margin;  // unused, competition tracking only
  for (const GroundJoints& frame : frames) {
    double best = -std::numeric_limits<double>::infinity();
    Vec2 best_grad = Vec2::Zero();
    Vec2 best_point = Vec2::Zero();
    for (const Vec2& x : frame.points) {
      double obj_best = std::numeric_limits<double>::infinity();
      Vec2 obj_grad = Vec2::Zero();
      for (const PlacedObject& obj : objects) {
        Vec2 g;
        const double d = object_ground_sd(obj, x, &g, &margin);
        if (d < obj_best) {
          obj_best = d;
          obj_grad = g;
        }
      }
      if (obj_best > best) {
        best = obj_best;
        best_grad = obj_grad;
        best_point = x;
      }
    }
    const bool active = !opts.clamp_motion_isect || best < 0.0;
    if (!active || !std::isfinite(best)) continue;
    const double sign = opts.clamp_motion_isect ? -1.0 : 1.0;
    total += sign * best;
    if (grad) {
      // Objects move with the owner; the points stay fixed.
      const Vec3 x3{best_point.x(), best_point.y(), 0.0};
      for (int param = 0; param < 4; ++param) {
        const Vec3 dx = attached_point_derivative(owner, x3, param, false);
        (*grad)[param] += weight * -sign * best_grad.dot(dx.head<2>());
      }
    }
  }
  return total;
}

EnergyBreakdown total_energy(const SceneState& state, const ObservationTrack& track,
                             const Camera& camera, const Weights& weights,
                             const EnergyOptions& opts) {
  return evaluate(state, track, camera, weights, opts, /*with_gradient=*/false).breakdown;
}

EnergyGradient energy_gradient(const SceneState& state, const ObservationTrack& track,
                               const Camera& camera, const Weights& weights,
                               const EnergyOptions& opts) {
  return evaluate(state, track, camera, weights, opts, /*with_gradient=*/true);
}

}  // namespace scenefit
