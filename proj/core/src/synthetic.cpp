#include "scenefit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace scenefit {

// ------------------------------------------------------ procedural humanoid

SkeletonFrame make_pose(const Vec2& ground, double facing, const PoseParams& pp,
                        const BodyShape& s) {
  // Build in the body frame (forward +X, left +Y, up +Z), then place.
  const auto local = [&](double fx, double fy, double fz) { return Vec3{fx, fy, fz}; };
  SkeletonFrame f;

  const double swing = pp.step_amplitude * std::sin(pp.step_phase);
  const double bob = 0.015 * pp.step_amplitude * std::cos(2.0 * pp.step_phase);
  const double pz = pp.pelvis_z + bob;

  f[kPelvis] = local(0.0, 0.0, pz);
  f[kHipLeft] = local(0.0, s.hip_half_width, pz - 0.02);
  f[kHipRight] = local(0.0, -s.hip_half_width, pz - 0.02);

  // Legs: thigh pitch = knee_pitch plus the gait swing, opposite per side.
  // A small fixed left/right asymmetry keeps poses out of exact mirror
  // symmetry (real actors are not symmetric either).
  const auto leg = [&](Joint hip, Joint knee, Joint ankle, double side_swing, double bias) {
    const double alpha = pp.knee_pitch + side_swing + bias;
    const Vec3 h = f[hip];
    Vec3 k = h + Vec3{std::sin(alpha) * s.thigh_length, 0.0,
                      -std::cos(alpha) * s.thigh_length};
    // Shank: vertical when seated, trails the thigh when walking.
    const double beta = 0.35 * side_swing;
    Vec3 a = k + Vec3{std::sin(beta) * s.shank_length, 0.0,
                      -std::cos(beta) * s.shank_length};
    a.z() = std::max(a.z(), 0.06);
    f[knee] = k;
    f[ankle] = a;
  };
  leg(kHipLeft, kKneeLeft, kAnkleLeft, swing, 0.011);
  leg(kHipRight, kKneeRight, kAnkleRight, -swing, -0.017);

  // Torso and head.
  const Vec3 up_lean{std::sin(pp.torso_lean), 0.0, std::cos(pp.torso_lean)};
  const Vec3 sc = f[kPelvis] + s.spine_length * up_lean;
  f[kShoulderCenter] = sc;
  f[kShoulderLeft] = sc + local(0.0, s.shoulder_half_width, -0.02);
  f[kShoulderRight] = sc + local(0.0, -s.shoulder_half_width, -0.02);
  f[kHead] = sc + s.neck_length * up_lean;
  f[kHeadTop] = f[kHead] + s.head_length * up_lean;

  // Arms: pitch from hanging (0) toward extended forward-up (arm_raise 1),
  // with a counter-phase gait swing.
  const auto arm = [&](Joint shoulder, Joint elbow, Joint wrist, double side_swing) {
    const double delta = pp.arm_raise * (0.5 * kPi + 0.3) + side_swing;
    const Vec3 dir{std::sin(delta), 0.0, -std::cos(delta)};
    const double delta2 = delta + 0.25 * pp.arm_raise;
    const Vec3 dir2{std::sin(delta2), 0.0, -std::cos(delta2)};
    f[elbow] = f[shoulder] + s.upper_arm_length * dir;
    f[wrist] = f[elbow] + s.forearm_length * dir2;
  };
  arm(kShoulderLeft, kElbowLeft, kWristLeft, -0.6 * swing);
  arm(kShoulderRight, kElbowRight, kWristRight, 0.6 * swing);

  const Placement world{ground.x(), ground.y(), 0.0, facing};
  return transform_frame(f, world);
}

std::vector<SkeletonFrame> walk_frames(const Vec2& from, const Vec2& to, double fps,
                                       double speed, double* phase_io, const BodyShape& shape) {
  std::vector<SkeletonFrame> out;
  const double dist = (to - from).norm();
  if (dist < 1e-9) return out;
  const double facing = std::atan2(to.y() - from.y(), to.x() - from.x());
  const int n = std::max(2, static_cast<int>(std::round(dist / speed * fps)));
  double phase = phase_io ? *phase_io : 0.0;
  const double stride = 1.3;  // meters per full gait cycle
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    const Vec2 pos = from + u * (to - from);
    PoseParams pp;
    pp.pelvis_z = shape.pelvis_height;
    pp.step_phase = phase + 2.0 * kPi * (u * dist) / stride;
    pp.step_amplitude = 0.35;
    out.push_back(make_pose(pos, facing, pp, shape));
  }
  if (phase_io) *phase_io = phase + 2.0 * kPi * dist / stride;
  return out;
}

std::vector<SkeletonFrame> sit_cycle_frames(const Placement& seat_pose, double seat_height,
                                            double fps, double dwell_seconds,
                                            const BodyShape& shape) {
  std::vector<SkeletonFrame> out;
  const Vec2 seat{seat_pose.x, seat_pose.y};
  const double facing = seat_pose.theta;
  const Vec2 fwd{std::cos(facing), std::sin(facing)};
  const Vec2 stance = seat + 0.40 * fwd;  // feet stay here

  const int down = std::max(2, static_cast<int>(std::round(1.2 * fps)));
  const int hold = std::max(1, static_cast<int>(std::round(dwell_seconds * fps)));
  const int up = down;

  for (int i = 0; i < down; ++i) {
    const double u = static_cast<double>(i) / (down - 1);
    PoseParams pp;
    pp.pelvis_z = shape.pelvis_height + u * (seat_height - shape.pelvis_height);
    pp.knee_pitch = u * 0.5 * kPi;
    pp.torso_lean = 0.25 * std::sin(u * kPi);  // lean forward through the descent
    pp.arm_raise = 0.1 * u;
    const Vec2 pos = stance + u * (seat - stance);
    out.push_back(make_pose(pos, facing, pp, shape));
  }
  for (int i = 0; i < hold; ++i) {
    PoseParams pp;
    pp.pelvis_z = seat_height;
    pp.knee_pitch = 0.5 * kPi;
    pp.torso_lean = 0.05 * std::sin(2.0 * kPi * i / std::max(1, hold - 1));
    pp.arm_raise = 0.1;
    out.push_back(make_pose(seat, facing, pp, shape));
  }
  for (int i = 0; i < up; ++i) {
    const double u = 1.0 - static_cast<double>(i) / (up - 1);
    PoseParams pp;
    pp.pelvis_z = shape.pelvis_height + u * (seat_height - shape.pelvis_height);
    pp.knee_pitch = u * 0.5 * kPi;
    pp.torso_lean = 0.25 * std::sin(u * kPi);
    pp.arm_raise = 0.1 * u;
    const Vec2 pos = stance + u * (seat - stance);
    out.push_back(make_pose(pos, facing, pp, shape));
  }
  return out;
}

std::vector<SkeletonFrame> reach_cycle_frames(const Placement& shelf_pose, double fps,
                                              double dwell_seconds, const BodyShape& shape) {
  std::vector<SkeletonFrame> out;
  const Vec2 shelf{shelf_pose.x, shelf_pose.y};
  const Vec2 shelf_fwd{std::cos(shelf_pose.theta), std::sin(shelf_pose.theta)};
  const Vec2 stand = shelf + 0.55 * shelf_fwd;
  const double facing = wrap_angle(shelf_pose.theta + kPi);  // face the shelf

  const int raise = std::max(2, static_cast<int>(std::round(1.0 * fps)));
  const int hold = std::max(1, static_cast<int>(std::round(dwell_seconds * fps)));
  for (int i = 0; i < raise; ++i) {
    const double u = static_cast<double>(i) / (raise - 1);
    PoseParams pp;
    pp.pelvis_z = shape.pelvis_height;
    pp.arm_raise = u;
    pp.torso_lean = 0.12 * u;
    out.push_back(make_pose(stand, facing, pp, shape));
  }
  for (int i = 0; i < hold; ++i) {
    PoseParams pp;
    pp.pelvis_z = shape.pelvis_height;
    pp.arm_raise = 1.0;
    pp.torso_lean = 0.12 + 0.02 * std::sin(2.0 * kPi * i / std::max(1, hold));
    out.push_back(make_pose(stand, facing, pp, shape));
  }
  for (int i = 0; i < raise; ++i) {
    const double u = 1.0 - static_cast<double>(i) / (raise - 1);
    PoseParams pp;
    pp.pelvis_z = shape.pelvis_height;
    pp.arm_raise = u;
    pp.torso_lean = 0.12 * u;
    out.push_back(make_pose(stand, facing, pp, shape));
  }
  return out;
}

SceneObject make_box_object(const std::string& label, const Placement& placement,
                            const Vec3& half_extents) {
  SceneObject obj;
  obj.label = label;
  obj.placement = placement;
  obj.cuboids.push_back(Cuboid{Vec3{0.0, 0.0, half_extents.z()}, half_extents, 0.0});
  return obj;
}

Recording make_recording(const RecordingTemplate& tmpl, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> speed_jitter(0.85, 1.15);
  std::uniform_real_distribution<double> dwell_jitter(0.8, 1.3);

  Recording rec;
  rec.name = tmpl.name;
  rec.fps = tmpl.fps;
  rec.objects = tmpl.objects;

  Vec2 pos = tmpl.start;
  double phase = 0.0;
  const auto append = [&](std::vector<SkeletonFrame> frames) {
    for (SkeletonFrame& f : frames) {
      f.time = static_cast<double>(rec.frames.size()) / rec.fps;
      rec.frames.push_back(f);
    }
  };

  for (const RecordingAction& action : tmpl.actions) {
    if (const auto* walk = std::get_if<WalkTo>(&action)) {
      append(walk_frames(pos, walk->target, tmpl.fps, speed_jitter(rng), &phase));
      pos = walk->target;
    } else if (const auto* sit = std::get_if<SitAt>(&action)) {
      const SceneObject& obj = tmpl.objects[sit->object_index];
      const Placement& p = obj.placement;
      const Vec2 stance = Vec2{p.x, p.y} +
                          0.40 * Vec2{std::cos(p.theta), std::sin(p.theta)};
      append(walk_frames(pos, stance, tmpl.fps, speed_jitter(rng), &phase));
      const double seat_h =
          obj.cuboids.empty() ? 0.45 : obj.cuboids[0].center.z() + obj.cuboids[0].half_extents.z();
      append(sit_cycle_frames(p, seat_h + 0.06, tmpl.fps,
                              sit->dwell_seconds * dwell_jitter(rng)));
      pos = stance;
    } else if (const auto* reach = std::get_if<ReachAt>(&action)) {
      const SceneObject& obj = tmpl.objects[reach->object_index];
      const Placement& p = obj.placement;
      const Vec2 stand = Vec2{p.x, p.y} +
                         0.55 * Vec2{std::cos(p.theta), std::sin(p.theta)};
      append(walk_frames(pos, stand, tmpl.fps, speed_jitter(rng), &phase));
      append(reach_cycle_frames(p, tmpl.fps, reach->dwell_seconds * dwell_jitter(rng)));
      pos = stand;
    }
  }
  return rec;
}

// ------------------------------------------------------------ scene truth

bool GroundTruthScene::frame_fully_visible(int t) const {
  if (t < 0 || t >= static_cast<int>(visibility.size())) return false;
  for (Joint j : metric_joints()) {
    if (!visibility[t][j]) return false;
  }
  return true;
}

GroundTruthScene generate_scene(const SceneTemplate& tmpl, const SceneletDatabase& db,
                                uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> speed_jitter(0.9, 1.1);

  GroundTruthScene scene;
  scene.camera = tmpl.camera;
  scene.fps = tmpl.fps;

  Vec2 pos = tmpl.entry;
  double phase = 0.0;
  const auto append = [&](std::vector<SkeletonFrame> frames) {
    for (SkeletonFrame& f : frames) {
      f.time = static_cast<double>(scene.motion.size()) / scene.fps;
      scene.motion.push_back(f);
    }
  };

  for (const InteractionSpec& spec : tmpl.interactions) {
    const Scenelet& s = db[spec.scenelet].scenelet;
    std::vector<SkeletonFrame> clip;
    clip.reserve(s.frames.size());
    for (const SkeletonFrame& f : s.frames) clip.push_back(transform_frame(f, spec.placement));

    append(walk_frames(pos, clip.front()[kPelvis].head<2>(), tmpl.fps, speed_jitter(rng),
                       &phase));
    const int clip_start = static_cast<int>(scene.motion.size());
    append(clip);
    scene.clip_spans.emplace_back(clip_start, static_cast<int>(scene.motion.size()));
    pos = clip.back()[kPelvis].head<2>();

    for (const SceneObject& obj : s.objects) {
      SceneObject placed = transform_object(obj, spec.placement);
      // Compatible with an already-placed object: same real object seen by
      // two scenelets; keep one.
      bool duplicate = false;
      for (const SceneObject& existing : scene.objects) {
        if (existing.label == placed.label &&
            angle_distance(existing.placement.theta, placed.placement.theta) < 0.09 &&
            (existing.ground_centroid() - placed.ground_centroid()).norm() < 0.25) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) {
        scene.objects.push_back(std::move(placed));
        scene.interacted.push_back(true);
      }
    }
  }
  append(walk_frames(pos, tmpl.exit, tmpl.fps, speed_jitter(rng), &phase));

  for (const SceneObject& obj : tmpl.extra_objects) {
    scene.objects.push_back(obj);
    scene.interacted.push_back(false);
  }
  return scene;
}

ObservationTrack render_observations(GroundTruthScene& scene, const SynthConfig& cfg,
                                     uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> pixel_noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<PlacedCuboid> occluders;
  for (const SceneObject& obj : scene.objects) {
    for (const PlacedCuboid& pc : obj.placed()) occluders.push_back(pc);
  }

  const int n = static_cast<int>(scene.motion.size());
  ObservationTrack track;
  track.fps = scene.fps;
  track.frames.resize(n);
  scene.visibility.assign(n, {});

  for (int t = 0; t < n; ++t) {
    const SkeletonFrame& f = scene.motion[t];
    TrackFrame& out = track.frames[t];

    // Canonical local pose: pelvis-centered, forward rotated to +X.
    const double fwd = forward_angle(f);
    const Placement unrotate{0.0, 0.0, 0.0, -fwd};
    JointPositions local;
    for (int k = 0; k < kJointCount; ++k) {
      local[k] = unrotate.apply(f.joints[k] - f[kPelvis]);
    }
    out.local_pose = local;

    for (int k = 0; k < kJointCount; ++k) {
      const Vec3& q = f.joints[k];
      const auto proj = scene.camera.project(q);
      const double sd = occlusion_signed_distance(scene.camera, occluders, q);
      const bool visible = proj && sd > 0.0 && scene.camera.pixel_in_image(*proj);
      scene.visibility[t][k] = visible;

      const Vec2 noise{pixel_noise(rng), pixel_noise(rng)};
      out.joints[k].pixel = proj ? *proj + cfg.pixel_noise_sigma * noise : Vec2{-1e4, -1e4};
      const double lo = visible ? cfg.visible_confidence_min : cfg.occluded_confidence_min;
      const double hi = visible ? cfg.visible_confidence_max : cfg.occluded_confidence_max;
      out.joints[k].confidence = lo + (hi - lo) * unit(rng);
    }
  }
  scene.track = track;
  return track;
}

// -------------------------------------------------------------- evaluation

PoseError eval_pose(const std::vector<JointPositions>& result,
                    const std::vector<SkeletonFrame>& truth, const Camera& camera,
                    const std::vector<bool>& frame_mask) {
  PoseError err;
  double world_acc = 0.0, local_acc = 0.0, pixel_acc = 0.0;
  long world_n = 0, pixel_n = 0;
  const int n = static_cast<int>(std::min(result.size(), truth.size()));
  for (int t = 0; t < n; ++t) {
    if (!frame_mask.empty() && !frame_mask[t]) continue;
    ++err.frames_used;
    const Vec3 rp = result[t][kPelvis];
    const Vec3 tp = truth[t][kPelvis];
    for (Joint j : metric_joints()) {
      const Vec3& r = result[t][j];
      const Vec3& g = truth[t].joints[j];
      world_acc += (r - g).squaredNorm();
      local_acc += ((r - rp) - (g - tp)).squaredNorm();
      ++world_n;
      const auto pr = camera.project(r);
      const auto pg = camera.project(g);
      if (pr && pg) {
        pixel_acc += (*pr - *pg).squaredNorm();
        ++pixel_n;
      }
    }
  }
  if (world_n > 0) {
    err.world_rmse = std::sqrt(world_acc / world_n);
    err.local_rmse = std::sqrt(local_acc / world_n);
  }
  if (pixel_n > 0) err.pixel_rmse = std::sqrt(pixel_acc / pixel_n);
  return err;
}

std::vector<ObjectSummary> summarize_objects(const std::vector<SceneObject>& objects) {
  std::vector<ObjectSummary> out;
  out.reserve(objects.size());
  for (const SceneObject& o : objects) out.push_back({o.label, o.ground_centroid()});
  return out;
}

std::vector<ObjectSummary> summarize_objects(const std::vector<PlacedObject>& objects) {
  std::vector<ObjectSummary> out;
  out.reserve(objects.size());
  for (const PlacedObject& o : objects) out.push_back({o.label, o.ground_centroid});
  return out;
}

ObjectEval eval_objects(const std::vector<ObjectSummary>& result,
                        const std::vector<ObjectSummary>& truth) {
  ObjectEval eval;
  std::vector<bool> used_r(result.size(), false);
  std::vector<bool> used_t(truth.size(), false);

  while (true) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (size_t i = 0; i < result.size(); ++i) {
      if (used_r[i]) continue;
      for (size_t j = 0; j < truth.size(); ++j) {
        if (used_t[j] || result[i].label != truth[j].label) continue;
        const double d = (result[i].centroid - truth[j].centroid).norm();
        if (d < best) {
          best = d;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    }
    if (bi < 0) break;
    used_r[bi] = used_t[bj] = true;
    eval.match_distances.push_back(best);
    ++eval.matched_per_category[result[bi].label];
    ++eval.matched;
  }
  for (bool u : used_r) eval.unmatched_result += u ? 0 : 1;
  for (bool u : used_t) eval.unmatched_truth += u ? 0 : 1;

  if (!eval.match_distances.empty()) {
    double mean = 0.0;
    for (double d : eval.match_distances) mean += d;
    mean /= static_cast<double>(eval.match_distances.size());
    double var = 0.0;
    for (double d : eval.match_distances) var += (d - mean) * (d - mean);
    var /= static_cast<double>(eval.match_distances.size());
    eval.mean_centroid_distance = mean;
    eval.stddev_centroid_distance = std::sqrt(var);
  }
  return eval;
}

}  // namespace scenefit
