#include "scenefit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "scenefit/confidence.hpp"

namespace scenefit {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int count = std::min(threads, n);
  pool.reserve(count);
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

// ------------------------------------------------------- occlusion handling

OcclusionMask detect_occluded_frames(const ObservationTrack& track, const PipelineConfig& cfg) {
  const int n = track.size();
  OcclusionMask mask;
  mask.occluded.assign(n, false);
  mask.reliable.assign(n, {});
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < kJointCount; ++k) {
      mask.reliable[t][k] = track.frames[t].joints[k].confidence >= 0.5;
    }
  }
  if (n < 2) return mask;

  // Velocity outliers: mean joint speed per frame vs the Winsorization bound.
  std::vector<double> speed(n - 1, 0.0);
  for (int t = 1; t < n; ++t) {
    double acc = 0.0;
    for (int k = 0; k < kJointCount; ++k) {
      acc += (track.frames[t].joints[k].pixel - track.frames[t - 1].joints[k].pixel).norm();
    }
    speed[t - 1] = acc / kJointCount;
  }
  const double bound = percentile(speed, cfg.winsor_percentile);
  for (int t = 1; t < n; ++t) {
    if (speed[t - 1] > bound) mask.occluded[t] = true;
  }

  for (int t = 0; t < n; ++t) {
    if (cfg.discard_implausible_poses && track.frames[t].local_pose) {
      const JointPositions& a = *track.frames[t].local_pose;
      const double head_z = a[kHead].z();
      if (a[kKneeLeft].z() > head_z || a[kKneeRight].z() > head_z) mask.occluded[t] = true;
    }
    if (track.frames[t].mean_confidence() < cfg.min_mean_confidence) mask.occluded[t] = true;
    if (!track.frames[t].valid) mask.occluded[t] = true;
  }
  return mask;
}

namespace {

// Linear interpolation of a per-frame channel across flagged runs; leading
// and trailing runs are held constant.
template <typename T, typename Lerp>
void interpolate_runs(std::vector<T>& values, const std::vector<bool>& flagged,
                      const Lerp& lerp) {
  const int n = static_cast<int>(values.size());
  int t = 0;
  while (t < n) {
    if (!flagged[t]) {
      ++t;
      continue;
    }
    const int run_start = t;
    while (t < n && flagged[t]) ++t;
    const int run_end = t;  // one past
    const int left = run_start - 1;
    const int right = run_end < n ? run_end : -1;
    for (int i = run_start; i < run_end; ++i) {
      if (left >= 0 && right >= 0) {
        const double u = static_cast<double>(i - left) / (right - left);
        values[i] = lerp(values[left], values[right], u);
      } else if (left >= 0) {
        values[i] = values[left];
      } else if (right >= 0) {
        values[i] = values[right];
      }
    }
  }
}

}  // namespace

ObservationTrack interpolate_occluded(const ObservationTrack& track, const OcclusionMask& mask) {
  ObservationTrack out = track;
  const int n = track.size();
  if (n == 0) return out;

  // 2D joints.
  for (int k = 0; k < kJointCount; ++k) {
    std::vector<Vec2> px(n);
    for (int t = 0; t < n; ++t) px[t] = track.frames[t].joints[k].pixel;
    interpolate_runs(px, mask.occluded,
                     [](const Vec2& a, const Vec2& b, double u) { return Vec2(a + u * (b - a)); });
    for (int t = 0; t < n; ++t) out.frames[t].joints[k].pixel = px[t];
  }

  // Local poses: a frame is missing when flagged or when it has none.
  std::vector<bool> pose_flagged(n);
  for (int t = 0; t < n; ++t) pose_flagged[t] = mask.occluded[t] || !track.frames[t].local_pose;
  bool any_pose = false;
  for (int t = 0; t < n; ++t) any_pose |= !pose_flagged[t];
  if (any_pose) {
    std::vector<JointPositions> poses(n);
    for (int t = 0; t < n; ++t) {
      if (!pose_flagged[t]) poses[t] = *track.frames[t].local_pose;
    }
    interpolate_runs(poses, pose_flagged,
                     [](const JointPositions& a, const JointPositions& b, double u) {
                       JointPositions r;
                       for (int k = 0; k < kJointCount; ++k) r[k] = a[k] + u * (b[k] - a[k]);
                       return r;
                     });
    for (int t = 0; t < n; ++t) out.frames[t].local_pose = poses[t];
  }
  for (int t = 0; t < n; ++t) out.frames[t].valid = true;
  return out;
}

// ------------------------------------------------------------- static fit

namespace {

std::shared_ptr<const SceneletDatabase> empty_db() {
  static const auto db = std::make_shared<SceneletDatabase>();
  return db;
}

SceneState make_state(const std::shared_ptr<const SceneletDatabase>& db,
                      const ObservationTrack& track,
                      const std::vector<SceneObject>& fixed_objects) {
  SceneState state(db, track.size());
  std::vector<std::optional<JointPositions>> poses(track.size());
  for (int t = 0; t < track.size(); ++t) poses[t] = track.frames[t].local_pose;
  state.set_local_poses(std::move(poses));
  if (!fixed_objects.empty()) state.set_static_objects(fixed_objects);
  return state;
}

Vec3 backproject(const Camera& camera, const Vec2& px, double depth) {
  const Vec3 pc{(px.x() - camera.cx) / camera.fx * depth, (px.y() - camera.cy) / camera.fy * depth,
                depth};
  return camera.world_to_camera.inverse() * pc;
}

double frame_reprojection_cost(const TrackFrame& frame, const Camera& camera,
                               const Placement& p) {
  double acc = 0.0;
  for (int k = 0; k < kJointCount; ++k) {
    const double c = frame.joints[k].confidence;
    if (c <= 0.0) continue;
    const auto proj = camera.project(p.apply((*frame.local_pose)[k]));
    if (!proj) {
      acc += 1e8;  // behind the camera, strongly discouraged at init
      continue;
    }
    acc += c * (*proj - frame.joints[k].pixel).squaredNorm();
  }
  return acc;
}

Placement init_static_placement(const TrackFrame& frame, const Camera& camera,
                                const Placement* prev) {
  static constexpr std::array<double, 6> kDepths = {1.5, 2.0, 3.0, 4.5, 6.0, 9.0};
  Placement best;
  double best_cost = std::numeric_limits<double>::infinity();
  const Vec2 pelvis_px = frame.joints[kPelvis].pixel;
  for (double depth : kDepths) {
    const Vec3 pos = backproject(camera, pelvis_px, depth);
    for (int i = 0; i < 8; ++i) {
      const Placement p{pos.x(), pos.y(), pos.z(), wrap_angle(i * kPi / 4.0)};
      const double cost = frame_reprojection_cost(frame, camera, p);
      if (cost < best_cost) {
        best_cost = cost;
        best = p;
      }
    }
  }
  if (prev) {
    const double cost = frame_reprojection_cost(frame, camera, *prev);
    if (cost < best_cost) best = *prev;
  }
  return best;
}

Weights stage_weights(const Weights& w, bool motion, bool occlusion, bool objects) {
  Weights out = w;
  if (!motion) out.motion_isect = 0.0;
  if (!occlusion) out.occlusion = 0.0;
  if (!objects) out.object_isect = 0.0;
  return out;
}

// Objective adapter: optimize the placements listed in `frames`.
SolverResult optimize_placements(SceneState& state, const std::vector<int>& frames,
                                 const ObservationTrack& track, const Camera& camera,
                                 const Weights& weights, const EnergyOptions& opts,
                                 const SolverOptions& solver_opts) {
  Eigen::VectorXd x0(4 * frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    x0.segment<4>(4 * i) = state.placements()[frames[i]].as_vector();
  }
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    for (size_t i = 0; i < frames.size(); ++i) {
      state.set_placement(frames[i], Placement::from_vector(x.segment<4>(4 * i)));
    }
    if (!grad) return total_energy(state, track, camera, weights, opts).total;
    const EnergyGradient eg = energy_gradient(state, track, camera, weights, opts);
    grad->resize(x.size());
    for (size_t i = 0; i < frames.size(); ++i) {
      grad->segment<4>(4 * i) = eg.d_placement[frames[i]];
    }
    return eg.breakdown.total;
  };
  SolverResult res = minimize(objective, x0, solver_opts);
  for (size_t i = 0; i < frames.size(); ++i) {
    state.set_placement(frames[i], Placement::from_vector(res.x.segment<4>(4 * i)).normalized());
  }
  return res;
}

}  // namespace

StaticFitResult fit_static_skeletons(const ObservationTrack& track, const Camera& camera,
                                     const Config& cfg) {
  StaticFitResult out;
  const int n = track.size();
  SceneState state = make_state(empty_db(), track, {});
  for (int t = 0; t < n; ++t) {
    if (!track.frames[t].local_pose) {
      throw std::logic_error("static fitting needs a local pose per frame; interpolate first");
    }
    const Placement* prev = t > 0 ? &state.placements()[t - 1] : nullptr;
    state.set_placement(t, init_static_placement(track.frames[t], camera, prev));
  }

  std::vector<int> frames(n);
  std::iota(frames.begin(), frames.end(), 0);
  const Weights w = stage_weights(cfg.weights, false, false, false);
  const SolverResult res =
      optimize_placements(state, frames, track, camera, w, cfg.energy, cfg.solver);
  out.placements = state.placements();
  out.energy = res.value;
  out.converged = res.converged;
  out.diverged = res.stalled;
  return out;
}

// ------------------------------------------------------------ candidate fit

namespace {

struct FitContext {
  const ObservationTrack* track = nullptr;
  const Camera* camera = nullptr;
  std::shared_ptr<const SceneletDatabase> db;
  const Config* cfg = nullptr;
  std::vector<Placement> static_placements;
  std::vector<SceneObject> fixed_objects;
};

// Initial candidate placement: local pelvis of the clip's center frame lands
// on the static skeleton's pelvis, facing the static skeleton's forward.
Placement candidate_init(const FitContext& ctx, const Scenelet& scenelet, int anchor) {
  const Placement& stat = ctx.static_placements[anchor];
  const auto& pose = ctx.track->frames[anchor].local_pose;
  double theta = stat.theta;
  Vec3 pelvis_world = stat.translation();
  if (pose) {
    SkeletonFrame placed;
    placed.joints = *pose;
    placed = transform_frame(placed, stat);
    theta = forward_angle(placed);
    pelvis_world = stat.apply((*pose)[kPelvis]);
  }
  const Vec3 pelvis_local = scenelet.frames[scenelet.center][kPelvis];
  // Rotating the local pelvis by theta before translating:
  const Placement rot{0.0, 0.0, 0.0, theta};
  const Vec3 rotated = rot.apply(pelvis_local);
  return Placement{pelvis_world.x() - rotated.x(), pelvis_world.y() - rotated.y(),
                   pelvis_world.z() - rotated.z(), theta};
}

// Confidence-weighted RMS pixel residual over the frames a scenelet covers.
double covered_rms(const SceneState& state, const ObservationTrack& track, const Camera& camera,
                   int start, int len) {
  const std::vector<JointPositions> q = state.combined_joints();
  double acc = 0.0, wsum = 0.0;
  for (int t = start; t < start + len && t < track.size(); ++t) {
    for (int k = 0; k < kJointCount; ++k) {
      const double c = track.frames[t].joints[k].confidence;
      if (c <= 0.0) continue;
      const auto proj = camera.project(q[t][k]);
      if (!proj) continue;
      acc += c * (*proj - track.frames[t].joints[k].pixel).squaredNorm();
      wsum += c;
    }
  }
  return wsum > 0.0 ? std::sqrt(acc / wsum) : std::numeric_limits<double>::infinity();
}

// Fits one scenelet at a fixed start frame from a given initial placement.
// The optimization runs over a window of the video: the covered frames plus
// one static frame on each side for the smoothness stitch; everything
// outside contributes a placement-independent constant, except the motion
// intersection of the candidate's objects with the full static path, which
// enters as an explicit extra term. The returned candidate is ranked by the
// energy of the whole scene (static skeletons plus this one scenelet), a
// lower bound on the full fitting energy that is comparable across clip
// lengths.
Candidate fit_candidate_at(const FitContext& ctx, int scenelet_index, int start,
                           const Placement& init, bool with_motion_term) {
  const SceneletRecord& rec = ctx.db->records()[scenelet_index];
  const int len = static_cast<int>(rec.scenelet.frames.size());
  const int n = ctx.track->size();
  const int w0 = std::max(0, start - 1);
  const int w1 = std::min(n, start + len + 1);

  ObservationTrack window;
  window.fps = ctx.track->fps;
  window.frames.assign(ctx.track->frames.begin() + w0, ctx.track->frames.begin() + w1);

  SceneState state(ctx.db, w1 - w0);
  {
    std::vector<std::optional<JointPositions>> poses(w1 - w0);
    for (int t = w0; t < w1; ++t) poses[t - w0] = ctx.track->frames[t].local_pose;
    state.set_local_poses(std::move(poses));
  }
  for (int t = w0; t < w1; ++t) state.set_placement(t - w0, ctx.static_placements[t]);
  state.assign(scenelet_index, start - w0);
  state.set_placement(start - w0, init);
  if (!ctx.fixed_objects.empty()) state.set_static_objects(ctx.fixed_objects);

  // Static path outside the window, for the motion-intersection stitch.
  std::vector<GroundJoints> outside;
  if (with_motion_term) {
    for (int t = 0; t < n; ++t) {
      if (t >= w0 && t < w1) continue;
      const auto& pose = ctx.track->frames[t].local_pose;
      if (!pose) continue;
      const Placement& p = ctx.static_placements[t];
      GroundJoints g;
      g.points = {p.apply((*pose)[kPelvis]).head<2>(), p.apply((*pose)[kKneeLeft]).head<2>(),
                  p.apply((*pose)[kKneeRight]).head<2>()};
      outside.push_back(g);
    }
  }

  SolverOptions sopts = ctx.cfg->solver;
  sopts.max_iterations = ctx.cfg->pipeline.sweep_max_iterations;
  const Weights w = stage_weights(ctx.cfg->weights, with_motion_term, false, false);
  const int slot = start - w0;

  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    state.set_placement(slot, Placement::from_vector(x.head<4>()));
    double value;
    Vec4 g = Vec4::Zero();
    if (grad) {
      const EnergyGradient eg = energy_gradient(state, window, *ctx.camera, w, ctx.cfg->energy);
      value = eg.breakdown.total;
      g = eg.d_placement[slot];
    } else {
      value = total_energy(state, window, *ctx.camera, w, ctx.cfg->energy).total;
    }
    if (with_motion_term && !outside.empty()) {
      std::vector<PlacedObject> own;
      for (PlacedObject& o : state.scene_objects()) {
        if (o.owner_entry >= 0) own.push_back(std::move(o));
      }
      value += w.motion_isect *
               motion_isect_fixed_frames(outside, own, state.placements()[slot],
                                         ctx.cfg->energy, w.motion_isect, grad ? &g : nullptr);
    }
    if (grad) {
      grad->resize(4);
      *grad = g;
    }
    return value;
  };
  const SolverResult res =
      minimize(objective, state.placements()[slot].as_vector(), sopts);
  state.set_placement(slot, Placement::from_vector(res.x).normalized());

  Candidate cand;
  cand.scenelet = scenelet_index;
  cand.start = start;
  cand.placement = state.placements()[slot];
  cand.reprojection_rms = covered_rms(state, window, *ctx.camera, slot, len);
  cand.charness = rec.charness.scenelet_charness;
  cand.score = cand.charness * std::exp(-cand.reprojection_rms /
                                        ctx.cfg->pipeline.fit_quality_scale_px);

  // Rank by the energy of the whole scene (static skeletons plus this one
  // fitted scenelet): a lower bound on the full fitting energy, and the only
  // comparison that is fair across clips of different lengths.
  SceneState full = make_state(ctx.db, *ctx.track, ctx.fixed_objects);
  full.placements() = ctx.static_placements;
  full.assign(scenelet_index, start);
  full.set_placement(start, cand.placement);
  cand.partial_energy =
      total_energy(full, *ctx.track, *ctx.camera, w, ctx.cfg->energy).total;
  return cand;
}

// Sweep-stage fit: the clip's center frame lands on `anchor` and the
// placement starts from the static skeleton there. Returns nothing when the
// clip does not fit into the video.
std::optional<Candidate> fit_candidate(const FitContext& ctx, int scenelet_index, int anchor,
                                       bool with_motion_term) {
  const SceneletRecord& rec = ctx.db->records()[scenelet_index];
  const int len = static_cast<int>(rec.scenelet.frames.size());
  const int n = ctx.track->size();
  if (len > n) return std::nullopt;
  const int start = std::clamp(anchor - rec.scenelet.center, 0, n - len);
  return fit_candidate_at(ctx, scenelet_index, start,
                          candidate_init(ctx, rec.scenelet, anchor), with_motion_term);
}

void sort_candidates(std::vector<Candidate>& cands) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.partial_energy != b.partial_energy) return a.partial_energy < b.partial_energy;
    if (a.scenelet != b.scenelet) return a.scenelet < b.scenelet;
    return a.start < b.start;
  });
}

SweepResult charness_sweep_impl(const FitContext& ctx) {
  SweepResult out;
  const int n = ctx.track->size();
  const int stride = std::max(1, ctx.cfg->pipeline.frame_stride);
  for (int t = 0; t < n; t += stride) out.anchors.push_back(t);

  const int n_scenelets = static_cast<int>(ctx.db->size());
  const int jobs = static_cast<int>(out.anchors.size()) * n_scenelets;
  std::vector<std::optional<Candidate>> slots(jobs);
  parallel_for(jobs, ctx.cfg->threads, [&](int job) {
    const int anchor = out.anchors[job / n_scenelets];
    const int scenelet = job % n_scenelets;
    slots[job] = fit_candidate(ctx, scenelet, anchor, /*with_motion_term=*/false);
  });

  out.per_anchor.resize(out.anchors.size());
  out.scores.assign(out.anchors.size(), 0.0);
  for (size_t a = 0; a < out.anchors.size(); ++a) {
    CandidateSet& set = out.per_anchor[a];
    set.anchor = out.anchors[a];
    for (int s = 0; s < n_scenelets; ++s) {
      const auto& slot = slots[a * n_scenelets + s];
      if (slot) set.candidates.push_back(*slot);
    }
    sort_candidates(set.candidates);
    for (const Candidate& c : set.candidates) set.score = std::max(set.score, c.score);
    out.scores[a] = set.score;
  }
  return out;
}

}  // namespace

SweepResult charness_sweep(const ObservationTrack& track, const Camera& camera,
                           const std::shared_ptr<const SceneletDatabase>& db,
                           const std::vector<Placement>& static_placements, const Config& cfg) {
  if (db->empty()) throw std::invalid_argument("scenelet database is empty");
  FitContext ctx{&track, &camera, db, &cfg, static_placements, {}};
  return charness_sweep_impl(ctx);
}

std::vector<CandidateSet> charness_nms(const SweepResult& sweep, const OcclusionMask& mask,
                                       const PipelineConfig& cfg) {
  const int n_anchors = static_cast<int>(sweep.anchors.size());
  std::vector<int> picked;

  for (int i = 0; i < n_anchors; ++i) {
    if (sweep.scores[i] < cfg.min_charness) continue;
    bool is_max = true;
    for (int j = 0; j < n_anchors && is_max; ++j) {
      if (j == i) continue;
      if (std::abs(sweep.anchors[j] - sweep.anchors[i]) * 2 > cfg.nms_window_frames) continue;
      if (sweep.scores[j] > sweep.scores[i] ||
          (sweep.scores[j] == sweep.scores[i] && j < i)) {
        is_max = false;
      }
    }
    if (is_max) picked.push_back(i);
  }

  // Anchors for occluded runs (frames without reliable static skeletons).
  // Short flagged blips are interpolation fodder, not occlusion gaps.
  const int n_frames = static_cast<int>(mask.occluded.size());
  int t = 0;
  while (t < n_frames) {
    if (!mask.occluded[t]) {
      ++t;
      continue;
    }
    const int run_start = t;
    while (t < n_frames && mask.occluded[t]) ++t;
    if (t - run_start < cfg.min_occluded_run_frames) continue;
    const int center = (run_start + t - 1) / 2;
    int nearest = 0;
    for (int i = 1; i < n_anchors; ++i) {
      if (std::abs(sweep.anchors[i] - center) < std::abs(sweep.anchors[nearest] - center)) {
        nearest = i;
      }
    }
    if (std::find(picked.begin(), picked.end(), nearest) == picked.end()) {
      picked.push_back(nearest);
    }
  }

  // Highest scores first, then greedily enforce the suppression window so
  // close anchors never produce overlapping candidate sets.
  std::sort(picked.begin(), picked.end(), [&](int a, int b) {
    if (sweep.scores[a] != sweep.scores[b]) return sweep.scores[a] > sweep.scores[b];
    return a < b;
  });
  std::vector<int> kept;
  for (int i : picked) {
    bool clear = true;
    for (int j : kept) {
      if (std::abs(sweep.anchors[i] - sweep.anchors[j]) < cfg.nms_window_frames) clear = false;
    }
    if (clear) kept.push_back(i);
    if (static_cast<int>(kept.size()) >= cfg.max_maxima) break;
  }
  std::sort(kept.begin(), kept.end());

  std::vector<CandidateSet> out;
  for (int i : kept) out.push_back(sweep.per_anchor[i]);
  return out;
}

CandidateSet prune_stage1(CandidateSet set, int keep) {
  sort_candidates(set.candidates);
  if (static_cast<int>(set.candidates.size()) > keep) set.candidates.resize(keep);
  return set;
}

namespace {

CandidateSet prune_stage2_impl(const FitContext& ctx, CandidateSet set) {
  const int jobs = static_cast<int>(set.candidates.size());
  std::vector<Candidate> refined(jobs);
  parallel_for(jobs, ctx.cfg->threads, [&](int i) {
    const Candidate& c = set.candidates[i];
    const int len =
        static_cast<int>(ctx.db->records()[c.scenelet].scenelet.frames.size());
    const int n = ctx.track->size();
    // Re-optimize with the motion-intersection term, searching a few start
    // frames around the strided alignment; warm-started from stage 1.
    Candidate next = c;
    next.partial_energy = std::numeric_limits<double>::infinity();
    const int radius = ctx.cfg->pipeline.stage2_start_search;
    for (int d = -radius; d <= radius; ++d) {
      const int start = std::clamp(c.start + d, 0, n - len);
      const Candidate trial =
          fit_candidate_at(ctx, c.scenelet, start, c.placement, /*with_motion_term=*/true);
      if (trial.partial_energy < next.partial_energy) next = trial;
    }
    // Occlusion term evaluated once on the fitted candidate.
    SceneState state = make_state(ctx.db, *ctx.track, ctx.fixed_objects);
    state.placements() = ctx.static_placements;
    state.assign(next.scenelet, next.start);
    state.set_placement(next.start, next.placement);
    next.partial_energy += ctx.cfg->weights.occlusion *
                           occlusion_term(state, *ctx.track, *ctx.camera, ctx.cfg->energy);
    refined[i] = next;
  });
  set.candidates = std::move(refined);
  sort_candidates(set.candidates);
  if (static_cast<int>(set.candidates.size()) > ctx.cfg->pipeline.stage2_keep) {
    set.candidates.resize(ctx.cfg->pipeline.stage2_keep);
  }
  return set;
}

struct Combination {
  std::vector<int> choice;  // candidate index per set
  double prior = 0.0;       // sum of stage-2 energies, for the beam fallback
};

std::vector<RefineResult> refine_impl(const FitContext& ctx,
                                      const std::vector<CandidateSet>& sets, int top_diverse) {
  std::vector<RefineResult> results;
  const int n_sets = static_cast<int>(sets.size());
  // Every maximum also offers a "no scenelet" choice so overlapping or
  // ill-fitting candidates are never forced into the scene; candidates come
  // first, so exact energy ties resolve toward placing the scenelet.
  const auto options_of = [&](const CandidateSet& s) {
    const int cands = static_cast<int>(s.candidates.size());
    return std::max(1, cands + (ctx.cfg->pipeline.allow_no_candidate && cands > 0 ? 1 : 0));
  };
  const auto is_none = [&](int set_index, int choice) {
    return choice >= static_cast<int>(sets[set_index].candidates.size());
  };

  // Enumerate combinations (cartesian product, lexicographic order).
  std::vector<Combination> combos;
  bool beam = false;
  {
    std::vector<int> choice(n_sets, 0);
    const std::function<void(int)> rec = [&](int depth) {
      if (depth == n_sets) {
        Combination c;
        c.choice = choice;
        for (int i = 0; i < n_sets; ++i) {
          if (!is_none(i, choice[i])) {
            c.prior += sets[i].candidates[choice[i]].partial_energy;
          }
        }
        combos.push_back(std::move(c));
        return;
      }
      for (int i = 0; i < options_of(sets[depth]); ++i) {
        choice[depth] = i;
        rec(depth + 1);
      }
    };
    rec(0);
  }
  if (static_cast<long long>(combos.size()) > ctx.cfg->pipeline.max_combinations) {
    beam = true;
    std::stable_sort(combos.begin(), combos.end(),
                     [](const Combination& a, const Combination& b) { return a.prior < b.prior; });
    combos.resize(ctx.cfg->pipeline.beam_width);
  }

  struct Outcome {
    bool valid = false;
    SceneState state{empty_db(), 0};
    EnergyBreakdown energy;
  };
  std::vector<Outcome> outcomes(combos.size());
  int skipped = 0;

  SolverOptions sopts = ctx.cfg->solver;
  sopts.max_iterations = ctx.cfg->pipeline.refine_max_iterations;

  parallel_for(static_cast<int>(combos.size()), ctx.cfg->threads, [&](int ci) {
    SceneState state = make_state(ctx.db, *ctx.track, ctx.fixed_objects);
    state.placements() = ctx.static_placements;
    bool ok = true;
    for (int si = 0; si < n_sets && ok; ++si) {
      if (sets[si].candidates.empty() || is_none(si, combos[ci].choice[si])) continue;
      const Candidate& cand = sets[si].candidates[combos[ci].choice[si]];
      try {
        state.assign(cand.scenelet, cand.start);
        state.set_placement(cand.start, cand.placement);
      } catch (const std::invalid_argument&) {
        ok = false;  // overlapping spans; combination infeasible
      }
    }
    if (!ok) return;

    std::vector<int> frames;
    const std::vector<bool> active = state.active_placements();
    for (int t = 0; t < state.frames(); ++t) {
      if (active[t]) frames.push_back(t);
    }
    optimize_placements(state, frames, *ctx.track, *ctx.camera, ctx.cfg->weights,
                        ctx.cfg->energy, sopts);
    outcomes[ci].energy =
        total_energy(state, *ctx.track, *ctx.camera, ctx.cfg->weights, ctx.cfg->energy);
    outcomes[ci].state = std::move(state);
    outcomes[ci].valid = true;
  });

  std::vector<int> order;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].valid) order.push_back(static_cast<int>(i));
    else ++skipped;
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return outcomes[a].energy.total < outcomes[b].energy.total;  // ties: lower index
  });

  const auto combo_entries = [&](int ci) {
    std::vector<std::pair<int, int>> entries;
    for (int si = 0; si < n_sets; ++si) {
      if (sets[si].candidates.empty() || is_none(si, combos[ci].choice[si])) continue;
      const Candidate& c = sets[si].candidates[combos[ci].choice[si]];
      entries.emplace_back(c.scenelet, c.start);
    }
    return entries;
  };
  const auto diverse_from = [&](int ci, const std::vector<int>& chosen) {
    const auto mine = combo_entries(ci);
    for (int prev : chosen) {
      const auto theirs = combo_entries(prev);
      bool differs = false;
      for (const auto& [sid, start] : mine) {
        bool far_from_all = true;
        for (const auto& [sid2, start2] : theirs) {
          if (sid2 == sid &&
              std::abs(start - start2) <= ctx.cfg->pipeline.diversity_window_frames) {
            far_from_all = false;
            break;
          }
        }
        if (far_from_all) {
          differs = true;
          break;
        }
      }
      if (!differs) return false;
    }
    return true;
  };

  std::vector<int> chosen;
  for (int idx : order) {
    if (static_cast<int>(chosen.size()) >= std::max(1, top_diverse)) break;
    if (chosen.empty() || diverse_from(idx, chosen)) chosen.push_back(idx);
  }

  for (int idx : chosen) {
    RefineResult r{std::move(outcomes[idx].state), outcomes[idx].energy, idx,
                   static_cast<int>(order.size()), skipped, beam};
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace

CandidateSet prune_stage2(CandidateSet set, const ObservationTrack& track, const Camera& camera,
                          const std::shared_ptr<const SceneletDatabase>& db,
                          const std::vector<Placement>& static_placements, const Config& cfg) {
  FitContext ctx{&track, &camera, db, &cfg, static_placements, {}};
  return prune_stage2_impl(ctx, std::move(set));
}

std::vector<RefineResult> refine_combinations(
    const std::vector<CandidateSet>& sets, const ObservationTrack& track, const Camera& camera,
    const std::shared_ptr<const SceneletDatabase>& db,
    const std::vector<Placement>& static_placements, const Config& cfg, int top_diverse) {
  FitContext ctx{&track, &camera, db, &cfg, static_placements, {}};
  return refine_impl(ctx, sets, top_diverse);
}

// ----------------------------------------------------------- object select

namespace {

bool footprints_overlap(const PlacedObject& a, const PlacedObject& b) {
  for (const GroundPolygon& pa : a.footprint) {
    for (const GroundPolygon& pb : b.footprint) {
      if (convex_intersection_area(pa, pb) > 1e-9) return true;
    }
  }
  return false;
}

}  // namespace

void object_selection(SceneState& state, const ObservationTrack& track, const Camera& camera,
                      const Config& cfg) {
  state.clear_object_filter();
  const std::vector<PlacedObject> all = state.scene_objects();
  std::vector<int> keep(all.size());
  std::iota(keep.begin(), keep.end(), 0);

  const auto energy_with = [&](const std::vector<int>& subset) {
    state.set_object_filter(subset);
    const double e = total_energy(state, track, camera, cfg.weights, cfg.energy).total;
    return e;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < keep.size() && !changed; ++i) {
      for (size_t j = i + 1; j < keep.size() && !changed; ++j) {
        const PlacedObject& a = all[keep[i]];
        const PlacedObject& b = all[keep[j]];
        if (!objects_compatible(a, b, cfg.energy.compat_angle_tol)) continue;
        if (!footprints_overlap(a, b)) continue;
        std::vector<int> without_a, without_b;
        for (size_t k = 0; k < keep.size(); ++k) {
          if (k != i) without_a.push_back(keep[k]);
          if (k != j) without_b.push_back(keep[k]);
        }
        // Keep the lower-energy scene; ties drop the later object.
        keep = energy_with(without_a) < energy_with(without_b) ? without_a : without_b;
        changed = true;
      }
    }
  }
  state.set_object_filter(keep);
}

// -------------------------------------------------------------- full runs

namespace {

PipelineResult fit_track_impl(const ObservationTrack& track, const Camera& camera,
                              const std::shared_ptr<const SceneletDatabase>& db,
                              const Config& cfg, const FitOptions& opts,
                              const std::vector<SceneObject>& fixed_objects) {
  PipelineResult out;
  out.mask = detect_occluded_frames(track, cfg.pipeline);
  out.processed_track = interpolate_occluded(track, out.mask);
  out.static_fit = fit_static_skeletons(out.processed_track, camera, cfg);

  // Candidate fitting and refinement observe the original detections (the
  // interpolated 2D exists for static initialization only) while keeping the
  // interpolated local poses so every frame has one.
  ObservationTrack fit_obs = out.processed_track;
  for (int t = 0; t < track.size(); ++t) fit_obs.frames[t].joints = track.frames[t].joints;
  FitContext ctx{&fit_obs, &camera, db, &cfg, out.static_fit.placements, fixed_objects};

  SceneState static_state = make_state(db, fit_obs, fixed_objects);
  static_state.placements() = out.static_fit.placements;

  if (!opts.enable_scenelets || db->empty()) {
    out.state = std::move(static_state);
    out.final_energy = total_energy(out.state, fit_obs, camera, cfg.weights, cfg.energy);
    return out;
  }

  const SweepResult sweep = charness_sweep_impl(ctx);
  std::vector<CandidateSet> maxima = charness_nms(sweep, out.mask, cfg.pipeline);
  for (CandidateSet& set : maxima) {
    set = prune_stage1(std::move(set), cfg.pipeline.stage1_keep);
    set = prune_stage2_impl(ctx, std::move(set));
  }
  std::erase_if(maxima, [](const CandidateSet& s) { return s.candidates.empty(); });
  out.maxima = maxima;

  if (maxima.empty()) {
    out.state = std::move(static_state);
    out.final_energy = total_energy(out.state, fit_obs, camera, cfg.weights, cfg.energy);
    return out;
  }

  std::vector<RefineResult> refined = refine_impl(ctx, maxima, opts.top_diverse);
  if (refined.empty()) {
    out.state = std::move(static_state);
    out.final_energy = total_energy(out.state, fit_obs, camera, cfg.weights, cfg.energy);
    return out;
  }

  out.combinations_evaluated = refined.front().combinations_evaluated;
  out.beam_fallback = refined.front().beam_fallback;
  out.state = std::move(refined.front().state);
  for (size_t i = 1; i < refined.size(); ++i) out.alternatives.push_back(std::move(refined[i]));

  object_selection(out.state, fit_obs, camera, cfg);
  out.final_energy = total_energy(out.state, fit_obs, camera, cfg.weights, cfg.energy);
  return out;
}

}  // namespace

PipelineResult fit_track(const ObservationTrack& track, const Camera& camera,
                         const std::shared_ptr<const SceneletDatabase>& db, const Config& cfg,
                         const FitOptions& opts) {
  return fit_track_impl(track, camera, db, cfg, opts, {});
}

std::vector<PipelineResult> fit_actors(const std::vector<ObservationTrack>& tracks,
                                       const Camera& camera,
                                       const std::shared_ptr<const SceneletDatabase>& db,
                                       const Config& cfg, const FitOptions& opts) {
  std::vector<PipelineResult> results;
  std::vector<SceneObject> accumulated;
  for (const ObservationTrack& track : tracks) {
    results.push_back(fit_track_impl(track, camera, db, cfg, opts, accumulated));
    for (const PlacedObject& po : results.back().state.scene_objects()) {
      SceneObject obj;
      obj.label = po.label;
      for (const PlacedCuboid& pc : po.cuboids) {
        obj.cuboids.push_back(Cuboid{pc.center, pc.half_extents, pc.yaw});
      }
      accumulated.push_back(std::move(obj));
    }
  }
  return results;
}

}  // namespace scenefit
