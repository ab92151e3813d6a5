// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "helpers.hpp"
#include "scenefit/confidence.hpp"
#include "scenefit/io.hpp"
#include "scenefit/pipeline.hpp"
#include "scenefit/synthetic.hpp"
#include "scenefit/tracker.hpp"

using namespace scenefit;
using namespace scenefit::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- fixtures

Scenelet fixture_scenelet(bool with_objects, int variant) {
  Scenelet s;
  for (int i = 0; i < 5 + variant % 3; ++i) {
    SkeletonFrame f = standing_frame({0.09 * i, 0.01 * variant}, 0.1 * variant);
    s.frames.push_back(f);
  }
  s.center = static_cast<int>(s.frames.size()) / 2;
  s.id = "fix/" + std::to_string(variant);
  s.source_scene = "fix";
  if (with_objects) {
    s.objects = {make_box_object("chair", Placement{0.45, 0.1 * variant, 0.0, 0.2 * variant},
                                 {0.25, 0.25, 0.35}),
                 make_box_object("table", Placement{0.1, 0.9, 0.0, 0.1 * variant},
                                 {0.5, 0.35, 0.36 + 0.01 * variant})};
  }
  return canonicalize(s);
}

std::shared_ptr<const SceneletDatabase> gradient_db() {
  auto db = std::make_shared<SceneletDatabase>();
  db->add(fixture_scenelet(true, 0));
  db->add(fixture_scenelet(true, 1));
  db->finalize();
  return db;
}

std::vector<std::optional<JointPositions>> standing_poses(int n) {
  std::vector<std::optional<JointPositions>> poses(n);
  for (int t = 0; t < n; ++t) {
    const SkeletonFrame f = standing_frame({0, 0}, 0.0);
    JointPositions local;
    for (int k = 0; k < kJointCount; ++k) local[k] = f.joints[k] - f[kPelvis];
    poses[t] = local;
  }
  return poses;
}

// The shared synthetic world used by criteria 6, 7, and 9.
struct SyntheticWorld {
  std::shared_ptr<SceneletDatabase> db;
  std::vector<int> sit_records;    // interaction scenelets with objects
  Camera camera = lookat_camera({-5.0, 0.0, 1.7}, {0.0, 0.3, 1.0});

  SyntheticWorld() {
    std::vector<Recording> recordings;
    {
      RecordingTemplate t;
      t.name = "roomA";
      t.fps = 10.0;
      t.start = {-2.5, -0.5};
      t.objects = {make_box_object("chair", Placement{1.0, 0.2, 0.0, kPi}, {0.25, 0.25, 0.22}),
                   make_box_object("table", Placement{1.1, 1.3, 0.0, 0.0}, {0.55, 0.35, 0.36})};
      t.actions = {SitAt{0, 1.6}, WalkTo{{-2.0, 1.2}}};
      recordings.push_back(make_recording(t, 101));
    }
    {
      RecordingTemplate t;
      t.name = "roomB";
      t.fps = 10.0;
      t.start = {2.0, -1.5};
      t.objects = {make_box_object("couch", Placement{-0.6, 0.8, 0.0, -kPi / 2},
                                   {0.8, 0.4, 0.24}),
                   make_box_object("shelf", Placement{1.4, 1.2, 0.0, kPi}, {0.5, 0.22, 0.9})};
      t.actions = {SitAt{0, 1.8}, ReachAt{1, 1.2}, WalkTo{{2.0, 1.2}}};
      recordings.push_back(make_recording(t, 102));
    }
    {
      RecordingTemplate t;
      t.name = "walks";
      t.fps = 10.0;
      t.start = {-2.0, -2.0};
      t.actions = {WalkTo{{2.0, -1.6}}, WalkTo{{1.4, 1.6}}, WalkTo{{-2.0, 1.4}}};
      recordings.push_back(make_recording(t, 103));
    }
    DatabaseParams params;
    params.charness_sigma = 0.15;   // matched to this corpus' descriptor scale
    params.extraction.spacing = 0.4;  // lands near the 50-scenelet target
    db = std::make_shared<SceneletDatabase>(build_database(recordings, params));
    for (size_t i = 0; i < db->size(); ++i) {
      const auto& rec = (*db)[i];
      if (!rec.scenelet.objects.empty() && rec.charness.scenelet_charness > 0.5) {
        sit_records.push_back(static_cast<int>(i));
      }
    }
  }

  Config config() const {
    Config cfg;
    cfg.threads = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    cfg.database.charness_sigma = 0.15;
    return cfg;
  }
};

SyntheticWorld& world() {
  static SyntheticWorld w;
  return w;
}

// ----------------------------------------------------------- criterion 1

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  auto db = gradient_db();
  std::mt19937_64 rng(1001);
  const Weights w;
  const EnergyOptions opts;
  const Camera cam = lookat_camera({-6.0, 0.0, 1.65}, {0.0, 0.0, 1.0});

  int tested = 0, attempts = 0;
  double worst = 0.0;
  const int len0 = static_cast<int>(db->records()[0].scenelet.frames.size());
  const int len1 = static_cast<int>(db->records()[1].scenelet.frames.size());
  const int n = len0 + len1 + 4;
  while (tested < 100 && attempts < 1200) {
    ++attempts;
    SceneState state(db, n);
    state.set_local_poses(standing_poses(n));
    state.assign(0, 1);
    state.assign(1, len0 + 2);
    for (int t = 0; t < n; ++t) state.set_placement(t, random_placement(rng, 1.2));

    SceneState obs = state;
    for (int t = 0; t < n; ++t) {
      Placement p = state.placements()[t];
      p.x += uniform(rng, -0.2, 0.2);
      p.y += uniform(rng, -0.2, 0.2);
      obs.set_placement(t, p);
    }
    ObservationTrack track;
    track.fps = 10.0;
    track.frames.resize(n);
    const auto q = obs.combined_joints();
    for (int t = 0; t < n; ++t) {
      for (int k = 0; k < kJointCount; ++k) {
        track.frames[t].joints[k].pixel = cam.project(q[t][k]).value_or(Vec2{0, 0});
        track.frames[t].joints[k].confidence = (t + k) % 3 == 0 ? 0.2 : 0.9;
      }
      track.frames[t].local_pose = state.local_poses()[t];
    }

    const EnergyGradient eg = energy_gradient(state, track, cam, w, opts);
    if (eg.breakdown.boundary_margin < 1e-3) continue;

    const std::vector<bool> active = state.active_placements();
    const double h = 1e-5;
    bool ok = true;
    double state_worst = 0.0;
    for (int t = 0; t < n && ok; ++t) {
      if (!active[t]) continue;
      for (int param = 0; param < 4; ++param) {
        SceneState plus = state, minus = state;
        Vec4 vp = state.placements()[t].as_vector();
        Vec4 vm = vp;
        vp[param] += h;
        vm[param] -= h;
        plus.set_placement(t, Placement::from_vector(vp));
        minus.set_placement(t, Placement::from_vector(vm));
        const EnergyBreakdown ep = total_energy(plus, track, cam, w, opts);
        const EnergyBreakdown em = total_energy(minus, track, cam, w, opts);
        if (ep.boundary_margin < 1e-4 || em.boundary_margin < 1e-4) {
          ok = false;
          break;
        }
        const double fd = (ep.total - em.total) / (2.0 * h);
        const double an = eg.d_placement[t][param];
        state_worst = std::max(
            state_worst, std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}));
      }
    }
    if (!ok) continue;
    ++tested;
    worst = std::max(worst, state_worst);
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d states, max relative error %.3g, %.1f s", tested, worst,
                seconds_since(t0));
  return {tested >= 100 && worst < 1e-4 && seconds_since(t0) < 120.0, buf};
}

// ----------------------------------------------------------- criterion 2

Outcome criterion_occlusion_asymmetry() {
  int checked = 0;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double v = -1.0 + 2.0 * i / 100.0;
      const double c = static_cast<double>(j) / 100.0;
      const double f = asymmetric_occlusion_cost(v, c);
      if (c >= 0.5 || v <= 0.0) {
        if (f != 0.0) return {false, "nonzero cost in the zero branch"};
      } else {
        const double expected = (c - 0.5) * (c - 0.5) * v * v;
        if (f != expected) return {false, "penalized branch mismatch"};
      }
      ++checked;
    }
  }
  if (asymmetric_occlusion_cost(1.0, 0.0) != 0.25) return {false, "F(1, 0) != 0.25"};
  return {true, "10201 grid points exact, F(1,0) = 0.25"};
}

// ----------------------------------------------------------- criterion 3

Outcome criterion_speed_invariance() {
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    // A random dense clip: walk, sit, or reach.
    std::vector<SkeletonFrame> clip;
    const int kind = trial % 3;
    if (kind == 0) {
      double phase = uniform(rng, 0, 2 * kPi);
      clip = walk_frames({uniform(rng, -2, 0), uniform(rng, -1, 1)},
                         {uniform(rng, 1, 3), uniform(rng, -1, 1)}, 60.0, 1.0, &phase);
    } else if (kind == 1) {
      clip = sit_cycle_frames(Placement{uniform(rng, -1, 1), uniform(rng, -1, 1), 0.0,
                                        uniform(rng, -kPi, kPi)},
                              0.5, 60.0, 1.0);
    } else {
      clip = reach_cycle_frames(Placement{uniform(rng, -1, 1), uniform(rng, -1, 1), 0.0,
                                          uniform(rng, -kPi, kPi)},
                                60.0, 1.0);
    }
    if (clip.size() < 20) continue;

    // A random monotone time warp sampling the same path.
    const int m = 40 + static_cast<int>(rng() % 40);
    std::vector<double> warp(m);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      acc += std::exp(uniform(rng, -1.0, 1.0));
      warp[i] = acc;
    }
    std::vector<SkeletonFrame> warped(m);
    for (int i = 0; i < m; ++i) {
      const double u = (warp[i] - warp.front()) / (warp.back() - warp.front()) *
                       (static_cast<double>(clip.size()) - 1.0);
      const int lo = std::min(static_cast<int>(u), static_cast<int>(clip.size()) - 2);
      const double frac = u - lo;
      for (int k = 0; k < kJointCount; ++k) {
        warped[i].joints[k] =
            (1.0 - frac) * clip[lo].joints[k] + frac * clip[lo + 1].joints[k];
      }
    }

    const MotionDescriptor a = motion_descriptor(clip);
    const MotionDescriptor b = motion_descriptor(warped);
    const double rel = (a.samples - b.samples).norm() / std::max(1e-12, a.samples.norm());
    worst = std::max(worst, rel);
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "50 clips, worst relative L2 %.4f", worst);
  return {worst < 0.02, buf};
}

// ----------------------------------------------------------- criterion 4

Outcome criterion_charness_oracle() {
  std::mt19937_64 rng(4004);
  double worst = 0.0;

  for (int db_trial = 0; db_trial < 8; ++db_trial) {
    const int count = 5 + static_cast<int>(rng() % 16);
    SceneletDatabase db;
    for (int i = 0; i < count; ++i) {
      Scenelet s;
      for (int f = 0; f < 6; ++f) {
        SkeletonFrame frame = standing_frame(
            {0.1 * f + uniform(rng, -0.03, 0.03), uniform(rng, -0.4, 0.4)}, 0.0);
        for (Vec3& j : frame.joints) {
          j += Vec3{uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05),
                    uniform(rng, -0.05, 0.05)};
        }
        s.frames.push_back(frame);
      }
      s.center = 3;
      s.id = "r" + std::to_string(i);
      s.source_scene = (i % 2 == 0) ? "a" : "b";
      s.local_frame.world_from_local =
          Placement{uniform(rng, -3, 3), uniform(rng, -3, 3), 0.0, 0.0};
      if (i % 2 == 0) {
        s.objects.push_back(make_box_object(
            "chair", Placement{uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), 0, 0},
            {0.25, 0.25, 0.3}));
      }
      db.add(std::move(s));
    }
    db.finalize();

    const double sigma = db.params().charness_sigma;
    for (size_t l = 0; l < db.size(); ++l) {
      for (const std::string& cat : db.params().categories) {
        for (int j = 0; j < 25; ++j) {
          double num = 0.0, den = 0.0;
          for (size_t k = 0; k < db.size(); ++k) {
            const double d = descriptor_distance(db[k].motion, db[l].motion);
            const double g = std::exp(-d * d / (2.0 * sigma * sigma));
            const double wk = g / db[k].charness.density;
            const auto it = db[k].objects.histograms.find(cat);
            num += wk * (it == db[k].objects.histograms.end() ? 0.0 : it->second[j]);
            den += wk;
          }
          const double expected = num / den;
          const auto it = db[l].charness.bins.find(cat);
          const double got = it == db[l].charness.bins.end() ? 0.0 : it->second[j];
          worst = std::max(worst, std::abs(got - expected));
        }
      }
    }
  }

  // Single-scenelet database: h equals the raw histogram exactly.
  SceneletDatabase single;
  single.add(fixture_scenelet(true, 2));
  single.finalize();
  double single_worst = 0.0;
  for (const auto& [cat, bins] : single[0].objects.histograms) {
    for (int j = 0; j < 25; ++j) {
      single_worst =
          std::max(single_worst, std::abs(bins[j] - single[0].charness.bins.at(cat)[j]));
    }
  }

  char buf[120];
  std::snprintf(buf, sizeof(buf), "oracle gap %.2g, single-db gap %.2g", worst, single_worst);
  return {worst < 1e-9 && single_worst < 1e-12, buf};
}

// ----------------------------------------------------------- criterion 5

double tracker_brute_force(const DetectionSequence& seq, int n_actors, double w_pw) {
  const int n = static_cast<int>(seq.frames.size());
  std::vector<std::vector<std::vector<int>>> per_frame(n);
  for (int t = 0; t < n; ++t) {
    const int n_skel = static_cast<int>(seq.frames[t].skeletons.size());
    std::vector<int> cur(n_actors, kDummySkeleton);
    std::vector<bool> used(n_skel, false);
    const std::function<void(int)> rec = [&](int actor) {
      if (actor == n_actors) {
        for (int s = 0; s < n_skel; ++s) {
          if (!used[s]) return;
        }
        per_frame[t].push_back(cur);
        return;
      }
      cur[actor] = kDummySkeleton;
      rec(actor + 1);
      for (int s = 0; s < n_skel; ++s) {
        if (used[s]) continue;
        used[s] = true;
        cur[actor] = s;
        rec(actor + 1);
        used[s] = false;
      }
      cur[actor] = kDummySkeleton;
    };
    rec(0);
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> lab(n);
  const std::function<void(int)> sweep = [&](int t) {
    if (t == n) {
      ActorAssignment a;
      a.assignment = lab;
      best = std::min(best, tracking_objective(seq, a, TrackingParams{w_pw}));
      return;
    }
    for (const auto& state : per_frame[t]) {
      lab[t] = state;
      sweep(t + 1);
    }
  };
  sweep(0);
  return best;
}

Outcome criterion_mrf_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5005);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n_frames = 2 + static_cast<int>(rng() % 3);
    const int n_actors = 1 + static_cast<int>(rng() % 2);
    DetectionSequence seq;
    seq.image_half_diagonal = 500.0;
    seq.frames.resize(n_frames);
    for (int t = 0; t < n_frames; ++t) {
      const int max_skel = std::min(3, n_actors);
      const int n_skel = static_cast<int>(rng() % (max_skel + 1));
      for (int s = 0; s < n_skel; ++s) {
        DetectedSkeleton d;
        for (int k = 0; k < kJointCount; ++k) {
          d.joints[k].pixel = Vec2{uniform(rng, 0, 500), uniform(rng, 0, 500)};
          d.joints[k].confidence = uniform(rng, 0.05, 1.0);
        }
        seq.frames[t].skeletons.push_back(d);
      }
    }
    const auto solved = solve_tracking(seq, n_actors);
    const auto* res = std::get_if<ActorAssignment>(&solved);
    if (res == nullptr) return {false, "unexpected infeasibility"};
    const double brute = tracker_brute_force(seq, n_actors, 1e3);
    worst_gap = std::max(worst_gap, std::abs(res->objective - brute));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "200 instances, objective gap %.2g, %.1f s", worst_gap,
                seconds_since(t0));
  return {worst_gap < 1e-9 && seconds_since(t0) < 60.0, buf};
}

// ----------------------------------------------------------- criterion 6

SceneTemplate seeded_template(const SyntheticWorld& w, uint64_t seed,
                              int* interactions_out = nullptr) {
  std::mt19937_64 rng(seed);
  SceneTemplate tmpl;
  tmpl.camera = w.camera;
  tmpl.fps = 10.0;
  tmpl.entry = {-2.2, -1.4};
  tmpl.exit = {-2.2, 1.5};
  const int n_inter = 1 + static_cast<int>(rng() % 2);
  const std::array<Vec2, 2> spots = {Vec2{0.8, -0.4}, Vec2{0.3, 1.1}};
  for (int i = 0; i < n_inter; ++i) {
    const int pick = static_cast<int>(rng() % w.sit_records.size());
    Placement p{spots[i].x() + uniform(rng, -0.25, 0.25), spots[i].y() + uniform(rng, -0.25, 0.25),
                0.0, uniform(rng, -0.6, 0.6)};
    tmpl.interactions.push_back({w.sit_records[pick], p});
  }
  if (interactions_out) *interactions_out = n_inter;
  return tmpl;
}

Outcome criterion_round_trip() {
  const auto t0 = Clock::now();
  SyntheticWorld& w = world();
  if (w.sit_records.empty()) return {false, "no interaction scenelets in the database"};
  const Config cfg = w.config();

  int interacted_total = 0, matched_total = 0;
  std::vector<double> matched_distances;
  double pose_acc = 0.0;
  long pose_n = 0;

  for (int scene_idx = 0; scene_idx < 10; ++scene_idx) {
    const uint64_t seed = 6000 + scene_idx;
    const SceneTemplate tmpl = seeded_template(w, seed);
    GroundTruthScene scene = generate_scene(tmpl, *w.db, seed);
    SynthConfig noise;
    noise.pixel_noise_sigma = 1.0;
    const ObservationTrack track = render_observations(scene, noise, seed + 50);

    const PipelineResult result = fit_track(track, w.camera, w.db, cfg);

    // Interacted objects matched by category.
    std::vector<ObjectSummary> truth;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
      if (scene.interacted[i]) truth.push_back({scene.objects[i].label,
                                                scene.objects[i].ground_centroid()});
    }
    const ObjectEval eval =
        eval_objects(summarize_objects(result.state.scene_objects()), truth);
    interacted_total += static_cast<int>(truth.size());
    for (double d : eval.match_distances) {
      if (d < 0.75) {
        ++matched_total;  // matched by category at a sane distance
        matched_distances.push_back(d);
      }
    }

    // World RMSE over fully visible frames.
    const auto q = result.state.combined_joints();
    for (size_t t = 0; t < scene.motion.size(); ++t) {
      if (!scene.frame_fully_visible(static_cast<int>(t))) continue;
      for (Joint j : metric_joints()) {
        pose_acc += (q[t][j] - scene.motion[t].joints[j]).squaredNorm();
        ++pose_n;
      }
    }
  }

  const double match_rate =
      interacted_total > 0 ? static_cast<double>(matched_total) / interacted_total : 0.0;
  double mean_dist = 0.0;
  for (double d : matched_distances) mean_dist += d;
  if (!matched_distances.empty()) mean_dist /= static_cast<double>(matched_distances.size());
  const double rmse = pose_n > 0 ? std::sqrt(pose_acc / pose_n) : 1e9;
  const double elapsed = seconds_since(t0);

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "matched %.0f%% of %d objects, mean centroid %.3f m, visible-frame RMSE %.3f m, "
                "%.0f s",
                100.0 * match_rate, interacted_total, mean_dist, rmse, elapsed);
  return {match_rate >= 0.9 && mean_dist < 0.5 && rmse < 0.15 && elapsed < 1200.0, buf};
}

// ----------------------------------------------------------- criterion 7

Outcome criterion_occlusion_recovery() {
  SyntheticWorld& w = world();
  if (w.sit_records.empty()) return {false, "no interaction scenelets"};
  const Config cfg = w.config();

  SceneTemplate tmpl;
  tmpl.camera = w.camera;
  tmpl.fps = 10.0;
  tmpl.entry = {-2.2, -1.6};
  tmpl.exit = {-2.2, 1.6};
  tmpl.interactions = {{w.sit_records.front(), Placement{0.9, 0.2, 0.0, 0.2}}};
  // A long occluder between the camera and the action.
  tmpl.extra_objects = {
      make_box_object("couch", Placement{-1.4, 0.0, 0.0, 0.0}, {0.45, 1.9, 0.62})};

  GroundTruthScene scene = generate_scene(tmpl, *w.db, 7007);
  SynthConfig noise;
  noise.pixel_noise_sigma = 1.0;
  const ObservationTrack track = render_observations(scene, noise, 7057);

  // Frames with most metric joints hidden count as occluded.
  std::vector<bool> occluded_frames(scene.motion.size(), false);
  int occluded_count = 0;
  for (size_t t = 0; t < scene.motion.size(); ++t) {
    int hidden = 0;
    for (Joint j : metric_joints()) hidden += scene.visibility[t][j] ? 0 : 1;
    occluded_frames[t] = hidden * 2 > static_cast<int>(metric_joints().size());
    occluded_count += occluded_frames[t] ? 1 : 0;
  }
  const double occluded_frac =
      static_cast<double>(occluded_count) / static_cast<double>(scene.motion.size());
  if (occluded_frac <= 0.6) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), "fixture only occludes %.0f%% of frames",
                  100.0 * occluded_frac);
    return {false, buf};
  }

  FitOptions baseline_opts;
  baseline_opts.enable_scenelets = false;
  const PipelineResult baseline = fit_track(track, w.camera, w.db, cfg, baseline_opts);
  const PipelineResult full = fit_track(track, w.camera, w.db, cfg);

  const auto rmse_on = [&](const PipelineResult& r) {
    const auto q = r.state.combined_joints();
    double acc = 0.0;
    long n = 0;
    for (size_t t = 0; t < scene.motion.size(); ++t) {
      if (!occluded_frames[t]) continue;
      for (Joint j : metric_joints()) {
        acc += (q[t][j] - scene.motion[t].joints[j]).squaredNorm();
        ++n;
      }
    }
    return n > 0 ? std::sqrt(acc / n) : 1e9;
  };
  const double baseline_rmse = rmse_on(baseline);
  const double full_rmse = rmse_on(full);
  const double improvement = 1.0 - full_rmse / baseline_rmse;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%.0f%% frames occluded; occluded RMSE %.3f m vs static-only %.3f m (%.0f%% "
                "better)",
                100.0 * occluded_frac, full_rmse, baseline_rmse, 100.0 * improvement);
  return {improvement >= 0.30, buf};
}

// ----------------------------------------------------------- criterion 8

Outcome criterion_isect_accuracy() {
  std::mt19937_64 rng(8008);

  const auto oracle = [](const PlacedObject& a, const PlacedObject& b) {
    const auto rect_sd = [](const GroundPolygon& rect, const Vec2& p) {
      const double c = std::cos(rect.rect_angle()), s = std::sin(rect.rect_angle());
      const Vec2 r = p - rect.rect_center();
      const Vec2 q{c * r.x() + s * r.y(), -s * r.x() + c * r.y()};
      const Vec2 d{std::abs(q.x()) - rect.rect_half_extents().x(),
                   std::abs(q.y()) - rect.rect_half_extents().y()};
      const Vec2 out{std::max(d.x(), 0.0), std::max(d.y(), 0.0)};
      const double len = out.norm();
      return len > 0.0 ? len : std::max(d.x(), d.y());
    };
    double total = 0.0;
    const double pitch = 0.001;
    for (int dir = 0; dir < 2; ++dir) {
      const PlacedObject& dom = dir == 0 ? a : b;
      const PlacedObject& fld = dir == 0 ? b : a;
      for (const GroundPolygon& rect : dom.footprint) {
        const Vec2 half = rect.rect_half_extents();
        const double ca = std::cos(rect.rect_angle()), sa = std::sin(rect.rect_angle());
        const int nx = std::max(1, static_cast<int>(std::ceil(2 * half.x() / pitch)));
        const int ny = std::max(1, static_cast<int>(std::ceil(2 * half.y() / pitch)));
        const double wx = 2 * half.x() / nx, wy = 2 * half.y() / ny;
        for (int ix = 0; ix < nx; ++ix) {
          for (int iy = 0; iy < ny; ++iy) {
            const double lx = -half.x() + (ix + 0.5) * wx;
            const double ly = -half.y() + (iy + 0.5) * wy;
            const Vec2 x{rect.rect_center().x() + ca * lx - sa * ly,
                         rect.rect_center().y() + sa * lx + ca * ly};
            double d = std::numeric_limits<double>::infinity();
            for (const GroundPolygon& fr : fld.footprint) d = std::min(d, rect_sd(fr, x));
            if (d < 0.0) total -= wx * wy * d;
          }
        }
      }
    }
    return total;
  };

  const auto boxy = [](const std::string& label, const Placement& p, const Vec2& half) {
    PlacedObject o;
    o.label = label;
    o.world_yaw = p.theta;
    PlacedCuboid c;
    c.center = Vec3{p.x, p.y, 0.3};
    c.half_extents = Vec3{half.x(), half.y(), 0.3};
    c.yaw = p.theta;
    o.cuboids.push_back(c);
    o.footprint.push_back(cuboid_footprint(c));
    o.ground_centroid = Vec2{p.x, p.y};
    return o;
  };

  double worst_rel = 0.0;
  int pairs = 0;
  while (pairs < 20) {
    const Vec2 half_a{uniform(rng, 0.3, 0.7), uniform(rng, 0.3, 0.7)};
    const Vec2 half_b{uniform(rng, 0.3, 0.7), uniform(rng, 0.3, 0.7)};
    const Placement pa{0.0, 0.0, 0.0, uniform(rng, -kPi, kPi)};
    const Placement pb{uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), 0.0,
                       uniform(rng, -kPi, kPi)};
    const PlacedObject a = boxy("chair", pa, half_a);
    const PlacedObject b = boxy("table", pb, half_b);
    const double expected = oracle(a, b);
    if (expected < 1e-3) continue;  // needs a real overlap
    ++pairs;
    const double got = object_intersection_term(std::vector<PlacedObject>{a, b});
    worst_rel = std::max(worst_rel, std::abs(got - expected) / expected);
  }

  // Exemption: same label and orientation overlap freely.
  const PlacedObject t1 = boxy("table", Placement{0, 0, 0, 0.3}, {0.5, 0.4});
  const PlacedObject t2 = boxy("table", Placement{0.1, 0.05, 0, 0.3}, {0.5, 0.4});
  const double exempt = object_intersection_term(std::vector<PlacedObject>{t1, t2});

  char buf[120];
  std::snprintf(buf, sizeof(buf), "20 pairs, worst relative error %.3f%%, exemption %.1f",
                100.0 * worst_rel, exempt);
  return {worst_rel < 0.02 && exempt == 0.0, buf};
}

// ----------------------------------------------------------- criterion 9

Outcome criterion_determinism() {
  SyntheticWorld& w = world();
  const Config cfg = w.config();
  const SceneTemplate tmpl = seeded_template(w, 9009);
  GroundTruthScene scene = generate_scene(tmpl, *w.db, 9009);
  SynthConfig noise;
  noise.pixel_noise_sigma = 1.0;
  const ObservationTrack track = render_observations(scene, noise, 9019);

  const auto run_once = [&] {
    const PipelineResult r = fit_track(track, w.camera, w.db, cfg);
    SceneOutput out;
    out.fps = track.fps;
    out.actors.push_back(r.state.combined_joints());
    for (const PlacedObject& po : r.state.scene_objects()) {
      SceneObject obj;
      obj.label = po.label;
      for (const PlacedCuboid& pc : po.cuboids) {
        obj.cuboids.push_back(Cuboid{pc.center, pc.half_extents, pc.yaw});
      }
      out.objects.push_back(std::move(obj));
    }
    out.diagnostics["energy_total"] = r.final_energy.total;
    return std::make_pair(r, out);
  };

  const auto [r1, out1] = run_once();
  const auto [r2, out2] = run_once();

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scenefit_acceptance";
  fs::create_directories(dir);
  save_scene(out1, (dir / "run1.json").string());
  save_scene(out2, (dir / "run2.json").string());
  std::ifstream f1(dir / "run1.json"), f2(dir / "run2.json");
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  const bool identical = s1.str() == s2.str() && !s1.str().empty();

  // eta <= 1 from the final assignment.
  std::vector<int> eta(r1.state.frames(), 0);
  for (const auto& e : r1.state.assignment().entries()) {
    const int len = static_cast<int>(w.db->records()[e.scenelet].scenelet.frames.size());
    for (int t = e.start; t < e.start + len; ++t) ++eta[t];
  }
  bool eta_ok = true;
  for (int v : eta) eta_ok = eta_ok && v <= 1;

  // No compatible pair overlaps after selection.
  const auto objects = r1.state.scene_objects();
  bool overlap_ok = true;
  for (size_t i = 0; i < objects.size(); ++i) {
    for (size_t j = i + 1; j < objects.size(); ++j) {
      if (!objects_compatible(objects[i], objects[j], cfg.energy.compat_angle_tol)) continue;
      for (const GroundPolygon& pa : objects[i].footprint) {
        for (const GroundPolygon& pb : objects[j].footprint) {
          if (convex_intersection_area(pa, pb) > 1e-9) overlap_ok = false;
        }
      }
    }
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf), "byte-identical %s, eta<=1 %s, no compatible overlap %s",
                identical ? "yes" : "NO", eta_ok ? "yes" : "NO", overlap_ok ? "yes" : "NO");
  return {identical && eta_ok && overlap_ok, buf};
}

// ----------------------------------------------------------- criterion 10

Outcome criterion_confidence() {
  // Dual evaluation to 1e-12.
  const auto simplified = [](double var, double score, double p99) {
    const double v = std::max(var, 1e-12) / (1.0 + std::exp(-0.2 * score + 3.5));
    return 1.0 / (1.0 + std::exp(-10.0 * std::pow(v, 1.0 / p99) + 24.0));
  };
  double worst = 0.0;
  for (double var : {1e-9, 1e-6, 1e-4, 0.01, 0.3, 2.0, 30.0}) {
    for (double score : {-2.0, 0.0, 1.0, 3.0, 8.0}) {
      for (double p99 : {-6.0, -3.0, -1.0, -0.4, 0.4, 2.0}) {
        const double a = joint_confidence(var, score, p99);
        const double b = simplified(var, score, p99);
        worst = std::max(worst, std::abs(a - b));
      }
    }
  }

  // Grid monotonicity in the natural regime (negative p99: joint variances
  // sit below one square meter).
  bool monotone = true;
  for (double score : {-2.0, 0.0, 2.0, 5.0}) {
    for (double p99 : {-6.0, -2.5, -0.8}) {
      double prev = 2.0;
      for (double var = 1e-9; var < 0.9; var *= 1.7) {
        const double c = joint_confidence(var, score, p99);
        if (c > prev + 1e-15) monotone = false;
        if (c <= 0.0 || c >= 1.0) monotone = false;
        prev = c;
      }
    }
  }

  char buf[120];
  std::snprintf(buf, sizeof(buf), "dual-evaluation gap %.2g, grid monotone %s", worst,
                monotone ? "yes" : "NO");
  return {worst < 1e-12 && monotone, buf};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness vs central differences", criterion_gradients},
      {"occlusion cost asymmetry (exhaustive grid)", criterion_occlusion_asymmetry},
      {"motion descriptor speed invariance", criterion_speed_invariance},
      {"charness oracle equivalence", criterion_charness_oracle},
      {"tracker exactness vs brute force", criterion_mrf_exactness},
      {"synthetic round trip (hold-one-out analogue)", criterion_round_trip},
      {"occlusion recovery beats the static baseline", criterion_occlusion_recovery},
      {"object intersection integration accuracy", criterion_isect_accuracy},
      {"pipeline determinism and constraint validity", criterion_determinism},
      {"keypoint confidence formula", criterion_confidence},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const Outcome outcome = criteria[i].second();
    std::printf("[%s] %2zu. %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed in %.0f s\n", static_cast<int>(criteria.size()) - failures,
              criteria.size(), seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
