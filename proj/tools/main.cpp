// Command-line surface: build-db, charness, fit, track, synth, eval,
// export-obj. Exit codes: 0 success, 1 validation error, 2 infeasible or
// diverged.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "scenefit/io.hpp"
#include "scenefit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace scenefit;

namespace {

struct GlobalArgs {
  std::string config_file;
  std::uint64_t seed = 0;
  int threads = 0;
  bool verbose = false;
};

Config load_effective_config(const GlobalArgs& g) {
  Config cfg;
  if (!g.config_file.empty()) cfg = load_config(g.config_file);
  if (g.threads > 0) cfg.threads = g.threads;
  return cfg;
}

int run_build_db(const GlobalArgs& g, const std::string& recordings_dir, const std::string& out,
                 double arc_length, double spacing, double sigma) {
  Config cfg = load_effective_config(g);
  if (arc_length > 0.0) cfg.database.extraction.arc_length = arc_length;
  if (spacing > 0.0) cfg.database.extraction.spacing = spacing;
  if (sigma > 0.0) cfg.database.charness_sigma = sigma;

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(recordings_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << recordings_dir << ": no recording files\n";
    return 1;
  }
  std::vector<Recording> recordings;
  for (const std::string& f : files) {
    recordings.push_back(load_recording(f));
    if (g.verbose) {
      std::cout << "loaded " << f << " (" << recordings.back().frames.size() << " frames)\n";
    }
  }
  const SceneletDatabase db = build_database(recordings, cfg.database);
  save_database(db, out);
  std::cout << "wrote " << db.size() << " scenelets to " << out << "\n";
  return 0;
}

int run_charness(const std::string& db_file, bool report) {
  const SceneletDatabase db = load_database(db_file);
  if (report) {
    for (const SceneletRecord& rec : db.records()) {
      std::cout << rec.scenelet.id << " " << rec.charness.scenelet_charness << "\n";
    }
  }
  double max_h = 0.0;
  for (const SceneletRecord& rec : db.records()) {
    max_h = std::max(max_h, rec.charness.scenelet_charness);
  }
  std::cerr << db.size() << " scenelets, max charness " << max_h << "\n";
  return 0;
}

int run_fit(const GlobalArgs& g, const std::string& db_file, const std::string& track_file,
            const std::string& camera_file, const std::string& out, int top_diverse,
            bool dump_energy, bool no_scenelets) {
  const Config cfg = load_effective_config(g);
  const auto db = std::make_shared<SceneletDatabase>(load_database(db_file));
  const std::vector<ObservationTrack> tracks = load_tracks(track_file);
  const Camera camera = load_camera(camera_file);

  FitOptions opts;
  opts.top_diverse = top_diverse;
  opts.enable_scenelets = !no_scenelets;
  const std::vector<PipelineResult> results = fit_actors(tracks, camera, db, cfg, opts);

  SceneOutput scene;
  scene.fps = tracks.front().fps;
  bool diverged = false;
  int actor_idx = 0;
  for (const PipelineResult& r : results) {
    scene.actors.push_back(r.state.combined_joints());
    for (const PlacedObject& po : r.state.scene_objects()) {
      SceneObject obj;
      obj.label = po.label;
      for (const PlacedCuboid& pc : po.cuboids) {
        obj.cuboids.push_back(Cuboid{pc.center, pc.half_extents, pc.yaw});
      }
      scene.objects.push_back(std::move(obj));
    }
    const std::string prefix = "actor" + std::to_string(actor_idx++) + ".";
    scene.diagnostics[prefix + "energy_total"] = r.final_energy.total;
    scene.diagnostics[prefix + "occluded_frames"] = r.mask.occluded_count();
    scene.diagnostics[prefix + "maxima"] = static_cast<double>(r.maxima.size());
    scene.diagnostics[prefix + "combinations"] = r.combinations_evaluated;
    if (dump_energy) {
      scene.diagnostics[prefix + "energy_reprojection"] = r.final_energy.reprojection;
      scene.diagnostics[prefix + "energy_occlusion"] = r.final_energy.occlusion;
      scene.diagnostics[prefix + "energy_smoothness"] = r.final_energy.smoothness;
      scene.diagnostics[prefix + "energy_object_isect"] = r.final_energy.object_isect;
      scene.diagnostics[prefix + "energy_motion_isect"] = r.final_energy.motion_isect;
    }
    diverged |= r.static_fit.diverged;
    if (g.verbose || dump_energy) {
      std::cout << prefix << "total=" << r.final_energy.total
                << " reproj=" << r.final_energy.reprojection
                << " occl=" << r.final_energy.occlusion
                << " smooth=" << r.final_energy.smoothness
                << " obj_isect=" << r.final_energy.object_isect
                << " motion_isect=" << r.final_energy.motion_isect << "\n";
    }
  }
  save_scene(scene, out);
  std::cout << "wrote " << out << " (" << scene.actors.size() << " actors, "
            << scene.objects.size() << " objects)\n";
  return diverged ? 2 : 0;
}

int run_track(const std::string& detections_file, int actors, const std::string& annotations_file,
              const std::string& out) {
  const DetectionSequence seq = load_detections(detections_file);
  std::vector<TrackingConstraint> constraints;
  if (!annotations_file.empty()) constraints = load_annotations(annotations_file);
  const auto solved = solve_tracking(seq, actors, constraints);
  if (const auto* err = std::get_if<TrackingError>(&solved)) {
    std::cerr << "infeasible: " << err->message << "\n";
    return 2;
  }
  save_tracking(std::get<ActorAssignment>(solved), seq, out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_synth(const GlobalArgs& g, const std::string& template_file, const std::string& out_dir,
              const std::string& db_file) {
  const Config cfg = load_effective_config(g);
  const TemplateFile tmpl = load_template(template_file);
  fs::create_directories(out_dir);

  if (tmpl.kind == "recordings") {
    int i = 0;
    for (const RecordingTemplate& rt : tmpl.recordings) {
      const Recording rec = make_recording(rt, g.seed + i);
      save_recording(rec, (fs::path(out_dir) / (rt.name + ".json")).string());
      ++i;
    }
    std::cout << "wrote " << tmpl.recordings.size() << " recordings to " << out_dir << "\n";
    return 0;
  }

  if (db_file.empty()) {
    std::cerr << "scene templates need --db\n";
    return 1;
  }
  const SceneletDatabase db = load_database(db_file);
  GroundTruthScene scene = generate_scene(tmpl.scene, db, g.seed);
  render_observations(scene, cfg.synth, g.seed + 1);

  save_camera(scene.camera, (fs::path(out_dir) / "camera.json").string());
  save_tracks({scene.track}, (fs::path(out_dir) / "track.json").string());

  SceneOutput truth;
  truth.fps = scene.fps;
  std::vector<JointPositions> motion;
  for (const SkeletonFrame& f : scene.motion) motion.push_back(f.joints);
  truth.actors.push_back(std::move(motion));
  truth.objects = scene.objects;
  truth.diagnostics["frames"] = static_cast<double>(scene.motion.size());
  save_scene(truth, (fs::path(out_dir) / "truth.json").string());
  std::cout << "wrote camera.json, track.json, truth.json to " << out_dir << "\n";
  return 0;
}

int run_eval(const std::string& result_file, const std::string& truth_file,
             const std::string& camera_file, const std::string& report_file) {
  const SceneOutput result = load_scene(result_file);
  const SceneOutput truth = load_scene(truth_file);

  Camera camera;
  camera.fx = camera.fy = 1.0;
  camera.cx = camera.cy = 0.0;
  camera.width = camera.height = 1;
  const bool have_camera = !camera_file.empty();
  if (have_camera) camera = load_camera(camera_file);

  std::map<std::string, double> report;
  const size_t actors = std::min(result.actors.size(), truth.actors.size());
  for (size_t a = 0; a < actors; ++a) {
    std::vector<SkeletonFrame> truth_frames(truth.actors[a].size());
    for (size_t t = 0; t < truth.actors[a].size(); ++t) {
      truth_frames[t].joints = truth.actors[a][t];
    }
    const PoseError err = eval_pose(result.actors[a], truth_frames, camera);
    const std::string prefix = "actor" + std::to_string(a) + ".";
    report[prefix + "world_rmse_m"] = err.world_rmse;
    report[prefix + "local_rmse_m"] = err.local_rmse;
    if (have_camera) report[prefix + "pixel_rmse_px"] = err.pixel_rmse;
    std::cout << prefix << "world_rmse=" << err.world_rmse << " m, local_rmse=" << err.local_rmse
              << " m";
    if (have_camera) std::cout << ", pixel_rmse=" << err.pixel_rmse << " px";
    std::cout << "\n";
  }

  const ObjectEval objs =
      eval_objects(summarize_objects(result.objects), summarize_objects(truth.objects));
  report["objects.matched"] = objs.matched;
  report["objects.unmatched_result"] = objs.unmatched_result;
  report["objects.unmatched_truth"] = objs.unmatched_truth;
  report["objects.mean_centroid_m"] = objs.mean_centroid_distance;
  report["objects.stddev_centroid_m"] = objs.stddev_centroid_distance;
  std::cout << "objects matched=" << objs.matched << " mean_centroid=" << objs.mean_centroid_distance
            << " m (std " << objs.stddev_centroid_distance << "), unmatched result/truth: "
            << objs.unmatched_result << "/" << objs.unmatched_truth << "\n";

  if (!report_file.empty()) {
    SceneOutput shim;
    shim.diagnostics = report;
    // Reuse the scene writer for a flat numeric report.
    shim.fps = result.fps;
    save_scene(shim, report_file);
  }
  return 0;
}

int run_export_obj(const std::string& scene_file, const std::string& out) {
  export_obj(load_scene(scene_file), out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scene layout and world-space human motion recovery from monocular pose tracks"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalArgs global;
  app.add_option("--config", global.config_file, "configuration file (JSON)");
  app.add_option("--seed", global.seed, "random seed");
  app.add_option("--threads", global.threads, "worker threads (0 = config value)");
  app.add_flag("--verbose", global.verbose, "chatty progress output");

  auto* build = app.add_subcommand("build-db", "extract scenelets from recordings");
  std::string recordings_dir, db_out;
  double arc_length = 0.0, spacing = 0.0, sigma = 0.0;
  build->add_option("--recordings", recordings_dir, "directory of recording JSON files")
      ->required();
  build->add_option("--out", db_out, "output database file")->required();
  build->add_option("--arc-length", arc_length, "scenelet arc length (m)");
  build->add_option("--spacing", spacing, "center spacing (m)");
  build->add_option("--sigma", sigma, "charness kernel sigma");

  auto* charness = app.add_subcommand("charness", "report per-scenelet charness");
  std::string charness_db;
  bool charness_report = false;
  charness->add_option("--db", charness_db, "database file")->required();
  charness->add_flag("--report", charness_report, "print one line per scenelet");

  auto* fit = app.add_subcommand("fit", "fit scenelets and skeletons to a track");
  std::string fit_db, fit_track, fit_camera, fit_out;
  int top_diverse = 1;
  bool dump_energy = false, no_scenelets = false;
  fit->add_option("--db", fit_db, "database file")->required();
  fit->add_option("--track", fit_track, "track file")->required();
  fit->add_option("--camera", fit_camera, "camera file")->required();
  fit->add_option("--out", fit_out, "output scene file")->required();
  fit->add_option("--top-diverse", top_diverse, "keep this many diverse results");
  fit->add_flag("--dump-energy", dump_energy, "include per-term energies in the output");
  fit->add_flag("--no-scenelets", no_scenelets, "static-skeleton baseline only");

  auto* track = app.add_subcommand("track", "multi-actor re-identification");
  std::string det_file, ann_file, track_out;
  int n_actors = 1;
  track->add_option("--detections", det_file, "detections file")->required();
  track->add_option("--actors", n_actors, "number of actors")->required();
  track->add_option("--annotations", ann_file, "first-appearance annotations");
  track->add_option("--out", track_out, "output tracks file")->required();

  auto* synth = app.add_subcommand("synth", "generate synthetic recordings or scenes");
  std::string synth_template, synth_out_dir, synth_db;
  synth->add_option("--template", synth_template, "template file")->required();
  synth->add_option("--out-dir", synth_out_dir, "output directory")->required();
  synth->add_option("--db", synth_db, "database (scene templates only)");

  auto* eval = app.add_subcommand("eval", "compare a result scene against ground truth");
  std::string eval_result, eval_truth, eval_camera, eval_report;
  eval->add_option("--result", eval_result, "result scene file")->required();
  eval->add_option("--truth", eval_truth, "ground-truth scene file")->required();
  eval->add_option("--camera", eval_camera, "camera for pixel-space error");
  eval->add_option("--report", eval_report, "write a JSON report here");

  auto* exp = app.add_subcommand("export-obj", "export cuboids and pelvis paths to OBJ");
  std::string exp_scene, exp_out;
  exp->add_option("--scene", exp_scene, "scene file")->required();
  exp->add_option("--out", exp_out, "output OBJ file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      return run_build_db(global, recordings_dir, db_out, arc_length, spacing, sigma);
    }
    if (charness->parsed()) return run_charness(charness_db, charness_report);
    if (fit->parsed()) {
      return run_fit(global, fit_db, fit_track, fit_camera, fit_out, top_diverse, dump_energy,
                     no_scenelets);
    }
    if (track->parsed()) return run_track(det_file, n_actors, ann_file, track_out);
    if (synth->parsed()) return run_synth(global, synth_template, synth_out_dir, synth_db);
    if (eval->parsed()) return run_eval(eval_result, eval_truth, eval_camera, eval_report);
    if (exp->parsed()) return run_export_obj(exp_scene, exp_out);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
