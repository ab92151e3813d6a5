#include "scenefit/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scenefit {

namespace {

using nlohmann::json;

json parse_text(const std::string& text, const std::string& path) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError(path, "not valid JSON");
  return j;
}

json read_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(file, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), file);
}

void write_file(const json& j, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError(file, "cannot open file for writing");
  out << j.dump(2) << '\n';
}

// Path-carrying cursor over a JSON document.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }

  Reader at(const char* key) const {
    if (!j_->is_object()) throw ValidationError(path_, "expected an object");
    const auto it = j_->find(key);
    if (it == j_->end()) {
      throw ValidationError(path_, std::string("missing required field '") + key + "'");
    }
    return Reader(*it, path_ + "." + key);
  }

  std::optional<Reader> maybe(const char* key) const {
    if (!j_->is_object()) throw ValidationError(path_, "expected an object");
    const auto it = j_->find(key);
    if (it == j_->end()) return std::nullopt;
    return Reader(*it, path_ + "." + key);
  }

  Reader item(size_t i) const {
    return Reader((*j_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  size_t size() const {
    require_array();
    return j_->size();
  }

  void require_array(std::optional<size_t> n = {}) const {
    if (!j_->is_array()) throw ValidationError(path_, "expected an array");
    if (n && j_->size() != *n) {
      throw ValidationError(path_, "expected an array of length " + std::to_string(*n) +
                                       ", got " + std::to_string(j_->size()));
    }
  }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j_->is_object()) throw ValidationError(path_, "expected an object");
    for (const auto& [key, value] : j_->items()) {
      bool known = false;
      for (const char* a : allowed) {
        if (key == a) {
          known = true;
          break;
        }
      }
      if (!known) throw ValidationError(path_ + "." + key, "unknown field");
    }
  }

  double number() const {
    if (!j_->is_number()) throw ValidationError(path_, "expected a number");
    return j_->get<double>();
  }

  int integer() const {
    if (!j_->is_number_integer()) throw ValidationError(path_, "expected an integer");
    return j_->get<int>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) throw ValidationError(path_, "expected a boolean");
    return j_->get<bool>();
  }

  std::string text() const {
    if (!j_->is_string()) throw ValidationError(path_, "expected a string");
    return j_->get<std::string>();
  }

 private:
  const json* j_;
  std::string path_;
};

void check_version(const Reader& root) {
  const int v = root.at("version").integer();
  if (v != 1) throw ValidationError(root.path() + ".version", "unsupported version");
}

// ----------------------------------------------------------- small pieces

json vec2_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from(const Reader& r) {
  r.require_array(2);
  return {r.item(0).number(), r.item(1).number()};
}

Vec3 vec3_from(const Reader& r) {
  r.require_array(3);
  return {r.item(0).number(), r.item(1).number(), r.item(2).number()};
}

json placement_to_json(const Placement& p) {
  return {{"x_m", p.x}, {"y_m", p.y}, {"z_m", p.z}, {"theta_rad", p.theta}};
}

Placement placement_from(const Reader& r) {
  r.require_object({"x_m", "y_m", "z_m", "theta_rad"});
  return Placement{r.at("x_m").number(), r.at("y_m").number(), r.at("z_m").number(),
                   r.at("theta_rad").number()};
}

json cuboid_to_json(const Cuboid& c) {
  return {{"center_m", vec3_to_json(c.center)},
          {"half_extents_m", vec3_to_json(c.half_extents)},
          {"yaw_rad", c.yaw}};
}

Cuboid cuboid_from(const Reader& r) {
  r.require_object({"center_m", "half_extents_m", "yaw_rad"});
  Cuboid c;
  c.center = vec3_from(r.at("center_m"));
  c.half_extents = vec3_from(r.at("half_extents_m"));
  c.yaw = r.at("yaw_rad").number();
  if (!(c.half_extents.minCoeff() > 0.0)) {
    throw ValidationError(r.path() + ".half_extents_m", "half extents must be positive");
  }
  return c;
}

json object_to_json(const SceneObject& o) {
  json cubs = json::array();
  for (const Cuboid& c : o.cuboids) cubs.push_back(cuboid_to_json(c));
  return {{"label", o.label}, {"placement", placement_to_json(o.placement)}, {"cuboids", cubs}};
}

SceneObject object_from(const Reader& r) {
  r.require_object({"label", "placement", "cuboids"});
  SceneObject o;
  o.label = r.at("label").text();
  o.placement = placement_from(r.at("placement"));
  const Reader cubs = r.at("cuboids");
  for (size_t i = 0; i < cubs.size(); ++i) o.cuboids.push_back(cuboid_from(cubs.item(i)));
  return o;
}

json joints_to_json(const JointPositions& joints) {
  json arr = json::array();
  for (const Vec3& v : joints) arr.push_back(vec3_to_json(v));
  return arr;
}

JointPositions joints_from(const Reader& r) {
  r.require_array(kJointCount);
  JointPositions out;
  for (int k = 0; k < kJointCount; ++k) out[k] = vec3_from(r.item(k));
  return out;
}

json frame_to_json(const SkeletonFrame& f) {
  return {{"time_s", f.time}, {"joints_m", joints_to_json(f.joints)}};
}

SkeletonFrame frame_from(const Reader& r) {
  r.require_object({"time_s", "joints_m"});
  SkeletonFrame f;
  f.time = r.at("time_s").number();
  f.joints = joints_from(r.at("joints_m"));
  return f;
}

// ---------------------------------------------------------------- cameras

json camera_to_json(const Camera& c) {
  json m = json::array();
  const Mat4 w2c = c.world_to_camera.matrix();
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) m.push_back(w2c(row, col));
  }
  return {{"version", 1},          {"fx_px", c.fx},         {"fy_px", c.fy},
          {"cx_px", c.cx},         {"cy_px", c.cy},         {"width_px", c.width},
          {"height_px", c.height}, {"world_to_camera", m}};
}

Camera camera_from(const Reader& r) {
  r.require_object({"version", "fx_px", "fy_px", "cx_px", "cy_px", "width_px", "height_px",
                    "world_to_camera"});
  check_version(r);
  Camera c;
  c.fx = r.at("fx_px").number();
  c.fy = r.at("fy_px").number();
  c.cx = r.at("cx_px").number();
  c.cy = r.at("cy_px").number();
  c.width = r.at("width_px").integer();
  c.height = r.at("height_px").integer();
  if (!(c.fx > 0.0) || !(c.fy > 0.0)) {
    throw ValidationError(r.path() + ".fx_px", "focal lengths must be positive");
  }
  if (c.cx < 0.0 || c.cx > c.width || c.cy < 0.0 || c.cy > c.height) {
    throw ValidationError(r.path() + ".cx_px", "principal point outside image bounds");
  }
  const Reader m = r.at("world_to_camera");
  m.require_array(16);
  Mat4 w2c;
  for (int i = 0; i < 16; ++i) w2c(i / 4, i % 4) = m.item(i).number();
  if (w2c(3, 0) != 0.0 || w2c(3, 1) != 0.0 || w2c(3, 2) != 0.0 || w2c(3, 3) != 1.0) {
    throw ValidationError(m.path(), "bottom row must be [0, 0, 0, 1]");
  }
  const Mat3 rot = w2c.block<3, 3>(0, 0);
  if ((rot * rot.transpose() - Mat3::Identity()).norm() > 1e-6) {
    throw ValidationError(m.path(), "rotation part is not orthonormal");
  }
  c.world_to_camera.matrix() = w2c;
  return c;
}

// ------------------------------------------------------------------ tracks

json track_frame_to_json(const TrackFrame& f) {
  json joints = json::array();
  for (int k = 0; k < kJointCount; ++k) {
    joints.push_back(json::array(
        {f.joints[k].pixel.x(), f.joints[k].pixel.y(), f.joints[k].confidence}));
  }
  json out = {{"joints_px", joints}, {"valid", f.valid}};
  if (f.local_pose) out["local_pose_m"] = joints_to_json(*f.local_pose);
  return out;
}

TrackFrame track_frame_from(const Reader& r) {
  r.require_object({"joints_px", "local_pose_m", "valid"});
  TrackFrame f;
  const Reader joints = r.at("joints_px");
  joints.require_array(kJointCount);
  for (int k = 0; k < kJointCount; ++k) {
    const Reader jk = joints.item(k);
    jk.require_array(3);
    f.joints[k].pixel = {jk.item(0).number(), jk.item(1).number()};
    f.joints[k].confidence = jk.item(2).number();
    if (f.joints[k].confidence < 0.0 || f.joints[k].confidence > 1.0) {
      throw ValidationError(jk.path() + "[2]", "confidence must be in [0, 1]");
    }
  }
  if (const auto lp = r.maybe("local_pose_m")) f.local_pose = joints_from(*lp);
  if (const auto v = r.maybe("valid")) f.valid = v->boolean();
  return f;
}

}  // namespace

Camera load_camera(const std::string& file) { return camera_from(Reader(read_file(file), file)); }

void save_camera(const Camera& camera, const std::string& file) {
  write_file(camera_to_json(camera), file);
}

Camera camera_from_json_text(const std::string& text) {
  return camera_from(Reader(parse_text(text, "camera"), "camera"));
}

std::string camera_to_json_text(const Camera& camera) { return camera_to_json(camera).dump(2); }

std::vector<ObservationTrack> load_tracks(const std::string& file) {
  const json j = read_file(file);
  const Reader r(j, file);
  r.require_object({"version", "fps_hz", "actors"});
  check_version(r);
  const double fps = r.at("fps_hz").number();
  std::vector<ObservationTrack> tracks;
  const Reader actors = r.at("actors");
  for (size_t a = 0; a < actors.size(); ++a) {
    const Reader actor = actors.item(a);
    actor.require_object({"frames"});
    ObservationTrack track;
    track.fps = fps;
    const Reader frames = actor.at("frames");
    for (size_t t = 0; t < frames.size(); ++t) {
      track.frames.push_back(track_frame_from(frames.item(t)));
    }
    tracks.push_back(std::move(track));
  }
  if (tracks.empty()) throw ValidationError(file + ".actors", "needs at least one actor");
  return tracks;
}

void save_tracks(const std::vector<ObservationTrack>& tracks, const std::string& file) {
  json actors = json::array();
  for (const ObservationTrack& t : tracks) {
    json frames = json::array();
    for (const TrackFrame& f : t.frames) frames.push_back(track_frame_to_json(f));
    actors.push_back({{"frames", frames}});
  }
  const double fps = tracks.empty() ? 10.0 : tracks.front().fps;
  write_file({{"version", 1}, {"fps_hz", fps}, {"actors", actors}}, file);
}

// ---------------------------------------------------------------- database

namespace {

json bins_to_json(const std::map<std::string, std::array<double, 25>>& bins) {
  json out = json::object();
  for (const auto& [cat, values] : bins) {
    json arr = json::array();
    for (double v : values) arr.push_back(v);
    out[cat] = arr;
  }
  return out;
}

std::map<std::string, std::array<double, 25>> bins_from(const Reader& r) {
  if (!r.raw().is_object()) throw ValidationError(r.path(), "expected an object");
  std::map<std::string, std::array<double, 25>> out;
  for (const auto& [cat, values] : r.raw().items()) {
    const Reader arr(values, r.path() + "." + cat);
    arr.require_array(25);
    std::array<double, 25> bins{};
    for (int i = 0; i < 25; ++i) bins[i] = arr.item(i).number();
    out[cat] = bins;
  }
  return out;
}

json record_to_json(const SceneletRecord& rec) {
  const Scenelet& s = rec.scenelet;
  json frames = json::array();
  for (const SkeletonFrame& f : s.frames) frames.push_back(frame_to_json(f));
  json objects = json::array();
  for (const SceneObject& o : s.objects) objects.push_back(object_to_json(o));

  json samples = json::array();
  for (int i = 0; i < kMotionSamples; ++i) {
    json row = json::array();
    for (int d = 0; d < kPoseDescriptorSize; ++d) row.push_back(rec.motion.samples(i, d));
    samples.push_back(row);
  }
  json pelvis = json::array();
  for (const Vec3& p : rec.motion.pelvis) pelvis.push_back(vec3_to_json(p));

  return {{"id", s.id},
          {"source_scene", s.source_scene},
          {"center_frame", s.center},
          {"local_frame",
           {{"source_center_frame", s.local_frame.source_center_frame},
            {"world_from_local", placement_to_json(s.local_frame.world_from_local)}}},
          {"frames", frames},
          {"objects", objects},
          {"motion_descriptor", {{"samples", samples}, {"pelvis_m", pelvis}}},
          {"object_descriptor", bins_to_json(rec.objects.histograms)},
          {"charness",
           {{"bins", bins_to_json(rec.charness.bins)},
            {"scenelet_charness", rec.charness.scenelet_charness},
            {"density_per_m2", rec.charness.density}}}};
}

SceneletRecord record_from(const Reader& r) {
  r.require_object({"id", "source_scene", "center_frame", "local_frame", "frames", "objects",
                    "motion_descriptor", "object_descriptor", "charness"});
  SceneletRecord rec;
  Scenelet& s = rec.scenelet;
  s.id = r.at("id").text();
  s.source_scene = r.at("source_scene").text();
  s.center = r.at("center_frame").integer();
  const Reader lf = r.at("local_frame");
  lf.require_object({"source_center_frame", "world_from_local"});
  s.local_frame.source_center_frame = lf.at("source_center_frame").integer();
  s.local_frame.world_from_local = placement_from(lf.at("world_from_local"));

  const Reader frames = r.at("frames");
  if (frames.size() == 0) throw ValidationError(frames.path(), "motion clip must be nonempty");
  for (size_t i = 0; i < frames.size(); ++i) s.frames.push_back(frame_from(frames.item(i)));
  if (s.center < 0 || s.center >= static_cast<int>(s.frames.size())) {
    throw ValidationError(r.path() + ".center_frame", "center frame out of range");
  }
  const Reader objects = r.at("objects");
  for (size_t i = 0; i < objects.size(); ++i) s.objects.push_back(object_from(objects.item(i)));

  const Reader md = r.at("motion_descriptor");
  md.require_object({"samples", "pelvis_m"});
  const Reader samples = md.at("samples");
  samples.require_array(kMotionSamples);
  for (int i = 0; i < kMotionSamples; ++i) {
    const Reader row = samples.item(i);
    row.require_array(kPoseDescriptorSize);
    for (int d = 0; d < kPoseDescriptorSize; ++d) rec.motion.samples(i, d) = row.item(d).number();
  }
  const Reader pelvis = md.at("pelvis_m");
  pelvis.require_array(kMotionSamples);
  for (int i = 0; i < kMotionSamples; ++i) rec.motion.pelvis[i] = vec3_from(pelvis.item(i));

  rec.objects.histograms = bins_from(r.at("object_descriptor"));
  const Reader ch = r.at("charness");
  ch.require_object({"bins", "scenelet_charness", "density_per_m2"});
  rec.charness.bins = bins_from(ch.at("bins"));
  rec.charness.scenelet_charness = ch.at("scenelet_charness").number();
  rec.charness.density = ch.at("density_per_m2").number();
  return rec;
}

json database_to_json(const SceneletDatabase& db) {
  json cats = json::array();
  for (const std::string& c : db.params().categories) cats.push_back(c);
  json scenelets = json::array();
  for (const SceneletRecord& rec : db.records()) scenelets.push_back(record_to_json(rec));
  return {{"version", 1},
          {"categories", cats},
          {"params",
           {{"arc_length_m", db.params().extraction.arc_length},
            {"spacing_m", db.params().extraction.spacing},
            {"bin_size_m", db.params().descriptor.bin_size},
            {"charness_sigma", db.params().charness_sigma},
            {"density_bandwidth_m", db.params().density_bandwidth}}},
          {"scenelets", scenelets}};
}

SceneletDatabase database_from(const Reader& r) {
  r.require_object({"version", "categories", "params", "scenelets"});
  check_version(r);
  DatabaseParams params;
  params.categories.clear();
  const Reader cats = r.at("categories");
  for (size_t i = 0; i < cats.size(); ++i) params.categories.push_back(cats.item(i).text());
  const Reader p = r.at("params");
  p.require_object(
      {"arc_length_m", "spacing_m", "bin_size_m", "charness_sigma", "density_bandwidth_m"});
  params.extraction.arc_length = p.at("arc_length_m").number();
  params.extraction.spacing = p.at("spacing_m").number();
  params.descriptor.bin_size = p.at("bin_size_m").number();
  params.charness_sigma = p.at("charness_sigma").number();
  params.density_bandwidth = p.at("density_bandwidth_m").number();

  SceneletDatabase db(params);
  const Reader scenelets = r.at("scenelets");
  for (size_t i = 0; i < scenelets.size(); ++i) {
    db.records().push_back(record_from(scenelets.item(i)));
  }
  return db;
}

}  // namespace

SceneletDatabase load_database(const std::string& file) {
  return database_from(Reader(read_file(file), file));
}

void save_database(const SceneletDatabase& db, const std::string& file) {
  write_file(database_to_json(db), file);
}

std::string database_to_json_text(const SceneletDatabase& db) {
  return database_to_json(db).dump(2);
}

SceneletDatabase database_from_json_text(const std::string& text) {
  return database_from(Reader(parse_text(text, "database"), "database"));
}

// -------------------------------------------------------------- recordings

Recording load_recording(const std::string& file) {
  const json j = read_file(file);
  const Reader r(j, file);
  r.require_object({"version", "name", "fps_hz", "frames", "objects"});
  check_version(r);
  Recording rec;
  rec.name = r.at("name").text();
  rec.fps = r.at("fps_hz").number();
  const Reader frames = r.at("frames");
  for (size_t i = 0; i < frames.size(); ++i) rec.frames.push_back(frame_from(frames.item(i)));
  const Reader objects = r.at("objects");
  for (size_t i = 0; i < objects.size(); ++i) rec.objects.push_back(object_from(objects.item(i)));
  return rec;
}

void save_recording(const Recording& recording, const std::string& file) {
  json frames = json::array();
  for (const SkeletonFrame& f : recording.frames) frames.push_back(frame_to_json(f));
  json objects = json::array();
  for (const SceneObject& o : recording.objects) objects.push_back(object_to_json(o));
  write_file({{"version", 1},
              {"name", recording.name},
              {"fps_hz", recording.fps},
              {"frames", frames},
              {"objects", objects}},
             file);
}

// ------------------------------------------------------------------ scenes

SceneOutput load_scene(const std::string& file) {
  const json j = read_file(file);
  const Reader r(j, file);
  r.require_object({"version", "fps_hz", "actors", "objects", "diagnostics"});
  check_version(r);
  SceneOutput out;
  out.fps = r.at("fps_hz").number();
  const Reader actors = r.at("actors");
  for (size_t a = 0; a < actors.size(); ++a) {
    const Reader actor = actors.item(a);
    actor.require_object({"frames"});
    std::vector<JointPositions> frames;
    const Reader fr = actor.at("frames");
    for (size_t t = 0; t < fr.size(); ++t) frames.push_back(joints_from(fr.item(t)));
    out.actors.push_back(std::move(frames));
  }
  const Reader objects = r.at("objects");
  for (size_t i = 0; i < objects.size(); ++i) out.objects.push_back(object_from(objects.item(i)));
  if (const auto diag = r.maybe("diagnostics")) {
    for (const auto& [key, value] : diag->raw().items()) {
      if (!value.is_number()) {
        throw ValidationError(diag->path() + "." + key, "expected a number");
      }
      out.diagnostics[key] = value.get<double>();
    }
  }
  return out;
}

void save_scene(const SceneOutput& scene, const std::string& file) {
  json actors = json::array();
  for (const auto& actor : scene.actors) {
    json frames = json::array();
    for (const JointPositions& f : actor) frames.push_back(joints_to_json(f));
    actors.push_back({{"frames", frames}});
  }
  json objects = json::array();
  for (const SceneObject& o : scene.objects) objects.push_back(object_to_json(o));
  json diag = json::object();
  for (const auto& [key, value] : scene.diagnostics) diag[key] = value;
  write_file({{"version", 1},
              {"fps_hz", scene.fps},
              {"actors", actors},
              {"objects", objects},
              {"diagnostics", diag}},
             file);
}

// ------------------------------------------------------------------ config

namespace {

json config_to_json(const Config& c) {
  return {
      {"version", 1},
      {"weights",
       {{"reprojection", c.weights.reprojection},
        {"occlusion", c.weights.occlusion},
        {"smoothness", c.weights.smoothness},
        {"object_isect", c.weights.object_isect},
        {"motion_isect", c.weights.motion_isect}}},
      {"energy",
       {{"isect_grid_pitch_m", c.energy.isect_grid_pitch},
        {"compat_angle_tol_rad", c.energy.compat_angle_tol},
        {"clamp_motion_isect", c.energy.clamp_motion_isect},
        {"occlusion_cap_m", c.energy.occlusion_cap}}},
      {"database",
       {{"arc_length_m", c.database.extraction.arc_length},
        {"spacing_m", c.database.extraction.spacing},
        {"bin_size_m", c.database.descriptor.bin_size},
        {"charness_sigma", c.database.charness_sigma},
        {"density_bandwidth_m", c.database.density_bandwidth}}},
      {"pipeline",
       {{"winsor_percentile", c.pipeline.winsor_percentile},
        {"min_mean_confidence", c.pipeline.min_mean_confidence},
        {"discard_implausible_poses", c.pipeline.discard_implausible_poses},
        {"frame_stride", c.pipeline.frame_stride},
        {"fit_quality_scale_px", c.pipeline.fit_quality_scale_px},
        {"sweep_max_iterations", c.pipeline.sweep_max_iterations},
        {"min_charness", c.pipeline.min_charness},
        {"nms_window_frames", c.pipeline.nms_window_frames},
        {"min_occluded_run_frames", c.pipeline.min_occluded_run_frames},
        {"max_maxima", c.pipeline.max_maxima},
        {"stage1_keep", c.pipeline.stage1_keep},
        {"stage2_keep", c.pipeline.stage2_keep},
        {"stage2_start_search", c.pipeline.stage2_start_search},
        {"refine_max_iterations", c.pipeline.refine_max_iterations},
        {"allow_no_candidate", c.pipeline.allow_no_candidate},
        {"max_combinations", c.pipeline.max_combinations},
        {"beam_width", c.pipeline.beam_width},
        {"diversity_window_frames", c.pipeline.diversity_window_frames}}},
      {"synth",
       {{"pixel_noise_sigma", c.synth.pixel_noise_sigma},
        {"visible_confidence_min", c.synth.visible_confidence_min},
        {"visible_confidence_max", c.synth.visible_confidence_max},
        {"occluded_confidence_min", c.synth.occluded_confidence_min},
        {"occluded_confidence_max", c.synth.occluded_confidence_max}}},
      {"solver",
       {{"max_iterations", c.solver.max_iterations},
        {"gradient_tolerance", c.solver.gradient_tolerance},
        {"history", c.solver.history}}},
      {"threads", c.threads}};
}

Config config_from(const Reader& r) {
  r.require_object({"version", "weights", "energy", "database", "pipeline", "synth", "solver",
                    "threads"});
  check_version(r);
  Config c;
  if (const auto w = r.maybe("weights")) {
    w->require_object({"reprojection", "occlusion", "smoothness", "object_isect", "motion_isect"});
    if (const auto v = w->maybe("reprojection")) c.weights.reprojection = v->number();
    if (const auto v = w->maybe("occlusion")) c.weights.occlusion = v->number();
    if (const auto v = w->maybe("smoothness")) c.weights.smoothness = v->number();
    if (const auto v = w->maybe("object_isect")) c.weights.object_isect = v->number();
    if (const auto v = w->maybe("motion_isect")) c.weights.motion_isect = v->number();
  }
  if (const auto e = r.maybe("energy")) {
    e->require_object({"isect_grid_pitch_m", "compat_angle_tol_rad", "clamp_motion_isect",
                       "occlusion_cap_m"});
    if (const auto v = e->maybe("isect_grid_pitch_m")) c.energy.isect_grid_pitch = v->number();
    if (const auto v = e->maybe("compat_angle_tol_rad")) c.energy.compat_angle_tol = v->number();
    if (const auto v = e->maybe("clamp_motion_isect")) c.energy.clamp_motion_isect = v->boolean();
    if (const auto v = e->maybe("occlusion_cap_m")) c.energy.occlusion_cap = v->number();
  }
  if (const auto d = r.maybe("database")) {
    d->require_object(
        {"arc_length_m", "spacing_m", "bin_size_m", "charness_sigma", "density_bandwidth_m"});
    if (const auto v = d->maybe("arc_length_m")) c.database.extraction.arc_length = v->number();
    if (const auto v = d->maybe("spacing_m")) c.database.extraction.spacing = v->number();
    if (const auto v = d->maybe("bin_size_m")) c.database.descriptor.bin_size = v->number();
    if (const auto v = d->maybe("charness_sigma")) c.database.charness_sigma = v->number();
    if (const auto v = d->maybe("density_bandwidth_m")) c.database.density_bandwidth = v->number();
  }
  if (const auto p = r.maybe("pipeline")) {
    p->require_object({"winsor_percentile", "min_mean_confidence", "discard_implausible_poses",
                       "frame_stride", "fit_quality_scale_px", "sweep_max_iterations",
                       "min_charness", "nms_window_frames", "min_occluded_run_frames",
                       "max_maxima", "stage1_keep",
                       "stage2_keep", "stage2_start_search", "refine_max_iterations",
                       "allow_no_candidate",
                       "max_combinations", "beam_width", "diversity_window_frames"});
    if (const auto v = p->maybe("winsor_percentile")) c.pipeline.winsor_percentile = v->number();
    if (const auto v = p->maybe("min_mean_confidence")) {
      c.pipeline.min_mean_confidence = v->number();
    }
    if (const auto v = p->maybe("discard_implausible_poses")) {
      c.pipeline.discard_implausible_poses = v->boolean();
    }
    if (const auto v = p->maybe("frame_stride")) c.pipeline.frame_stride = v->integer();
    if (const auto v = p->maybe("fit_quality_scale_px")) {
      c.pipeline.fit_quality_scale_px = v->number();
    }
    if (const auto v = p->maybe("sweep_max_iterations")) {
      c.pipeline.sweep_max_iterations = v->integer();
    }
    if (const auto v = p->maybe("min_charness")) c.pipeline.min_charness = v->number();
    if (const auto v = p->maybe("nms_window_frames")) c.pipeline.nms_window_frames = v->integer();
    if (const auto v = p->maybe("min_occluded_run_frames")) {
      c.pipeline.min_occluded_run_frames = v->integer();
    }
    if (const auto v = p->maybe("max_maxima")) c.pipeline.max_maxima = v->integer();
    if (const auto v = p->maybe("stage1_keep")) c.pipeline.stage1_keep = v->integer();
    if (const auto v = p->maybe("stage2_keep")) c.pipeline.stage2_keep = v->integer();
    if (const auto v = p->maybe("stage2_start_search")) {
      c.pipeline.stage2_start_search = v->integer();
    }
    if (const auto v = p->maybe("refine_max_iterations")) {
      c.pipeline.refine_max_iterations = v->integer();
    }
    if (const auto v = p->maybe("allow_no_candidate")) {
      c.pipeline.allow_no_candidate = v->boolean();
    }
    if (const auto v = p->maybe("max_combinations")) c.pipeline.max_combinations = v->integer();
    if (const auto v = p->maybe("beam_width")) c.pipeline.beam_width = v->integer();
    if (const auto v = p->maybe("diversity_window_frames")) {
      c.pipeline.diversity_window_frames = v->integer();
    }
  }
  if (const auto s = r.maybe("synth")) {
    s->require_object({"pixel_noise_sigma", "visible_confidence_min", "visible_confidence_max",
                       "occluded_confidence_min", "occluded_confidence_max"});
    if (const auto v = s->maybe("pixel_noise_sigma")) c.synth.pixel_noise_sigma = v->number();
    if (const auto v = s->maybe("visible_confidence_min")) {
      c.synth.visible_confidence_min = v->number();
    }
    if (const auto v = s->maybe("visible_confidence_max")) {
      c.synth.visible_confidence_max = v->number();
    }
    if (const auto v = s->maybe("occluded_confidence_min")) {
      c.synth.occluded_confidence_min = v->number();
    }
    if (const auto v = s->maybe("occluded_confidence_max")) {
      c.synth.occluded_confidence_max = v->number();
    }
  }
  if (const auto s = r.maybe("solver")) {
    s->require_object({"max_iterations", "gradient_tolerance", "history"});
    if (const auto v = s->maybe("max_iterations")) c.solver.max_iterations = v->integer();
    if (const auto v = s->maybe("gradient_tolerance")) c.solver.gradient_tolerance = v->number();
    if (const auto v = s->maybe("history")) c.solver.history = v->integer();
  }
  if (const auto t = r.maybe("threads")) c.threads = t->integer();
  return c;
}

}  // namespace

Config load_config(const std::string& file) {
  return config_from(Reader(read_file(file), file));
}

void save_config(const Config& config, const std::string& file) {
  write_file(config_to_json(config), file);
}

std::string config_to_json_text(const Config& config) { return config_to_json(config).dump(2); }

Config config_from_json_text(const std::string& text) {
  return config_from(Reader(parse_text(text, "config"), "config"));
}

// ------------------------------------------------------- tracker file pair

DetectionSequence load_detections(const std::string& file) {
  const json j = read_file(file);
  const Reader r(j, file);
  r.require_object({"version", "fps_hz", "image_half_diagonal_px", "frames"});
  check_version(r);
  DetectionSequence seq;
  seq.fps = r.at("fps_hz").number();
  seq.image_half_diagonal = r.at("image_half_diagonal_px").number();
  if (!(seq.image_half_diagonal > 0.0)) {
    throw ValidationError(file + ".image_half_diagonal_px", "must be positive");
  }
  const Reader frames = r.at("frames");
  for (size_t t = 0; t < frames.size(); ++t) {
    const Reader fr = frames.item(t);
    fr.require_object({"skeletons"});
    DetectionFrame df;
    const Reader skels = fr.at("skeletons");
    for (size_t s = 0; s < skels.size(); ++s) {
      const Reader sk = skels.item(s);
      sk.require_object({"joints_px"});
      DetectedSkeleton d;
      const Reader joints = sk.at("joints_px");
      joints.require_array(kJointCount);
      for (int k = 0; k < kJointCount; ++k) {
        const Reader jk = joints.item(k);
        jk.require_array(3);
        d.joints[k].pixel = {jk.item(0).number(), jk.item(1).number()};
        d.joints[k].confidence = jk.item(2).number();
      }
      df.skeletons.push_back(d);
    }
    seq.frames.push_back(std::move(df));
  }
  return seq;
}

void save_detections(const DetectionSequence& seq, const std::string& file) {
  json frames = json::array();
  for (const DetectionFrame& df : seq.frames) {
    json skels = json::array();
    for (const DetectedSkeleton& d : df.skeletons) {
      json joints = json::array();
      for (int k = 0; k < kJointCount; ++k) {
        joints.push_back(json::array(
            {d.joints[k].pixel.x(), d.joints[k].pixel.y(), d.joints[k].confidence}));
      }
      skels.push_back({{"joints_px", joints}});
    }
    frames.push_back({{"skeletons", skels}});
  }
  write_file({{"version", 1},
              {"fps_hz", seq.fps},
              {"image_half_diagonal_px", seq.image_half_diagonal},
              {"frames", frames}},
             file);
}

std::vector<TrackingConstraint> load_annotations(const std::string& file) {
  const json j = read_file(file);
  const Reader r(j, file);
  r.require_object({"version", "constraints"});
  check_version(r);
  std::vector<TrackingConstraint> out;
  const Reader cs = r.at("constraints");
  for (size_t i = 0; i < cs.size(); ++i) {
    const Reader c = cs.item(i);
    c.require_object({"actor", "frame", "skeleton"});
    out.push_back({c.at("actor").integer(), c.at("frame").integer(),
                   c.at("skeleton").integer()});
  }
  return out;
}

void save_tracking(const ActorAssignment& assignment, const DetectionSequence& seq,
                   const std::string& file) {
  json rows = json::array();
  for (const auto& frame : assignment.assignment) {
    json row = json::array();
    for (int s : frame) row.push_back(s);
    rows.push_back(row);
  }
  const std::vector<ObservationTrack> tracks = tracks_from_assignment(seq, assignment);
  json actors = json::array();
  for (const ObservationTrack& t : tracks) {
    json frames = json::array();
    for (const TrackFrame& f : t.frames) frames.push_back(track_frame_to_json(f));
    actors.push_back({{"frames", frames}});
  }
  write_file({{"version", 1},
              {"fps_hz", seq.fps},
              {"objective", assignment.objective},
              {"assignment", rows},
              {"actors", actors}},
             file);
}

// --------------------------------------------------------------- templates

namespace {

RecordingAction action_from(const Reader& r) {
  const std::string type = r.at("type").text();
  if (type == "walk") {
    r.require_object({"type", "target_m"});
    return WalkTo{vec2_from(r.at("target_m"))};
  }
  if (type == "sit") {
    r.require_object({"type", "object", "dwell_s"});
    return SitAt{r.at("object").integer(), r.at("dwell_s").number()};
  }
  if (type == "reach") {
    r.require_object({"type", "object", "dwell_s"});
    return ReachAt{r.at("object").integer(), r.at("dwell_s").number()};
  }
  throw ValidationError(r.path() + ".type", "unknown action type '" + type + "'");
}

json action_to_json(const RecordingAction& a) {
  if (const auto* w = std::get_if<WalkTo>(&a)) {
    return {{"type", "walk"}, {"target_m", vec2_to_json(w->target)}};
  }
  if (const auto* s = std::get_if<SitAt>(&a)) {
    return {{"type", "sit"}, {"object", s->object_index}, {"dwell_s", s->dwell_seconds}};
  }
  const auto& rch = std::get<ReachAt>(a);
  return {{"type", "reach"}, {"object", rch.object_index}, {"dwell_s", rch.dwell_seconds}};
}

}  // namespace

TemplateFile load_template(const std::string& file) {
  const json j = read_file(file);
  const Reader r(j, file);
  TemplateFile out;
  out.kind = r.at("kind").text();
  if (out.kind == "scene") {
    r.require_object({"version", "kind", "camera", "fps_hz", "entry_m", "exit_m", "interactions",
                      "extra_objects"});
    check_version(r);
    out.scene.camera = camera_from(r.at("camera"));
    out.scene.fps = r.at("fps_hz").number();
    out.scene.entry = vec2_from(r.at("entry_m"));
    out.scene.exit = vec2_from(r.at("exit_m"));
    const Reader ints = r.at("interactions");
    for (size_t i = 0; i < ints.size(); ++i) {
      const Reader spec = ints.item(i);
      spec.require_object({"scenelet", "placement"});
      out.scene.interactions.push_back(
          {spec.at("scenelet").integer(), placement_from(spec.at("placement"))});
    }
    const Reader extras = r.at("extra_objects");
    for (size_t i = 0; i < extras.size(); ++i) {
      out.scene.extra_objects.push_back(object_from(extras.item(i)));
    }
    return out;
  }
  if (out.kind == "recordings") {
    r.require_object({"version", "kind", "recordings"});
    check_version(r);
    const Reader recs = r.at("recordings");
    for (size_t i = 0; i < recs.size(); ++i) {
      const Reader rec = recs.item(i);
      rec.require_object({"name", "fps_hz", "start_m", "objects", "actions"});
      RecordingTemplate t;
      t.name = rec.at("name").text();
      t.fps = rec.at("fps_hz").number();
      t.start = vec2_from(rec.at("start_m"));
      const Reader objs = rec.at("objects");
      for (size_t o = 0; o < objs.size(); ++o) t.objects.push_back(object_from(objs.item(o)));
      const Reader acts = rec.at("actions");
      for (size_t a = 0; a < acts.size(); ++a) t.actions.push_back(action_from(acts.item(a)));
      out.recordings.push_back(std::move(t));
    }
    return out;
  }
  throw ValidationError(file + ".kind", "expected 'scene' or 'recordings'");
}

void save_template(const TemplateFile& tmpl, const std::string& file) {
  if (tmpl.kind == "scene") {
    json ints = json::array();
    for (const InteractionSpec& spec : tmpl.scene.interactions) {
      ints.push_back({{"scenelet", spec.scenelet}, {"placement", placement_to_json(spec.placement)}});
    }
    json extras = json::array();
    for (const SceneObject& o : tmpl.scene.extra_objects) extras.push_back(object_to_json(o));
    write_file({{"version", 1},
                {"kind", "scene"},
                {"camera", camera_to_json(tmpl.scene.camera)},
                {"fps_hz", tmpl.scene.fps},
                {"entry_m", vec2_to_json(tmpl.scene.entry)},
                {"exit_m", vec2_to_json(tmpl.scene.exit)},
                {"interactions", ints},
                {"extra_objects", extras}},
               file);
    return;
  }
  json recs = json::array();
  for (const RecordingTemplate& t : tmpl.recordings) {
    json objs = json::array();
    for (const SceneObject& o : t.objects) objs.push_back(object_to_json(o));
    json acts = json::array();
    for (const RecordingAction& a : t.actions) acts.push_back(action_to_json(a));
    recs.push_back({{"name", t.name},
                    {"fps_hz", t.fps},
                    {"start_m", vec2_to_json(t.start)},
                    {"objects", objs},
                    {"actions", acts}});
  }
  write_file({{"version", 1}, {"kind", "recordings"}, {"recordings", recs}}, file);
}

// --------------------------------------------------------------------- obj

void export_obj(const SceneOutput& scene, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError(file, "cannot open file for writing");
  out << "# scenefit export: cuboid objects and pelvis trajectories\n";
  int base = 1;
  int obj_index = 0;
  for (const SceneObject& o : scene.objects) {
    out << "o " << o.label << "_" << obj_index++ << "\n";
    for (const PlacedCuboid& pc : o.placed()) {
      const auto corners = pc.corners();
      for (const Vec3& c : corners) {
        out << "v " << c.x() << " " << c.y() << " " << c.z() << "\n";
      }
      // Corner bit order: bit0 +x, bit1 +y, bit2 +z.
      static constexpr int kQuads[6][4] = {{1, 3, 7, 5}, {0, 4, 6, 2}, {2, 6, 7, 3},
                                           {0, 1, 5, 4}, {4, 5, 7, 6}, {0, 2, 3, 1}};
      for (const auto& q : kQuads) {
        out << "f " << base + q[0] << " " << base + q[1] << " " << base + q[2] << " "
            << base + q[3] << "\n";
      }
      base += 8;
    }
  }
  int actor_index = 0;
  for (const auto& actor : scene.actors) {
    out << "o pelvis_path_" << actor_index++ << "\n";
    const int first = base;
    for (const JointPositions& f : actor) {
      out << "v " << f[kPelvis].x() << " " << f[kPelvis].y() << " " << f[kPelvis].z() << "\n";
      ++base;
    }
    for (int i = first; i + 1 < base; ++i) {
      out << "l " << i << " " << i + 1 << "\n";
    }
  }
}

}  // namespace scenefit
