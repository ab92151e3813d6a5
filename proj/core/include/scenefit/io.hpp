#pragma once

// Versioned JSON file formats for cameras, tracks, databases, scenes,
// configs, recordings, detections and annotations. Field names carry units
// (_m, _px, _rad, _s, _hz). Unknown or missing fields fail with the exact
// JSON path.

#include <map>
#include <stdexcept>
#include <string>

#include "scenefit/config.hpp"
#include "scenefit/database.hpp"
#include "scenefit/synthetic.hpp"
#include "scenefit/tracker.hpp"

namespace scenefit {

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Cameras.
Camera load_camera(const std::string& file);
void save_camera(const Camera& camera, const std::string& file);
Camera camera_from_json_text(const std::string& text);
std::string camera_to_json_text(const Camera& camera);

// Tracks (one or more actors).
std::vector<ObservationTrack> load_tracks(const std::string& file);
void save_tracks(const std::vector<ObservationTrack>& tracks, const std::string& file);

// Scenelet databases.
SceneletDatabase load_database(const std::string& file);
void save_database(const SceneletDatabase& db, const std::string& file);
std::string database_to_json_text(const SceneletDatabase& db);
SceneletDatabase database_from_json_text(const std::string& text);

// Recordings for database construction.
Recording load_recording(const std::string& file);
void save_recording(const Recording& recording, const std::string& file);

// Fitted or ground-truth scenes.
struct SceneOutput {
  double fps = 10.0;
  std::vector<std::vector<JointPositions>> actors;  // world joints per frame
  std::vector<SceneObject> objects;                 // world frame
  std::map<std::string, double> diagnostics;
};
SceneOutput load_scene(const std::string& file);
void save_scene(const SceneOutput& scene, const std::string& file);

// Configuration; load applies the file over the defaults.
Config load_config(const std::string& file);
void save_config(const Config& config, const std::string& file);
std::string config_to_json_text(const Config& config);
Config config_from_json_text(const std::string& text);

// Multi-actor tracker inputs.
DetectionSequence load_detections(const std::string& file);
void save_detections(const DetectionSequence& seq, const std::string& file);
std::vector<TrackingConstraint> load_annotations(const std::string& file);
void save_tracking(const ActorAssignment& assignment, const DetectionSequence& seq,
                   const std::string& file);

// Synthetic templates. A template file is either a scene template or a list
// of recording templates (kind: "scene" | "recordings").
struct TemplateFile {
  std::string kind;
  SceneTemplate scene;
  std::vector<RecordingTemplate> recordings;
};
TemplateFile load_template(const std::string& file);
void save_template(const TemplateFile& tmpl, const std::string& file);

/// Cuboids as boxes plus one pelvis-trajectory polyline per actor.
void export_obj(const SceneOutput& scene, const std::string& file);

}  // namespace scenefit
