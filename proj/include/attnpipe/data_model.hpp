#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "attnpipe/linalg.hpp"

namespace attnpipe {

enum class Condition { Real, Virtual };

const char* to_string(Condition c);
Condition parse_condition(const std::string& s);

// Idealized 10-20 electrode coordinates on the unit sphere
// (x = right, y = nasion, z = vertex).
struct ElectrodeMontage {
  std::vector<std::string> names;
  std::vector<std::array<double, 3>> positions;

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(const std::string& label) const;

  // The 16-channel cap layout used throughout this project.
  static const ElectrodeMontage& default16();
};

struct Recording {
  Matrix samples;   // channels x time, microvolts
  double fs = 500.0;
  double t0 = 0.0;  // seconds

  std::size_t n_channels() const { return samples.rows; }
  std::size_t n_samples() const { return samples.cols; }
  double duration() const { return static_cast<double>(n_samples()) / fs; }
};

struct GazeTrack {
  std::vector<double> timestamps;  // seconds, strictly increasing
  std::vector<double> x, y;        // normalized [0,1] nominal
  std::vector<double> confidence;  // [0,1]

  std::size_t size() const { return timestamps.size(); }
};

struct TrialEvent {
  int trial_id = 0;
  Condition condition = Condition::Real;
  double memory_onset = 0.0;      // seconds
  double memory_duration = 20.0;  // seconds
  std::string field_size;         // one of 5x5, 4x3, 7x2, 4x4
};

struct Session {
  std::string participant_id;
  Recording recording;
  std::optional<GazeTrack> gaze;
  std::vector<TrialEvent> events;
  std::set<std::string> bad_channels;
  ElectrodeMontage montage;
};

struct Dataset {
  std::vector<Session> sessions;
};

struct ValidationIssue {
  std::string participant_id;
  int trial_id = -1;  // -1 when not trial specific
  std::string rule;
  std::string message;
  bool informational = false;
};

struct ValidationReport {
  std::vector<ValidationIssue> entries;

  bool has_violations() const {
    for (const auto& e : entries)
      if (!e.informational) return true;
    return false;
  }
};

// Directory layout: manifest.json, eeg.csv, events.csv, optional gaze.csv.
Session load_session(const std::filesystem::path& dir);
void save_session(const Session& session, const std::filesystem::path& dir);

// Scans immediate subdirectories containing manifest.json, sorted by name.
Dataset load_dataset(const std::filesystem::path& dir);

ValidationReport validate_dataset(const Dataset& dataset);

// Checks one session against the documented invariants; informational
// entries (like absent gaze) are included when include_informational is set.
std::vector<ValidationIssue> check_session(const Session& session, bool include_informational);

}  // namespace attnpipe
