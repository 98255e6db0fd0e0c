#include "attnpipe/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "attnpipe/error.hpp"

namespace attnpipe {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Condition c) { return c == Condition::Real ? "Real" : "Virtual"; }

Condition parse_condition(const std::string& s) {
  if (s == "Real") return Condition::Real;
  if (s == "Virtual") return Condition::Virtual;
  throw Error(ErrorCode::InvariantViolation, "condition label must be Real or Virtual, got '" + s + "'");
}

std::optional<std::size_t> ElectrodeMontage::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == label) return i;
  return std::nullopt;
}

namespace {

std::array<double, 3> sphere_point(double polar_deg, double azimuth_deg) {
  const double th = polar_deg * M_PI / 180.0;
  const double ph = azimuth_deg * M_PI / 180.0;
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

std::array<double, 3> arc_midpoint(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  std::array<double, 3> m{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  const double norm = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
  for (double& v : m) v /= norm;
  return m;
}

ElectrodeMontage build_default16() {
  // Outer ring electrodes sit 72 degrees from the vertex; F3/F4/P3/P4 are
  // great-circle midpoints between their outer-ring and midline neighbours.
  const auto fz = sphere_point(36.0, 90.0);
  const auto pz = sphere_point(36.0, 270.0);
  const auto f7 = sphere_point(72.0, 150.0);
  const auto f8 = sphere_point(72.0, 30.0);
  const auto p7 = sphere_point(72.0, 210.0);
  const auto p8 = sphere_point(72.0, 330.0);

  ElectrodeMontage m;
  m.names = {"Cz", "Fp2", "F3", "Fz", "F4", "FT7", "C3", "Fp1",
             "C4", "FT8", "P3", "Pz", "P4", "PO7", "PO8", "Oz"};
  m.positions = {
      {0.0, 0.0, 1.0},            // Cz
      sphere_point(72.0, 60.0),   // Fp2
      arc_midpoint(f7, fz),       // F3
      fz,                         // Fz
      arc_midpoint(f8, fz),       // F4
      sphere_point(72.0, 165.0),  // FT7
      sphere_point(36.0, 180.0),  // C3
      sphere_point(72.0, 120.0),  // Fp1
      sphere_point(36.0, 0.0),    // C4
      sphere_point(72.0, 15.0),   // FT8
      arc_midpoint(p7, pz),       // P3
      pz,                         // Pz
      arc_midpoint(p8, pz),       // P4
      sphere_point(72.0, 225.0),  // PO7
      sphere_point(72.0, 315.0),  // PO8
      sphere_point(72.0, 270.0),  // Oz
  };
  return m;
}

const std::array<const char*, 4> kFieldSizes = {"5x5", "4x3", "7x2", "4x4"};

bool valid_field_size(const std::string& s) {
  return std::find(kFieldSizes.begin(), kFieldSizes.end(), s) != kFieldSizes.end();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double(const std::string& field, const fs::path& file, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::MalformedRow,
                file.filename().string() + " line " + std::to_string(line_no) +
                    ": bad number '" + field + "'");
  return value;
}

long parse_long(const std::string& field, const fs::path& file, std::size_t line_no) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorCode::MalformedRow,
                file.filename().string() + " line " + std::to_string(line_no) +
                    ": bad integer '" + field + "'");
  return value;
}

// Iterates LF-separated lines without copying the whole file into a stream.
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(line, line_no);
    start = end + 1;
  }
}

char* fmt_double(char* out, double v) {
  return out + std::snprintf(out, 32, "%.9g", v);
}

}  // namespace

const ElectrodeMontage& ElectrodeMontage::default16() {
  static const ElectrodeMontage montage = build_default16();
  return montage;
}

std::vector<ValidationIssue> check_session(const Session& s, bool include_informational) {
  std::vector<ValidationIssue> issues;
  auto violation = [&](int trial, const std::string& rule, const std::string& msg) {
    issues.push_back({s.participant_id, trial, rule, msg, false});
  };
  auto info = [&](const std::string& rule, const std::string& msg) {
    if (include_informational) issues.push_back({s.participant_id, -1, rule, msg, true});
  };

  if (s.recording.fs <= 0.0) violation(-1, "fs_positive", "sampling rate must be positive");
  if (s.recording.samples.rows != s.montage.size())
    violation(-1, "channel_count", "recording rows must match montage size");
  for (double v : s.recording.samples.data) {
    if (!std::isfinite(v)) {
      violation(-1, "finite_samples", "recording contains non-finite values");
      break;
    }
  }

  for (const auto& label : s.bad_channels) {
    if (!s.montage.index_of(label))
      violation(-1, "bad_channel_known", "bad channel '" + label + "' not in montage");
  }

  const double span = s.recording.duration();
  std::map<int, int> id_count;
  std::map<Condition, int> cond_count;
  for (const auto& ev : s.events) {
    id_count[ev.trial_id]++;
    cond_count[ev.condition]++;
    if (ev.memory_duration <= 18.0)
      violation(ev.trial_id, "memory_duration", "memory duration must exceed 18 s");
    if (ev.memory_onset < s.recording.t0 ||
        ev.memory_onset + ev.memory_duration > s.recording.t0 + span)
      violation(ev.trial_id, "event_in_span", "memory phase exceeds recording bounds");
    if (!valid_field_size(ev.field_size))
      violation(ev.trial_id, "field_size", "unknown field size '" + ev.field_size + "'");
  }
  for (const auto& [id, count] : id_count) {
    if (count > 1) violation(id, "unique_trial_ids", "duplicated trial id");
  }
  for (const auto& [cond, count] : cond_count) {
    if (count > 20)
      violation(-1, "max_trials_per_condition",
                std::string(to_string(cond)) + " condition has more than 20 trials");
  }

  if (s.gaze) {
    const GazeTrack& g = *s.gaze;
    if (g.x.size() != g.timestamps.size() || g.y.size() != g.timestamps.size() ||
        g.confidence.size() != g.timestamps.size())
      violation(-1, "gaze_columns", "gaze columns must have equal length");
    for (std::size_t i = 1; i < g.timestamps.size(); ++i) {
      if (g.timestamps[i] <= g.timestamps[i - 1]) {
        violation(-1, "gaze_monotonic", "gaze timestamps must be strictly increasing");
        break;
      }
    }
    for (double c : g.confidence) {
      if (c < 0.0 || c > 1.0) {
        violation(-1, "gaze_confidence", "gaze confidence outside [0,1]");
        break;
      }
    }
    if (g.timestamps.size() >= 3) {
      std::vector<double> dt(g.timestamps.size() - 1);
      for (std::size_t i = 1; i < g.timestamps.size(); ++i)
        dt[i - 1] = g.timestamps[i] - g.timestamps[i - 1];
      std::nth_element(dt.begin(), dt.begin() + dt.size() / 2, dt.end());
      const double median = dt[dt.size() / 2];
      const double nominal = 1.0 / 120.0;
      if (median < nominal * 0.8 || median > nominal * 1.2)
        violation(-1, "gaze_rate", "median gaze interval deviates more than 20% from 120 Hz");
    }
  } else {
    info("gaze_absent", "no eye tracking recording for this session");
  }

  return issues;
}

Session load_session(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const fs::path eeg_path = dir / "eeg.csv";
  const fs::path events_path = dir / "events.csv";
  const fs::path gaze_path = dir / "gaze.csv";

  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedRow, "manifest.json: " + std::string(e.what()));
  }

  Session s;
  try {
    s.participant_id = manifest.at("participant_id").get<std::string>();
    s.recording.fs = manifest.at("fs").get<double>();
    s.recording.t0 = manifest.value("t0", 0.0);
    const auto channels = manifest.at("channels").get<std::vector<std::string>>();
    for (const auto& b : manifest.at("bad_channels").get<std::vector<std::string>>())
      s.bad_channels.insert(b);

    const ElectrodeMontage& def = ElectrodeMontage::default16();
    s.montage.names = channels;
    for (const auto& name : channels) {
      auto idx = def.index_of(name);
      if (!idx)
        throw Error(ErrorCode::InvariantViolation, "unknown channel label '" + name + "'");
      s.montage.positions.push_back(def.positions[*idx]);
    }
    std::set<std::string> unique_names(channels.begin(), channels.end());
    if (unique_names.size() != channels.size())
      throw Error(ErrorCode::InvariantViolation, "duplicate channel labels in manifest");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRow, "manifest.json: " + std::string(e.what()));
  }

  // eeg.csv: header of channel labels, one row per time sample.
  {
    const std::string text = read_file(eeg_path);
    const std::size_t n_channels = s.montage.size();
    std::vector<std::vector<double>> columns(n_channels);
    for_each_line(text, [&](const std::string& line, std::size_t line_no) {
      if (line.empty()) return;
      const auto fields = split_csv_line(line);
      if (line_no == 1) {
        if (fields != s.montage.names)
          throw Error(ErrorCode::MalformedRow, "eeg.csv line 1: header does not match manifest channels");
        return;
      }
      if (fields.size() != n_channels)
        throw Error(ErrorCode::MalformedRow,
                    "eeg.csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(n_channels) + " fields, got " + std::to_string(fields.size()));
      for (std::size_t c = 0; c < n_channels; ++c)
        columns[c].push_back(parse_double(fields[c], eeg_path, line_no));
    });
    const std::size_t n_samples = columns.empty() ? 0 : columns[0].size();
    s.recording.samples = Matrix(n_channels, n_samples);
    for (std::size_t c = 0; c < n_channels; ++c)
      std::copy(columns[c].begin(), columns[c].end(), s.recording.samples.row(c));
  }

  // events.csv
  {
    const std::string text = read_file(events_path);
    for_each_line(text, [&](const std::string& line, std::size_t line_no) {
      if (line.empty()) return;
      if (line_no == 1) {
        if (line != "trial_id,condition,memory_onset,memory_duration,field_size")
          throw Error(ErrorCode::MalformedRow, "events.csv line 1: unexpected header");
        return;
      }
      const auto fields = split_csv_line(line);
      if (fields.size() != 5)
        throw Error(ErrorCode::MalformedRow,
                    "events.csv line " + std::to_string(line_no) + ": expected 5 fields");
      TrialEvent ev;
      ev.trial_id = static_cast<int>(parse_long(fields[0], events_path, line_no));
      ev.condition = parse_condition(fields[1]);
      ev.memory_onset = parse_double(fields[2], events_path, line_no);
      ev.memory_duration = parse_double(fields[3], events_path, line_no);
      ev.field_size = fields[4];
      s.events.push_back(ev);
    });
  }

  // gaze.csv (optional)
  if (fs::exists(gaze_path)) {
    GazeTrack g;
    const std::string text = read_file(gaze_path);
    for_each_line(text, [&](const std::string& line, std::size_t line_no) {
      if (line.empty()) return;
      if (line_no == 1) {
        if (line != "timestamp,x,y,confidence")
          throw Error(ErrorCode::MalformedRow, "gaze.csv line 1: unexpected header");
        return;
      }
      const auto fields = split_csv_line(line);
      if (fields.size() != 4)
        throw Error(ErrorCode::MalformedRow,
                    "gaze.csv line " + std::to_string(line_no) + ": expected 4 fields");
      g.timestamps.push_back(parse_double(fields[0], gaze_path, line_no));
      g.x.push_back(parse_double(fields[1], gaze_path, line_no));
      g.y.push_back(parse_double(fields[2], gaze_path, line_no));
      g.confidence.push_back(parse_double(fields[3], gaze_path, line_no));
    });
    s.gaze = std::move(g);
  }

  const auto issues = check_session(s, false);
  if (!issues.empty()) {
    const auto& first = issues.front();
    throw Error(ErrorCode::InvariantViolation, first.rule + ": " + first.message);
  }
  return s;
}

void save_session(const Session& s, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(ErrorCode::IoFailure, "cannot create directory " + dir.string());

  auto write_file = [&](const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + p.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + p.string());
  };

  json manifest;
  manifest["participant_id"] = s.participant_id;
  manifest["fs"] = s.recording.fs;
  manifest["t0"] = s.recording.t0;
  manifest["channels"] = s.montage.names;
  manifest["bad_channels"] = std::vector<std::string>(s.bad_channels.begin(), s.bad_channels.end());
  manifest["has_gaze"] = s.gaze.has_value();
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  {
    std::string out;
    const std::size_t n_channels = s.recording.n_channels();
    const std::size_t n_samples = s.recording.n_samples();
    out.reserve(n_samples * n_channels * 12 + 256);
    for (std::size_t c = 0; c < n_channels; ++c) {
      if (c) out.push_back(',');
      out += s.montage.names[c];
    }
    out.push_back('\n');
    char buf[40];
    for (std::size_t t = 0; t < n_samples; ++t) {
      for (std::size_t c = 0; c < n_channels; ++c) {
        char* end = fmt_double(buf, s.recording.samples(c, t));
        if (c) out.push_back(',');
        out.append(buf, end);
      }
      out.push_back('\n');
    }
    write_file(dir / "eeg.csv", out);
  }

  {
    std::string out = "trial_id,condition,memory_onset,memory_duration,field_size\n";
    char buf[40];
    for (const auto& ev : s.events) {
      out += std::to_string(ev.trial_id);
      out.push_back(',');
      out += to_string(ev.condition);
      out.push_back(',');
      out.append(buf, fmt_double(buf, ev.memory_onset));
      out.push_back(',');
      out.append(buf, fmt_double(buf, ev.memory_duration));
      out.push_back(',');
      out += ev.field_size;
      out.push_back('\n');
    }
    write_file(dir / "events.csv", out);
  }

  if (s.gaze) {
    const GazeTrack& g = *s.gaze;
    std::string out = "timestamp,x,y,confidence\n";
    out.reserve(g.size() * 48 + 64);
    char buf[40];
    for (std::size_t i = 0; i < g.size(); ++i) {
      out.append(buf, fmt_double(buf, g.timestamps[i]));
      out.push_back(',');
      out.append(buf, fmt_double(buf, g.x[i]));
      out.push_back(',');
      out.append(buf, fmt_double(buf, g.y[i]));
      out.push_back(',');
      out.append(buf, fmt_double(buf, g.confidence[i]));
      out.push_back('\n');
    }
    write_file(dir / "gaze.csv", out);
  }
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingFile, dir.string());
  std::vector<fs::path> session_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
      session_dirs.push_back(entry.path());
  }
  std::sort(session_dirs.begin(), session_dirs.end());

  Dataset d;
  std::set<std::string> ids;
  for (const auto& p : session_dirs) {
    d.sessions.push_back(load_session(p));
    if (!ids.insert(d.sessions.back().participant_id).second)
      throw Error(ErrorCode::InvariantViolation,
                  "duplicate participant id '" + d.sessions.back().participant_id + "'");
  }
  return d;
}

ValidationReport validate_dataset(const Dataset& dataset) {
  ValidationReport report;
  std::set<std::string> ids;
  for (const auto& s : dataset.sessions) {
    if (!ids.insert(s.participant_id).second)
      report.entries.push_back(
          {s.participant_id, -1, "unique_participants", "duplicate participant id", false});
    auto issues = check_session(s, true);
    report.entries.insert(report.entries.end(), issues.begin(), issues.end());
  }
  return report;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::TooFewGoodChannels: return "TooFewGoodChannels";
    case ErrorCode::BandOutOfRange: return "BandOutOfRange";
    case ErrorCode::DegenerateEpoch: return "DegenerateEpoch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularComposite: return "SingularComposite";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::NameMismatch: return "NameMismatch";
    case ErrorCode::TooFewWindows: return "TooFewWindows";
    case ErrorCode::TooFewTrials: return "TooFewTrials";
    case ErrorCode::UnknownParticipant: return "UnknownParticipant";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::TrialOutOfBounds: return "TrialOutOfBounds";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingGaze: return "MissingGaze";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::ConnectionLost: return "ConnectionLost";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
  }
  return "UnknownError";
}

}  // namespace attnpipe
