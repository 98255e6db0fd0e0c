#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "attnpipe/data_model.hpp"

namespace attnpipe {

// Five 3 s windows per trial, offset 3..18 s after memory onset.
inline constexpr int kWindowsPerTrial = 5;
inline constexpr double kWindowSeconds = 3.0;
inline constexpr double kFirstWindowOffset = 3.0;

struct EpochWindow {
  std::string participant_id;
  int trial_id = 0;
  Condition condition = Condition::Real;
  int position_index = 0;  // 0..4
  double t_start = 0.0;    // seconds, absolute
  double fs = 500.0;
  Matrix eeg;              // channels x (3 s * fs) samples
  std::optional<GazeTrack> gaze_slice;
};

struct ExtractReport {
  struct SkippedTrial {
    int trial_id;
    std::string reason;
  };
  std::vector<SkippedTrial> skipped;
};

// Expects a session whose recording has already been preprocessed.
// Trials whose memory phase does not fit the recording are skipped and
// reported, not fatal.
std::vector<EpochWindow> extract_windows(const Session& session,
                                         ExtractReport* report = nullptr);

using WindowTally = std::map<std::tuple<std::string, Condition, int>, std::size_t>;

WindowTally window_counts(const std::vector<EpochWindow>& windows);

}  // namespace attnpipe
