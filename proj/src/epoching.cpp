#include "attnpipe/epoching.hpp"

#include <algorithm>
#include <cmath>

namespace attnpipe {

std::vector<EpochWindow> extract_windows(const Session& session, ExtractReport* report) {
  const Recording& rec = session.recording;
  const std::size_t win_samples =
      static_cast<std::size_t>(std::llround(kWindowSeconds * rec.fs));

  std::vector<EpochWindow> windows;
  for (const auto& ev : session.events) {
    const double memory_end = ev.memory_onset + ev.memory_duration;
    const double last_window_end =
        ev.memory_onset + kFirstWindowOffset + kWindowsPerTrial * kWindowSeconds;
    const long long first_sample =
        std::llround((ev.memory_onset + kFirstWindowOffset - rec.t0) * rec.fs);
    const long long end_sample =
        first_sample + static_cast<long long>(kWindowsPerTrial * win_samples);

    if (first_sample < 0 || end_sample > static_cast<long long>(rec.n_samples()) ||
        last_window_end > memory_end + 1e-9) {
      if (report)
        report->skipped.push_back({ev.trial_id, "memory phase windows exceed recording bounds"});
      continue;
    }

    for (int pos = 0; pos < kWindowsPerTrial; ++pos) {
      EpochWindow w;
      w.participant_id = session.participant_id;
      w.trial_id = ev.trial_id;
      w.condition = ev.condition;
      w.position_index = pos;
      w.fs = rec.fs;
      w.t_start = ev.memory_onset + kFirstWindowOffset + pos * kWindowSeconds;

      const std::size_t start =
          static_cast<std::size_t>(first_sample) + static_cast<std::size_t>(pos) * win_samples;
      w.eeg = Matrix(rec.n_channels(), win_samples);
      for (std::size_t c = 0; c < rec.n_channels(); ++c) {
        const double* src = rec.samples.row(c) + start;
        std::copy(src, src + win_samples, w.eeg.row(c));
      }

      if (session.gaze) {
        const GazeTrack& g = *session.gaze;
        GazeTrack slice;
        const double t_end = w.t_start + kWindowSeconds;
        const auto lo = std::lower_bound(g.timestamps.begin(), g.timestamps.end(), w.t_start);
        const auto hi = std::lower_bound(g.timestamps.begin(), g.timestamps.end(), t_end);
        const std::size_t i0 = static_cast<std::size_t>(lo - g.timestamps.begin());
        const std::size_t i1 = static_cast<std::size_t>(hi - g.timestamps.begin());
        slice.timestamps.assign(g.timestamps.begin() + i0, g.timestamps.begin() + i1);
        slice.x.assign(g.x.begin() + i0, g.x.begin() + i1);
        slice.y.assign(g.y.begin() + i0, g.y.begin() + i1);
        slice.confidence.assign(g.confidence.begin() + i0, g.confidence.begin() + i1);
        w.gaze_slice = std::move(slice);
      }

      windows.push_back(std::move(w));
    }
  }
  return windows;
}

WindowTally window_counts(const std::vector<EpochWindow>& windows) {
  WindowTally tally;
  for (const auto& w : windows)
    tally[{w.participant_id, w.condition, w.position_index}]++;
  return tally;
}

}  // namespace attnpipe
