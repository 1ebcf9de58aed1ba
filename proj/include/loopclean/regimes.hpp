#pragma once

#include <string>
#include <vector>

#include "loopclean/scoring.hpp"

namespace loopclean {

struct RegimePoint {
  Timestamp timestamp = 0;
  int regime_index = 0;
  double distance = 0.0;
};

struct GapInterval {
  Timestamp begin = 0;  // first and last unscoreable observation timestamps
  Timestamp end = 0;
};

/// Per-detector regime assignments over time; timestamps strictly increase.
/// Unscoreable observations show up as gaps, not as dropped rows.
struct RegimeSeries {
  std::string detector_id;
  std::vector<RegimePoint> points;
  std::vector<GapInterval> gaps;
};

RegimeSeries regime_series(const ScoringResult& scored, const std::string& detector_id);

struct SmoothOptions {
  int window = 5;          // observations per average
  bool centered = false;   // default is a trailing (causal) window
};

/// Averages raw feature vectors over a rolling window, then assigns and
/// scores the averaged vector. Windows shrink at the edges and skip
/// missing-feature members; a window with no valid member becomes a gap.
/// window=1 reproduces the unsmoothed series exactly.
RegimeSeries smooth_series(const Dataset& raw, const ClusterModel& model,
                           const std::string& detector_id, const SmoothOptions& smooth = {},
                           const ScoringOptions& scoring = {});

std::size_t count_transitions(const RegimeSeries& series);

// timestamp, regime_index, distance, smoothed_regime_index over the union of
// both series' timestamps; absent values stay empty.
void write_series_csv(const RegimeSeries& raw, const RegimeSeries& smoothed,
                      const std::string& path);

}  // namespace loopclean
