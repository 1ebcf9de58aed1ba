#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "loopclean/observation.hpp"

namespace loopclean {

struct Dataset {
  std::vector<Observation> observations;
  std::string provenance;  // source path or generator descriptor

  std::size_t size() const { return observations.size(); }
};

struct RejectionReport {
  std::vector<Rejection> rejections;
  std::size_t rows_seen = 0;  // data rows, header excluded
  std::size_t rows_kept = 0;

  std::map<std::string, std::size_t> counts_by_reason() const;
};

// Input column names; the header row must match these, in this order.
struct CsvSchema {
  std::string detector_id = "detector_id";
  std::string highway = "highway";
  std::string direction = "direction";
  std::string timestamp = "timestamp";
  std::string speed = "speed";
  std::string volume = "volume";
  std::string occupancy = "occupancy";
};

struct ReadResult {
  Dataset dataset;
  RejectionReport report;
};

// Reads an observation CSV. Invalid rows are collected in the rejection
// report, never silently dropped. The result is sorted by
// (timestamp, detector_id), so per-detector timestamps are non-decreasing.
ReadResult read_csv(const std::string& path, const CsvSchema& schema = {});

void write_csv(const Dataset& dataset, const std::string& path);

// Total order by (timestamp, detector_id); ties keep input order.
void sort_dataset(Dataset& dataset);

// Observations matching the segment whose local day falls in the group.
Dataset partition(const Dataset& dataset, const SegmentKey& segment, TemporalGroup group,
                  const TimeZone& tz);

}  // namespace loopclean
