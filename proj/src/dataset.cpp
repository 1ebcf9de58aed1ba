#include "loopclean/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "loopclean/csv.hpp"
#include "loopclean/errors.hpp"

namespace loopclean {

std::map<std::string, std::size_t> RejectionReport::counts_by_reason() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : rejections) ++counts[r.reason];
  return counts;
}

namespace {

std::string header_line(const CsvSchema& s) {
  return s.detector_id + "," + s.highway + "," + s.direction + "," + s.timestamp + "," + s.speed +
         "," + s.volume + "," + s.occupancy;
}

}  // namespace

ReadResult read_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in = open_csv_input(path);
  ReadResult result;
  result.dataset.provenance = path;

  std::string line;
  long line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || is_comment_line(line)) continue;
    if (!header_seen) {
      if (line != header_line(schema)) {
        throw HeaderMismatch("header mismatch in " + path + ": expected '" + header_line(schema) +
                             "', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    ++result.report.rows_seen;
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      result.report.rejections.push_back({line_number, "wrong field count"});
      continue;
    }
    RawRecord record{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                     std::string(fields[3]), std::string(fields[4]), std::string(fields[5]),
                     std::string(fields[6]), line_number};
    auto validated = validate_observation(record);
    if (auto* obs = std::get_if<Observation>(&validated)) {
      result.dataset.observations.push_back(std::move(*obs));
      ++result.report.rows_kept;
    } else {
      result.report.rejections.push_back(std::get<Rejection>(validated));
    }
  }
  if (!header_seen && result.report.rows_seen == 0 && line_number == 0) {
    throw HeaderMismatch("empty file, no header: " + path);
  }
  sort_dataset(result.dataset);
  return result;
}

void write_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out = open_csv_output(path, "kind=observations");
  out << header_line(CsvSchema{}) << '\n';
  for (const auto& obs : dataset.observations) {
    out << obs.detector_id << ',' << obs.segment.highway << ','
        << direction_name(obs.segment.direction) << ',' << format_iso8601(obs.timestamp) << ',';
    if (obs.speed) out << format_double(*obs.speed);
    out << ',';
    if (obs.volume) out << *obs.volume;
    out << ',';
    if (obs.occupancy) out << format_double(*obs.occupancy);
    out << '\n';
  }
}

void sort_dataset(Dataset& dataset) {
  auto& obs = dataset.observations;
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (obs[a].timestamp != obs[b].timestamp) return obs[a].timestamp < obs[b].timestamp;
    if (obs[a].detector_id != obs[b].detector_id) return obs[a].detector_id < obs[b].detector_id;
    return a < b;
  });
  std::vector<Observation> sorted;
  sorted.reserve(obs.size());
  for (std::size_t i : order) sorted.push_back(std::move(obs[i]));
  obs = std::move(sorted);
}

Dataset partition(const Dataset& dataset, const SegmentKey& segment, TemporalGroup group,
                  const TimeZone& tz) {
  Dataset out;
  out.provenance = dataset.provenance + " [" + segment.highway + "/" +
                   std::string(direction_name(segment.direction)) + "/" +
                   std::string(temporal_group_name(group)) + "]";
  for (const auto& obs : dataset.observations) {
    if (obs.segment == segment && in_temporal_group(obs.timestamp, tz, group)) {
      out.observations.push_back(obs);
    }
  }
  return out;
}

}  // namespace loopclean
