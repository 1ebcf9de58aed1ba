#include "loopclean/anomaly.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>

#include "json.hpp"
#include "loopclean/errors.hpp"

namespace loopclean {

namespace {

using nlohmann::json;

json vec3_json(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

std::string ClusterReport::to_json_text() const {
  json j;
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(model_fingerprint));
  j["model"] = fp;
  j["scored_rows"] = scored_rows;
  json clusters_json = json::array();
  for (const auto& c : clusters) {
    clusters_json.push_back({{"cluster_index", c.cluster_index},
                             {"center", vec3_json(c.center_raw)},
                             {"member_count", c.member_count},
                             {"member_fraction", c.member_fraction},
                             {"top_detector", c.top_detector},
                             {"top_detector_share", c.top_detector_share},
                             {"flagged", c.flagged},
                             {"flag_reason", c.flag_reason}});
  }
  j["clusters"] = clusters_json;
  return j.dump(2) + "\n";
}

ClusterReport cluster_report(const ClusterModel& model, const ScoringResult& scored) {
  if (scored.model_fingerprint != model.fingerprint()) {
    throw ModelMismatch("scored rows were produced by a different model");
  }
  ClusterReport report;
  report.model_fingerprint = scored.model_fingerprint;

  std::vector<std::map<std::string, std::size_t>> per_detector(
      static_cast<std::size_t>(model.k));
  std::vector<std::size_t> counts(static_cast<std::size_t>(model.k), 0);
  for (const auto& row : scored.rows) {
    if (!row.score) continue;
    const auto c = static_cast<std::size_t>(row.score->regime_index);
    if (c >= counts.size()) throw ModelMismatch("regime index outside the model's range");
    ++counts[c];
    ++per_detector[c][row.observation.detector_id];
    ++report.scored_rows;
  }

  for (int c = 0; c < model.k; ++c) {
    ClusterStats stats;
    stats.cluster_index = c;
    stats.center_raw = model.centers_raw[static_cast<std::size_t>(c)];
    stats.member_count = counts[static_cast<std::size_t>(c)];
    stats.member_fraction =
        report.scored_rows == 0
            ? 0.0
            : static_cast<double>(stats.member_count) / static_cast<double>(report.scored_rows);
    for (const auto& [detector, count] : per_detector[static_cast<std::size_t>(c)]) {
      const double share = static_cast<double>(count) / static_cast<double>(stats.member_count);
      if (share > stats.top_detector_share) {
        stats.top_detector_share = share;
        stats.top_detector = detector;
      }
    }
    report.clusters.push_back(std::move(stats));
  }
  return report;
}

ClusterReport flag_anomalous_clusters(ClusterReport report, const AnomalyRules& rules) {
  for (auto& c : report.clusters) {
    std::string reasons;
    if (c.center_raw[2] >= rules.stuck_occupancy_min && c.center_raw[0] <= rules.stuck_speed_max) {
      reasons = "stuck_high_occupancy";
    }
    if (c.top_detector_share >= rules.dominance_share_min &&
        c.member_fraction >= rules.dominance_fraction_min) {
      if (!reasons.empty()) reasons += ",";
      reasons += "single_detector_dominated";
    }
    c.flagged = !reasons.empty();
    c.flag_reason = std::move(reasons);
  }
  return report;
}

std::string DriftResult::to_json_text() const {
  json j;
  j["value"] = value;
  j["contributions"] = contributions;
  j["basis"] = basis;
  return j.dump(2) + "\n";
}

DriftResult cluster_set_distance(const std::vector<Eigen::Vector3d>& centers_a,
                                 const std::vector<Eigen::Vector3d>& centers_b,
                                 std::string basis) {
  if (centers_a.empty() || centers_b.empty()) {
    throw EmptyCenterSet("cluster_set_distance: both center sets must be non-empty");
  }
  DriftResult result;
  result.basis = std::move(basis);
  for (const auto& a : centers_a) {
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& b : centers_b) closest = std::min(closest, (a - b).norm());
    result.contributions.push_back(closest);
    result.value += closest;
  }
  return result;
}

DriftResult cluster_set_distance(const ClusterModel& a, const ClusterModel& b, bool symmetric) {
  // Both raw center sets pass through A's standardization, so comparing a
  // model against itself hits exact zeros.
  auto in_a_basis = [&a](const std::vector<Eigen::Vector3d>& raw) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(raw.size());
    for (const auto& center : raw) out.push_back(a.standardization.to_std(center));
    return out;
  };
  const std::vector<Eigen::Vector3d> a_std = in_a_basis(a.centers_raw);
  const std::vector<Eigen::Vector3d> b_std = in_a_basis(b.centers_raw);

  const std::string basis = "standardized[" + a.metadata.segment.highway + "/" +
                            std::string(direction_name(a.metadata.segment.direction)) + "/" +
                            std::string(temporal_group_name(a.metadata.group)) + " " +
                            a.metadata.date_range + "]";
  DriftResult forward = cluster_set_distance(a_std, b_std, basis);
  if (!symmetric) return forward;
  DriftResult backward = cluster_set_distance(b_std, a_std, basis + " (reverse)");
  return backward.value > forward.value ? backward : forward;
}

RefitResult refit_with_extra_cluster(const Dataset& partition, int k_base,
                                     const FitOptions& options, const SegmentKey& segment,
                                     TemporalGroup group, const AnomalyRules& rules) {
  FitOptions refit_options = options;
  refit_options.k = k_base + 1;
  RefitResult result;
  result.model = fit_model(partition, refit_options, segment, group).model;
  const ScoringResult scored = score_dataset(partition, result.model);
  result.report = flag_anomalous_clusters(cluster_report(result.model, scored), rules);
  return result;
}

}  // namespace loopclean
