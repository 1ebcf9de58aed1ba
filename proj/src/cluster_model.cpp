#include "loopclean/cluster_model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "loopclean/errors.hpp"

namespace loopclean {

namespace {

using nlohmann::json;

json vec3_json(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

Eigen::Vector3d vec3_parse(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("model: expected a 3-array");
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json mat3_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Eigen::Matrix3d mat3_parse(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("model: expected a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 3) throw Error("model: expected a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace

void ClusterModel::check_invariants() const {
  if (k < 1) throw Error("model: k must be >= 1");
  if (centers_raw.size() != static_cast<std::size_t>(k) ||
      centers_std.size() != static_cast<std::size_t>(k)) {
    throw Error("model: center count does not match k");
  }
  for (int i = 0; i < 3; ++i) {
    if (!(standardization.stddev[i] > 0)) throw Error("model: stddev must be positive");
  }
  for (std::size_t c = 1; c < centers_raw.size(); ++c) {
    if (centers_raw[c][0] < centers_raw[c - 1][0]) {
      throw Error("model: centers must be ascending by speed");
    }
  }
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, covariance.cwiseAbs().maxCoeff())) {
    throw Error("model: covariance is not symmetric");
  }
  const Eigen::Matrix3d regularized =
      covariance + ridge_epsilon * Eigen::Matrix3d::Identity();
  const double deviation =
      (regularized * inverse_covariance - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (deviation > 1e-8) {
    throw Error("model: covariance * inverse deviates from identity by " +
                std::to_string(deviation));
  }
}

std::string ClusterModel::to_json_text() const {
  json j;
  j["format_version"] = kFormatVersion;
  j["k"] = k;
  j["feature_order"] = json::array({kFeatureOrder[0], kFeatureOrder[1], kFeatureOrder[2]});
  j["standardization"] = {{"mean", vec3_json(standardization.mean)},
                          {"stddev", vec3_json(standardization.stddev)}};
  json raw = json::array();
  json std_centers = json::array();
  for (int c = 0; c < k; ++c) {
    raw.push_back(vec3_json(centers_raw[static_cast<std::size_t>(c)]));
    std_centers.push_back(vec3_json(centers_std[static_cast<std::size_t>(c)]));
  }
  j["centers_raw"] = raw;
  j["centers_std"] = std_centers;
  j["covariance"] = mat3_json(covariance);
  j["inverse_covariance"] = mat3_json(inverse_covariance);
  j["ridge_epsilon"] = ridge_epsilon;
  j["average_squared_error"] = average_squared_error;
  j["metadata"] = {{"highway", metadata.segment.highway},
                   {"direction", std::string(direction_name(metadata.segment.direction))},
                   {"day_group", std::string(temporal_group_name(metadata.group))},
                   {"date_range", metadata.date_range},
                   {"seed", metadata.seed},
                   {"restarts", metadata.restarts},
                   {"training_rows", metadata.training_rows},
                   {"excluded_missing", metadata.excluded_missing}};
  return j.dump(2) + "\n";
}

ClusterModel ClusterModel::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw Error("model: unsupported format_version");
    }
    const auto order = j.at("feature_order").get<std::vector<std::string>>();
    if (order.size() != 3 || order[0] != kFeatureOrder[0] || order[1] != kFeatureOrder[1] ||
        order[2] != kFeatureOrder[2]) {
      throw Error("model: unexpected feature_order");
    }
    ClusterModel m;
    m.k = j.at("k").get<int>();
    m.standardization.mean = vec3_parse(j.at("standardization").at("mean"));
    m.standardization.stddev = vec3_parse(j.at("standardization").at("stddev"));
    for (const auto& c : j.at("centers_raw")) m.centers_raw.push_back(vec3_parse(c));
    for (const auto& c : j.at("centers_std")) m.centers_std.push_back(vec3_parse(c));
    m.covariance = mat3_parse(j.at("covariance"));
    m.inverse_covariance = mat3_parse(j.at("inverse_covariance"));
    m.ridge_epsilon = j.at("ridge_epsilon").get<double>();
    m.average_squared_error = j.at("average_squared_error").get<double>();
    const auto& meta = j.at("metadata");
    m.metadata.segment.highway = meta.at("highway").get<std::string>();
    const auto dir = parse_direction(meta.at("direction").get<std::string>());
    if (!dir) throw Error("model: bad direction");
    m.metadata.segment.direction = *dir;
    const auto group = parse_temporal_group(meta.at("day_group").get<std::string>());
    if (!group) throw Error("model: bad day_group");
    m.metadata.group = *group;
    m.metadata.date_range = meta.at("date_range").get<std::string>();
    m.metadata.seed = meta.at("seed").get<std::uint64_t>();
    m.metadata.restarts = meta.at("restarts").get<int>();
    m.metadata.training_rows = meta.at("training_rows").get<std::size_t>();
    m.metadata.excluded_missing = meta.at("excluded_missing").get<std::size_t>();
    m.check_invariants();
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("bad model field: ") + e.what());
  }
}

std::uint64_t ClusterModel::fingerprint() const { return fnv1a64(to_json_text()); }

void ClusterModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FileUnreadable("cannot open for writing: " + path);
  out << to_json_text();
}

ClusterModel ClusterModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

ClusterModel finalize_model(const KMeansResult& fit, const Standardization& params,
                            const std::vector<Eigen::Vector3d>& raw_training_points,
                            ModelMetadata metadata) {
  ClusterModel model;
  model.k = static_cast<int>(fit.centers.size());
  model.standardization = params;

  std::vector<std::size_t> order(fit.centers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Eigen::Vector3d> raw(fit.centers.size());
  for (std::size_t c = 0; c < fit.centers.size(); ++c) raw[c] = params.from_std(fit.centers[c]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (raw[a][0] != raw[b][0]) return raw[a][0] < raw[b][0];
    return a < b;
  });
  for (std::size_t c : order) {
    model.centers_raw.push_back(raw[c]);
    model.centers_std.push_back(fit.centers[c]);
  }

  model.covariance = estimate_covariance(raw_training_points);
  const RidgeInverse inv = invert_regularized(model.covariance);
  model.inverse_covariance = inv.inverse;
  model.ridge_epsilon = inv.epsilon;
  model.average_squared_error = fit.average_squared_error;
  model.metadata = std::move(metadata);
  model.check_invariants();
  return model;
}

FitResult fit_model(const Dataset& training_partition, const FitOptions& options,
                    const SegmentKey& segment, TemporalGroup group) {
  std::size_t excluded = 0;
  const std::vector<Eigen::Vector3d> raw = complete_feature_rows(training_partition, &excluded);
  StandardizeResult standardized = standardize(raw);

  FitResult result;
  int k = 0;
  if (options.k) {
    k = *options.k;
  } else {
    result.curve = elbow_sweep(standardized.points, options.k_min, options.k_max, options.seed,
                               options.restarts, options.kmeans);
    k = select_k_knee(*result.curve);
  }
  const KMeansResult fit =
      kmeans_fit(standardized.points, k, options.seed, options.restarts, options.kmeans);

  ModelMetadata metadata;
  metadata.segment = segment;
  metadata.group = group;
  if (!training_partition.observations.empty()) {
    metadata.date_range = format_iso8601(training_partition.observations.front().timestamp) + ".." +
                          format_iso8601(training_partition.observations.back().timestamp);
  }
  metadata.seed = options.seed;
  metadata.restarts = options.restarts;
  metadata.training_rows = raw.size();
  metadata.excluded_missing = excluded;

  result.model = finalize_model(fit, standardized.params, raw, std::move(metadata));
  return result;
}

}  // namespace loopclean
