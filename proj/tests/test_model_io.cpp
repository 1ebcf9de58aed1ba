#include <algorithm>

#include "doctest.h"
#include "loopclean/cluster_model.hpp"
#include "loopclean/errors.hpp"
#include "loopclean/rng.hpp"
#include "loopclean/scoring.hpp"
#include "test_support.hpp"

using namespace loopclean;
using loopclean::testing::TempDir;

namespace {

std::vector<Eigen::Vector3d> training_points(std::uint64_t seed, int n = 3000) {
  Rng rng(seed);
  std::vector<Eigen::Vector3d> raw;
  for (int i = 0; i < n; ++i) {
    switch (i % 3) {
      case 0: raw.emplace_back(62 + 3 * rng.normal(), 2 + rng.normal(), 4 + rng.normal()); break;
      case 1: raw.emplace_back(55 + 3 * rng.normal(), 8 + 2 * rng.normal(), 13 + 2 * rng.normal()); break;
      default: raw.emplace_back(18 + 4 * rng.normal(), 12 + 2 * rng.normal(), 55 + 6 * rng.normal());
    }
  }
  return raw;
}

ClusterModel fit_on(const std::vector<Eigen::Vector3d>& raw, int k) {
  const StandardizeResult standardized = standardize(raw);
  const KMeansResult km = kmeans_fit(standardized.points, k, 9, 8);
  ModelMetadata meta;
  meta.segment = SegmentKey{"I-405", Direction::NB};
  meta.group = TemporalGroup::TueWedThu;
  meta.date_range = "2015-05-01T00:00:00Z..2015-05-31T23:59:40Z";
  meta.seed = 9;
  meta.restarts = 8;
  meta.training_rows = raw.size();
  return finalize_model(km, standardized.params, raw, meta);
}

}  // namespace

TEST_CASE("finalize sorts the center triple (55, 20, 61) to (20, 55, 61)") {
  // Identity standardization so the raw speeds are the standardized ones.
  KMeansResult km;
  km.centers = {{55, 8, 10}, {20, 12, 55}, {61, 2, 4}};
  km.average_squared_error = 0.1;
  std::vector<Eigen::Vector3d> raw;
  Rng rng(71);
  for (int i = 0; i < 100; ++i) raw.emplace_back(rng.normal(), rng.normal(), rng.normal());
  const ClusterModel model = finalize_model(km, Standardization{}, raw, ModelMetadata{});
  REQUIRE(model.k == 3);
  CHECK(model.centers_raw[0][0] == 20.0);
  CHECK(model.centers_raw[1][0] == 55.0);
  CHECK(model.centers_raw[2][0] == 61.0);
}

TEST_CASE("finalize orders centers by ascending speed") {
  const auto raw = training_points(1);
  const ClusterModel model = fit_on(raw, 3);
  REQUIRE(model.k == 3);
  CHECK(model.centers_raw[0][0] < model.centers_raw[1][0]);
  CHECK(model.centers_raw[1][0] < model.centers_raw[2][0]);
  // Raw and standardized centers describe the same points.
  for (int c = 0; c < 3; ++c) {
    const Eigen::Vector3d back =
        model.standardization.from_std(model.centers_std[static_cast<std::size_t>(c)]);
    CHECK((back - model.centers_raw[static_cast<std::size_t>(c)]).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("k=1 center is the raw feature mean") {
  const auto raw = training_points(2, 1200);
  const ClusterModel model = fit_on(raw, 1);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : raw) mean += p;
  mean /= static_cast<double>(raw.size());
  CHECK((model.centers_raw[0] - mean).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("saved and reloaded model scores identically") {
  TempDir dir;
  const auto raw = training_points(3);
  const ClusterModel model = fit_on(raw, 3);
  const std::string path = dir.file("model.json");
  model.save(path);
  const ClusterModel reloaded = ClusterModel::load(path);

  CHECK(reloaded.fingerprint() == model.fingerprint());
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector3d x(rng.uniform01() * 80, rng.uniform01() * 16, rng.uniform01() * 90);
    const Score a = score_vector(x, model);
    const Score b = score_vector(x, reloaded);
    CHECK(a.regime_index == b.regime_index);
    CHECK(a.distance == b.distance);  // bit-identical round trip
  }
}

TEST_CASE("tampered models fail validation on load") {
  TempDir dir;
  const ClusterModel model = fit_on(training_points(4), 2);
  const std::string good = model.to_json_text();

  {
    std::string broken = good;
    const auto pos = broken.find("\"inverse_covariance\"");
    REQUIRE(pos != std::string::npos);
    broken.replace(broken.find_first_of("0123456789-", pos + 21), 1, "9");
    const std::string path = dir.file("broken.json");
    loopclean::testing::write_file(path, broken);
    CHECK_THROWS_AS(ClusterModel::load(path), Error);
  }
  {
    std::string wrong_version = good;
    wrong_version.replace(wrong_version.find("\"format_version\": 1"),
                          std::string("\"format_version\": 1").size(), "\"format_version\": 99");
    const std::string path = dir.file("version.json");
    loopclean::testing::write_file(path, wrong_version);
    CHECK_THROWS_AS(ClusterModel::load(path), Error);
  }
  CHECK_THROWS_AS(ClusterModel::load(dir.file("missing.json")), FileUnreadable);
}

TEST_CASE("fingerprint tracks content") {
  const ClusterModel a = fit_on(training_points(5), 2);
  ClusterModel b = a;
  CHECK(a.fingerprint() == b.fingerprint());
  b.metadata.seed ^= 1;
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("fit_model selects k by knee on planted regimes") {
  Dataset dataset;
  Rng rng(55);
  const Timestamp start = *parse_iso8601("2015-05-06T00:00:00Z");
  for (int i = 0; i < 6000; ++i) {
    Observation obs;
    obs.detector_id = "det-0" + std::to_string(i % 3 + 1);
    obs.segment = SegmentKey{"I-405", Direction::NB};
    obs.timestamp = start + i * 20;
    switch (i % 3) {
      case 0:
        obs.speed = 62 + 2 * rng.normal();
        obs.volume = static_cast<int>(std::max(0.0, 2 + rng.normal()));
        obs.occupancy = std::clamp(4 + rng.normal(), 0.0, 100.0);
        break;
      case 1:
        obs.speed = 55 + 2 * rng.normal();
        obs.volume = static_cast<int>(std::max(0.0, 9 + rng.normal()));
        obs.occupancy = std::clamp(14 + rng.normal(), 0.0, 100.0);
        break;
      default:
        obs.speed = std::max(0.0, 16 + 2 * rng.normal());
        obs.volume = static_cast<int>(std::max(0.0, 12 + rng.normal()));
        obs.occupancy = std::clamp(58 + 2 * rng.normal(), 0.0, 100.0);
    }
    dataset.observations.push_back(std::move(obs));
  }
  sort_dataset(dataset);

  FitOptions options;
  options.seed = 13;
  options.restarts = 6;
  const FitResult result =
      fit_model(dataset, options, SegmentKey{"I-405", Direction::NB}, TemporalGroup::All);
  REQUIRE(result.curve.has_value());
  CHECK(result.model.k == 3);
  CHECK(result.model.metadata.training_rows == 6000);
  CHECK(result.model.metadata.date_range.substr(0, 10) == "2015-05-06");
}
