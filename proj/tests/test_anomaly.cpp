#include "loopclean/anomaly.hpp"

#include <cmath>

#include "doctest.h"
#include "loopclean/errors.hpp"
#include "loopclean/rng.hpp"
#include "loopclean/synthetic.hpp"

using namespace loopclean;

namespace {

ScenarioConfig base_scenario(std::uint64_t seed, std::vector<std::string> detectors, int days) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.detectors = std::move(detectors);
  cfg.start_date = {2015, 5, 4};
  cfg.days = days;
  cfg.timezone = "US/Pacific";
  RegimeSpec light{"light", 0.3, {62, 2, 4}, Eigen::Vector3d(9, 1, 2.25).asDiagonal(), {{0, 6}, {21, 24}}};
  RegimeSpec free_flow{"free", 0.4, {56, 8, 13}, Eigen::Vector3d(9, 4, 6.25).asDiagonal(), {{6, 16}, {18, 21}}};
  RegimeSpec congested{"congested", 0.3, {18, 12, 55}, Eigen::Vector3d(25, 4, 64).asDiagonal(), {{16, 18}}};
  cfg.regimes = {light, free_flow, congested};
  return cfg;
}

void add_cluster_anomaly(ScenarioConfig& cfg, const std::string& detector, double fraction) {
  AnomalySpec cluster;
  cluster.kind = AnomalyKind::AnomalousCluster;
  cluster.detector_id = detector;
  cluster.fraction = fraction;
  cluster.primary_share = 0.95;
  cluster.values = {2, 1, 100};
  cluster.stddev = {1, 0.5, 0.5};
  cfg.anomalies.push_back(cluster);
}

FitOptions fit_options(int k) {
  FitOptions options;
  options.k = k;
  options.seed = 7;
  options.restarts = 8;
  return options;
}

const SegmentKey kSegment{"I-405", Direction::NB};

}  // namespace

TEST_CASE("report counts, fractions, and detector concentration") {
  const ScenarioConfig cfg = base_scenario(11, {"det-01", "det-02", "det-03"}, 1);
  const Dataset dataset = generate_synthetic(cfg);
  const FitResult fit = fit_model(dataset, fit_options(3), kSegment, TemporalGroup::All);
  const ScoringResult scored = score_dataset(dataset, fit.model);
  const ClusterReport report = cluster_report(fit.model, scored);

  std::size_t members = 0;
  double fractions = 0.0;
  for (const auto& c : report.clusters) {
    members += c.member_count;
    fractions += c.member_fraction;
    // Detectors contribute evenly, so no cluster is single-detector.
    CHECK(c.top_detector_share < 0.6);
    CHECK(c.top_detector_share > 0.0);
  }
  CHECK(members == report.scored_rows);
  CHECK(members == dataset.size());
  CHECK(fractions == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a cluster whose members all share a detector reports share 1.0") {
  // Hand-built scoring result: report arithmetic must be exact.
  ClusterModel model;
  model.k = 2;
  model.centers_raw = {{20, 12, 55}, {60, 8, 10}};
  model.centers_std = model.centers_raw;
  model.covariance = Eigen::Matrix3d::Identity();
  model.inverse_covariance = Eigen::Matrix3d::Identity();
  model.metadata.segment = kSegment;

  ScoringResult scored;
  scored.model_fingerprint = model.fingerprint();
  auto add_row = [&](const std::string& detector, int regime) {
    ScoredObservation row;
    row.observation.detector_id = detector;
    row.observation.segment = kSegment;
    row.observation.timestamp = static_cast<Timestamp>(scored.rows.size()) * 20;
    row.observation.speed = 50.0;
    row.observation.volume = 5;
    row.observation.occupancy = 20.0;
    row.score = Score{regime, 0.5, DistanceBand::Good, false};
    scored.rows.push_back(std::move(row));
  };
  for (int i = 0; i < 7; ++i) add_row("det-X", 0);  // cluster 0: one detector only
  add_row("det-01", 1);
  add_row("det-02", 1);
  add_row("det-02", 1);

  const ClusterReport report = cluster_report(model, scored);
  CHECK(report.scored_rows == 10);
  CHECK(report.clusters[0].member_count == 7);
  CHECK(report.clusters[0].top_detector == "det-X");
  CHECK(report.clusters[0].top_detector_share == 1.0);
  CHECK(report.clusters[0].member_fraction == 0.7);
  CHECK(report.clusters[1].top_detector == "det-02");
  CHECK(report.clusters[1].top_detector_share == doctest::Approx(2.0 / 3.0));

  // A uniform mix across 10 detectors puts the top share at exactly 1/10.
  ScoringResult uniform;
  uniform.model_fingerprint = model.fingerprint();
  for (int d = 0; d < 10; ++d) {
    for (int i = 0; i < 4; ++i) {
      ScoredObservation row;
      row.observation.detector_id = "det-" + std::to_string(d);
      row.observation.segment = kSegment;
      row.observation.timestamp = static_cast<Timestamp>(d * 100 + i * 20);
      row.observation.speed = 21.0;
      row.observation.volume = 12;
      row.observation.occupancy = 54.0;
      row.score = Score{0, 1.0, DistanceBand::Good, false};
      uniform.rows.push_back(std::move(row));
    }
  }
  const ClusterReport uniform_report = cluster_report(model, uniform);
  CHECK(uniform_report.clusters[0].top_detector_share == 0.1);
}

TEST_CASE("injected single-detector cluster dominates its report entry") {
  ScenarioConfig cfg = base_scenario(13, {"det-01", "det-02"}, 1);
  add_cluster_anomaly(cfg, "det-02", 0.05);
  cfg.anomalies.back().primary_share = 1.0;
  const Dataset dataset = generate_synthetic(cfg);
  const FitResult fit = fit_model(dataset, fit_options(4), kSegment, TemporalGroup::All);
  const ScoringResult scored = score_dataset(dataset, fit.model);
  const ClusterReport report = cluster_report(fit.model, scored);

  bool found = false;
  for (const auto& c : report.clusters) {
    if (c.center_raw[2] > 90.0) {
      found = true;
      CHECK(c.top_detector == "det-02");
      // A few organic rows may land in the cluster, so the share is near 1
      // rather than exactly 1.
      CHECK(c.top_detector_share >= 0.95);
    }
  }
  CHECK(found);
}

TEST_CASE("mismatched scoring result is rejected") {
  const ScenarioConfig cfg = base_scenario(17, {"det-01"}, 1);
  const Dataset dataset = generate_synthetic(cfg);
  const FitResult fit3 = fit_model(dataset, fit_options(3), kSegment, TemporalGroup::All);
  const FitResult fit4 = fit_model(dataset, fit_options(4), kSegment, TemporalGroup::All);
  const ScoringResult scored = score_dataset(dataset, fit3.model);
  CHECK_THROWS_AS(cluster_report(fit4.model, scored), ModelMismatch);
}

TEST_CASE("flag rules: stuck pattern, dominance, and clean centers") {
  ClusterReport report;
  report.scored_rows = 10000;

  ClusterStats stuck;
  stuck.cluster_index = 0;
  stuck.center_raw = {2, 1, 100};
  stuck.member_count = 380;
  stuck.member_fraction = 0.038;
  stuck.top_detector = "det-02";
  stuck.top_detector_share = 0.5;  // occupancy rule alone must fire

  ClusterStats dominated;
  dominated.cluster_index = 1;
  dominated.center_raw = {45, 6, 20};
  dominated.member_count = 1500;
  dominated.member_fraction = 0.15;
  dominated.top_detector = "det-07";
  dominated.top_detector_share = 0.97;

  ClusterStats clean;
  clean.cluster_index = 2;
  clean.center_raw = {60, 8, 9};
  clean.member_count = 8120;
  clean.member_fraction = 0.812;
  clean.top_detector = "det-01";
  clean.top_detector_share = 0.34;

  ClusterStats tiny_dominated;  // dominated but below the fraction floor
  tiny_dominated.cluster_index = 3;
  tiny_dominated.center_raw = {50, 5, 15};
  tiny_dominated.member_count = 50;
  tiny_dominated.member_fraction = 0.005;
  tiny_dominated.top_detector = "det-03";
  tiny_dominated.top_detector_share = 1.0;

  report.clusters = {stuck, dominated, clean, tiny_dominated};
  const ClusterReport flagged = flag_anomalous_clusters(report);
  CHECK(flagged.clusters[0].flagged);
  CHECK(flagged.clusters[0].flag_reason == "stuck_high_occupancy");
  CHECK(flagged.clusters[1].flagged);
  CHECK(flagged.clusters[1].flag_reason == "single_detector_dominated");
  CHECK(!flagged.clusters[2].flagged);
  CHECK(!flagged.clusters[3].flagged);

  // Determinism: same report and rules, same flags.
  const ClusterReport again = flag_anomalous_clusters(report);
  for (std::size_t i = 0; i < flagged.clusters.size(); ++i) {
    CHECK(again.clusters[i].flagged == flagged.clusters[i].flagged);
    CHECK(again.clusters[i].flag_reason == flagged.clusters[i].flag_reason);
  }
}

TEST_CASE("drift of a set against itself is exactly zero") {
  const std::vector<Eigen::Vector3d> centers = {{0.5, -1, 2}, {3, 3, 3}, {-2, 0, 1}};
  const DriftResult drift = cluster_set_distance(centers, centers);
  CHECK(drift.value == 0.0);
  for (double c : drift.contributions) CHECK(c == 0.0);
}

TEST_CASE("hand-checked 3-4-5 drift") {
  const DriftResult drift = cluster_set_distance({{0, 0, 0}}, {{3, 4, 0}});
  CHECK(drift.value == 5.0);
}

TEST_CASE("drift is directional") {
  const std::vector<Eigen::Vector3d> a = {{0, 0, 0}};
  const std::vector<Eigen::Vector3d> b = {{0, 0, 0}, {10, 0, 0}};
  CHECK(cluster_set_distance(a, b).value == 0.0);
  CHECK(cluster_set_distance(b, a).value == 10.0);
}

TEST_CASE("moving one center away from its match strictly increases drift") {
  Rng rng(19);
  const std::vector<Eigen::Vector3d> a = {{0, 0, 0}, {10, 0, 0}, {0, 10, 0}};
  double previous = 0.0;
  for (double delta : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    std::vector<Eigen::Vector3d> b = a;
    b[1][0] += delta;  // still closer to its own match than to the others
    const double value = cluster_set_distance(a, b).value;
    CHECK(value == doctest::Approx(delta).epsilon(1e-12));
    if (delta > 0) CHECK(value > previous);
    previous = value;
  }
  (void)rng;
}

TEST_CASE("empty center sets are rejected") {
  CHECK_THROWS_AS(cluster_set_distance({}, {{1, 2, 3}}), EmptyCenterSet);
  CHECK_THROWS_AS(cluster_set_distance({{1, 2, 3}}, {}), EmptyCenterSet);
}

TEST_CASE("model drift compares in the baseline's standardized basis") {
  const ScenarioConfig clean_a = base_scenario(101, {"det-01", "det-02"}, 2);
  ScenarioConfig anomalous = base_scenario(103, {"det-01", "det-02"}, 2);
  add_cluster_anomaly(anomalous, "det-02", 0.038);

  const Dataset dataset_a = generate_synthetic(clean_a);
  const Dataset dataset_b = generate_synthetic(anomalous);
  const ClusterModel model_a =
      fit_model(dataset_a, fit_options(3), kSegment, TemporalGroup::All).model;
  const ClusterModel model_b =
      fit_model(dataset_b, fit_options(3), kSegment, TemporalGroup::All).model;

  const DriftResult self = cluster_set_distance(model_a, model_a);
  CHECK(self.value == 0.0);

  const DriftResult drift = cluster_set_distance(model_a, model_b);
  CHECK(drift.value > 0.0);
  CHECK(drift.contributions.size() == 3);
  double sum = 0.0;
  for (double c : drift.contributions) sum += c;
  CHECK(drift.value == doctest::Approx(sum).epsilon(1e-12));
  CHECK(drift.basis.substr(0, 12) == "standardized");

  // The symmetric variant takes the larger direction.
  const DriftResult forward = cluster_set_distance(model_a, model_b, false);
  const DriftResult symmetric = cluster_set_distance(model_a, model_b, true);
  CHECK(symmetric.value >= forward.value);
}

TEST_CASE("refit with an extra cluster isolates a planted anomaly") {
  ScenarioConfig anomalous = base_scenario(29, {"det-01", "det-02", "det-03", "det-04"}, 2);
  add_cluster_anomaly(anomalous, "det-03", 0.038);
  const Dataset dataset = generate_synthetic(anomalous);

  const RefitResult refit =
      refit_with_extra_cluster(dataset, 3, fit_options(3), kSegment, TemporalGroup::All);
  CHECK(refit.model.k == 4);
  int flagged = 0;
  for (const auto& c : refit.report.clusters) {
    if (c.flagged) {
      ++flagged;
      CHECK(c.member_fraction == doctest::Approx(0.038).epsilon(0.2));
      CHECK(c.top_detector == "det-03");
      CHECK(c.top_detector_share >= 0.9);
    }
  }
  CHECK(flagged == 1);
}

TEST_CASE("refit on clean data splits a regime without flags") {
  const ScenarioConfig cfg = base_scenario(31, {"det-01", "det-02", "det-03"}, 1);
  const Dataset dataset = generate_synthetic(cfg);
  const RefitResult refit =
      refit_with_extra_cluster(dataset, 3, fit_options(3), kSegment, TemporalGroup::All);
  CHECK(refit.model.k == 4);
  for (const auto& c : refit.report.clusters) CHECK(!c.flagged);
}

TEST_CASE("refit from one blob yields two unflagged sub-centers") {
  ScenarioConfig cfg = base_scenario(37, {"det-01", "det-02"}, 1);
  cfg.regimes = {RegimeSpec{"only", 1.0, {55, 8, 14}, Eigen::Vector3d(9, 4, 9).asDiagonal(), {}}};
  const Dataset dataset = generate_synthetic(cfg);
  const RefitResult refit =
      refit_with_extra_cluster(dataset, 1, fit_options(1), kSegment, TemporalGroup::All);
  CHECK(refit.model.k == 2);
  for (const auto& c : refit.report.clusters) CHECK(!c.flagged);
}
