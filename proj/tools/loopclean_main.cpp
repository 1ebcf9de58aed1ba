// loopclean -- clean loop-detector data by traffic-regime clustering and
// Mahalanobis outlier detection, then measure the travel-time impact.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "loopclean/anomaly.hpp"
#include "loopclean/cluster_model.hpp"
#include "loopclean/csv.hpp"
#include "loopclean/dataset.hpp"
#include "loopclean/errors.hpp"
#include "loopclean/regimes.hpp"
#include "loopclean/scoring.hpp"
#include "loopclean/synthetic.hpp"
#include "loopclean/traveltime.hpp"

namespace fs = std::filesystem;
using namespace loopclean;

namespace {

struct SelectorOptions {
  std::string segment = "I-405";
  std::string direction = "NB";
  std::string day_group = "all";
  std::string timezone = "US/Pacific";

  SegmentKey segment_key() const {
    const auto dir = parse_direction(direction);
    if (!dir) throw Error("direction must be NB or SB");
    return SegmentKey{segment, *dir};
  }
  TemporalGroup group() const {
    const auto g = parse_temporal_group(day_group);
    if (!g) throw Error("day-group must be all, monfri, tuewedthu, or satsun");
    return *g;
  }
  TimeZone tz() const { return TimeZone::parse(timezone); }
};

void add_selector_flags(CLI::App* cmd, SelectorOptions& sel) {
  cmd->add_option("--segment", sel.segment, "Highway name token");
  cmd->add_option("--direction", sel.direction, "NB or SB");
  cmd->add_option("--day-group", sel.day_group, "all, monfri, tuewedthu, or satsun");
  cmd->add_option("--timezone", sel.timezone, "Local timezone (US/Pacific, UTC, +HH:MM)");
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

Dataset load_partition(const std::string& input, const SelectorOptions& sel,
                       RejectionReport* report_out) {
  const ReadResult read = read_csv(input);
  if (report_out) *report_out = read.report;
  return partition(read.dataset, sel.segment_key(), sel.group(), sel.tz());
}

ClusterModel load_model_file(const std::string& path) {
  if (!fs::exists(path)) throw FileUnreadable("model not found: " + path);
  return ClusterModel::load(path);
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string scenario;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
};

int run_generate(const GenerateArgs& args) {
  ScenarioConfig cfg = ScenarioConfig::load(args.scenario);
  if (args.seed) cfg.seed = *args.seed;
  const Dataset dataset = generate_synthetic(cfg);
  const std::string path = out_path(args.output_dir, "data.csv");
  write_csv(dataset, path);
  std::cout << "generate: rows_in=0 rows_out=" << dataset.size() << " rejections=0 output=" << path
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- elbow

struct ElbowArgs {
  std::string input;
  SelectorOptions sel;
  int k_max = 10;
  std::uint64_t seed = 1;
  int restarts = 10;
  std::optional<int> k_override;
  std::string output_dir = ".";
};

int run_elbow(const ElbowArgs& args) {
  RejectionReport report;
  const Dataset part = load_partition(args.input, args.sel, &report);
  const StandardizeResult standardized = standardize(part);
  const ElbowCurve curve = elbow_sweep(standardized.points, 1, args.k_max, args.seed, args.restarts);
  const int knee = select_k_knee(curve, args.k_override);

  const std::string path = out_path(args.output_dir, "elbow.csv");
  std::ofstream out = open_csv_output(path, "kind=elbow knee_k=" + std::to_string(knee));
  out << "k,avg_sq_error,is_knee\n";
  for (const auto& p : curve.points) {
    out << p.k << ',' << format_double(p.average_squared_error) << ',' << (p.k == knee ? 1 : 0)
        << '\n';
  }
  std::cout << "elbow: rows_in=" << part.size() << " rows_out=" << curve.points.size()
            << " rejections=" << report.rejections.size() << " knee_k=" << knee
            << " output=" << path << "\n";
  return 0;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string input;
  SelectorOptions sel;
  int k = 0;  // 0 selects by knee
  int k_max = 10;
  std::uint64_t seed = 1;
  int restarts = 10;
  std::string output_dir = ".";
};

int run_fit(const FitArgs& args) {
  RejectionReport report;
  const Dataset part = load_partition(args.input, args.sel, &report);
  FitOptions options;
  if (args.k > 0) options.k = args.k;
  options.k_max = args.k_max;
  options.seed = args.seed;
  options.restarts = args.restarts;
  const FitResult fit = fit_model(part, options, args.sel.segment_key(), args.sel.group());

  const std::string path = out_path(args.output_dir, "model.json");
  fit.model.save(path);
  std::cout << "fit: rows_in=" << part.size() << " rows_out=1 rejections="
            << report.rejections.size() << " k=" << fit.model.k
            << " ase=" << format_double(fit.model.average_squared_error)
            << " excluded_missing=" << fit.model.metadata.excluded_missing << " output=" << path
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- score

struct ScoreArgs {
  std::string input;
  std::string model;
  double outlier_threshold = 2.5;
  std::string assign = "mahalanobis";
  std::string output_dir = ".";
};

int run_score(const ScoreArgs& args) {
  const ClusterModel model = load_model_file(args.model);
  const ReadResult read = read_csv(args.input);
  ScoringOptions options;
  options.outlier_threshold = args.outlier_threshold;
  if (args.assign == "euclidean") {
    options.assignment = ScoringOptions::Assignment::Euclidean;
  } else if (args.assign != "mahalanobis") {
    throw Error("--assign must be mahalanobis or euclidean");
  }
  const ScoringResult scored = score_dataset(read.dataset, model, options);

  std::size_t outliers = 0;
  for (const auto& row : scored.rows) {
    if (row.score && row.score->is_outlier) ++outliers;
  }
  const std::string path = out_path(args.output_dir, "scored.csv");
  write_scored_csv(scored, path);
  std::cout << "score: rows_in=" << read.dataset.size() << " rows_out=" << scored.rows.size()
            << " rejections=" << read.report.rejections.size()
            << " unscoreable=" << scored.unscoreable << " outliers=" << outliers
            << " output=" << path << "\n";
  return 0;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::string scored;
  std::string model;
  AnomalyRules rules;
  std::string output_dir = ".";
};

int run_report(const ReportArgs& args) {
  const ClusterModel model = load_model_file(args.model);
  const ScoringResult scored = read_scored_csv(args.scored);
  const ClusterReport report = flag_anomalous_clusters(cluster_report(model, scored), args.rules);

  const std::string path = out_path(args.output_dir, "report.json");
  std::ofstream out(path);
  if (!out) throw FileUnreadable("cannot open for writing: " + path);
  out << report.to_json_text();

  std::size_t flagged = 0;
  for (const auto& c : report.clusters) flagged += c.flagged ? 1 : 0;
  std::cout << "report: rows_in=" << scored.rows.size() << " rows_out=" << report.clusters.size()
            << " rejections=0 flagged=" << flagged << " output=" << path << "\n";
  return 0;
}

// ------------------------------------------------------------------- drift

struct DriftArgs {
  std::string model_a;
  std::string model_b;
  bool symmetric = false;
  std::string output_dir = ".";
};

int run_drift(const DriftArgs& args) {
  const ClusterModel a = load_model_file(args.model_a);
  const ClusterModel b = load_model_file(args.model_b);
  const DriftResult drift = cluster_set_distance(a, b, args.symmetric);

  const std::string json_path = out_path(args.output_dir, "drift.json");
  std::ofstream json_out(json_path);
  if (!json_out) throw FileUnreadable("cannot open for writing: " + json_path);
  json_out << drift.to_json_text();

  const std::string csv_path = out_path(args.output_dir, "drift.csv");
  std::ofstream csv = open_csv_output(csv_path, "kind=drift");
  csv << "period_a,period_b,value\n";
  csv << a.metadata.date_range << ',' << b.metadata.date_range << ',' << format_double(drift.value)
      << '\n';

  std::cout << "drift: rows_in=" << (a.centers_raw.size() + b.centers_raw.size())
            << " rows_out=1 rejections=0 value=" << format_double(drift.value)
            << " output=" << csv_path << "\n";
  return 0;
}

// ----------------------------------------------------------------- regimes

struct RegimesArgs {
  std::string input;
  std::string model;
  std::string detector;
  int window = 5;
  bool centered = false;
  std::string output_dir = ".";
};

int run_regimes(const RegimesArgs& args) {
  const ClusterModel model = load_model_file(args.model);
  const ReadResult read = read_csv(args.input);
  const ScoringResult scored = score_dataset(read.dataset, model);
  const RegimeSeries raw = regime_series(scored, args.detector);
  SmoothOptions smooth;
  smooth.window = args.window;
  smooth.centered = args.centered;
  const RegimeSeries smoothed = smooth_series(read.dataset, model, args.detector, smooth);

  const std::string path = out_path(args.output_dir, "series.csv");
  write_series_csv(raw, smoothed, path);
  std::cout << "regimes: rows_in=" << read.dataset.size() << " rows_out=" << raw.points.size()
            << " rejections=" << read.report.rejections.size() << " gaps=" << raw.gaps.size()
            << " transitions_raw=" << count_transitions(raw)
            << " transitions_smoothed=" << count_transitions(smoothed) << " output=" << path
            << "\n";
  return 0;
}

// --------------------------------------------------------------- traveltime

struct TravelTimeArgs {
  std::string input;
  std::string layout;
  std::string cleaner = "rule";
  std::string model;
  double outlier_threshold = 2.5;
  int lookback = 5;
  std::string output_dir = ".";
};

int run_traveltime(const TravelTimeArgs& args) {
  const DetectorLayout layout = DetectorLayout::load_csv(args.layout);
  const ReadResult read = read_csv(args.input);

  CleaningOutcome outcome;
  if (args.cleaner == "rule") {
    outcome = rule_clean(read.dataset);
  } else if (args.cleaner == "ml") {
    if (args.model.empty()) throw Error("--cleaner ml requires --model");
    const ClusterModel model = load_model_file(args.model);
    outcome = ml_clean(score_dataset(read.dataset, model), args.outlier_threshold);
  } else {
    throw Error("--cleaner must be rule or ml");
  }

  std::vector<MinuteSpeedSeries> speeds;
  speeds.reserve(layout.entries.size());
  for (const auto& entry : layout.entries) {
    speeds.push_back(per_minute_speeds(read.dataset, outcome, entry.detector_id, args.lookback));
  }
  const TravelTimeSeries series = estimate_travel_times(layout, speeds);

  const std::string path = out_path(args.output_dir, "traveltime_" + args.cleaner + ".csv");
  series.save_csv(path);
  std::cout << "traveltime: rows_in=" << read.dataset.size() << " rows_out=" << series.points.size()
            << " rejections=" << read.report.rejections.size() << " kept=" << outcome.kept_count()
            << " dropped=" << outcome.dropped_count() << " output=" << path << "\n";
  return 0;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  std::string tt_rule;
  std::string tt_ml;
  std::string ground_truth;
  std::string timezone = "US/Pacific";
  std::string peak = "16-18";
  bool include_weekends = false;
  std::string output_dir = ".";
};

PeakFilter parse_peak_filter(const CompareArgs& args) {
  PeakFilter filter;
  filter.tz = TimeZone::parse(args.timezone);
  filter.weekdays_only = !args.include_weekends;
  const auto dash = args.peak.find('-');
  if (dash == std::string::npos) throw Error("--peak must look like 16-18");
  try {
    filter.start_hour = std::stoi(args.peak.substr(0, dash));
    filter.end_hour = std::stoi(args.peak.substr(dash + 1));
  } catch (const std::exception&) {
    throw Error("--peak must look like 16-18");
  }
  if (filter.start_hour < 0 || filter.end_hour > 24 || filter.start_hour >= filter.end_hour) {
    throw Error("--peak hours must satisfy 0 <= start < end <= 24");
  }
  return filter;
}

int run_compare(const CompareArgs& args) {
  const TravelTimeSeries rule = TravelTimeSeries::load_csv(args.tt_rule);
  const TravelTimeSeries ml = TravelTimeSeries::load_csv(args.tt_ml);
  const TravelTimeSeries truth = TravelTimeSeries::load_csv(args.ground_truth);
  const PeakFilter filter = parse_peak_filter(args);

  const AgreementTable table = agreement_table(rule, ml, truth, filter);
  const std::string path = out_path(args.output_dir, "agreement.csv");
  write_agreement_csv(table, path);
  std::cout << format_agreement_table(table);

  const std::size_t disagreements =
      table.counts[static_cast<std::size_t>(AgreementCategory::AllDisagree)];
  if (disagreements > 0) {
    const DisagreementBreakdown breakdown = disagreement_breakdown(rule, ml, truth, filter);
    const std::string breakdown_path = out_path(args.output_dir, "breakdown.csv");
    std::ofstream out = open_csv_output(breakdown_path, "kind=breakdown");
    out << "total,ml_closer,rule_closer,ties,ml_closer_share,rule_closer_share,"
           "mean_margin_ml,mean_margin_rule\n";
    out << breakdown.total << ',' << breakdown.ml_closer << ',' << breakdown.rule_closer << ','
        << breakdown.ties << ',' << format_fixed(breakdown.ml_closer_share, 6) << ','
        << format_fixed(breakdown.rule_closer_share, 6) << ','
        << format_fixed(breakdown.mean_margin_ml, 6) << ','
        << format_fixed(breakdown.mean_margin_rule, 6) << '\n';
  }

  std::cout << "compare: rows_in=" << truth.points.size() << " rows_out=" << table.total
            << " rejections=0 all_disagree=" << disagreements << " output=" << path << "\n";
  return 0;
}

// ------------------------------------------------------------------ spider

struct SpiderArgs {
  std::string model;
  std::string output_dir = ".";
};

int run_spider(const SpiderArgs& args) {
  const ClusterModel model = load_model_file(args.model);
  Eigen::Vector3d axis_max = Eigen::Vector3d::Zero();
  for (const auto& c : model.centers_raw) axis_max = axis_max.cwiseMax(c);

  const std::string path = out_path(args.output_dir, "spider.csv");
  std::ofstream out = open_csv_output(path, "kind=spider");
  out << "cluster_index,axis,raw_value,normalized_value\n";
  for (int c = 0; c < model.k; ++c) {
    for (int axis = 0; axis < 3; ++axis) {
      const double value = model.centers_raw[static_cast<std::size_t>(c)][axis];
      const double normalized = axis_max[axis] > 0.0 ? value / axis_max[axis] : 0.0;
      out << c << ',' << kFeatureOrder[static_cast<std::size_t>(axis)] << ','
          << format_double(value) << ',' << format_fixed(normalized, 6) << '\n';
    }
  }
  std::cout << "spider: rows_in=" << model.k << " rows_out=" << model.k * 3
            << " rejections=0 output=" << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic regime clustering and loop-detector data cleaning"};
  app.require_subcommand(1);

  GenerateArgs generate_args;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic observation dataset");
  generate->add_option("--scenario", generate_args.scenario, "Scenario JSON file")->required();
  generate->add_option("--output-dir", generate_args.output_dir, "Output directory");
  std::uint64_t seed_override = 0;
  auto* seed_opt = generate->add_option("--seed", seed_override, "Override the scenario seed");

  ElbowArgs elbow_args;
  auto* elbow = app.add_subcommand("elbow", "Sweep k and select the knee of the error curve");
  elbow->add_option("--input", elbow_args.input, "Observation CSV")->required();
  add_selector_flags(elbow, elbow_args.sel);
  elbow->add_option("--k-max", elbow_args.k_max, "Largest k in the sweep");
  elbow->add_option("--seed", elbow_args.seed, "RNG seed");
  elbow->add_option("--restarts", elbow_args.restarts, "k-means restarts");
  int elbow_override = 0;
  auto* elbow_k = elbow->add_option("--k", elbow_override, "Domain-knowledge override for the knee");
  elbow->add_option("--output-dir", elbow_args.output_dir, "Output directory");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a regime model");
  fit->add_option("--input", fit_args.input, "Observation CSV")->required();
  add_selector_flags(fit, fit_args.sel);
  fit->add_option("--k", fit_args.k, "Cluster count (0 = knee selection)");
  fit->add_option("--k-max", fit_args.k_max, "Largest k for knee selection");
  fit->add_option("--seed", fit_args.seed, "RNG seed");
  fit->add_option("--restarts", fit_args.restarts, "k-means restarts");
  fit->add_option("--output-dir", fit_args.output_dir, "Output directory");

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Assign observations to regimes and score them");
  score->add_option("--input", score_args.input, "Observation CSV")->required();
  score->add_option("--model", score_args.model, "Model JSON")->required();
  score->add_option("--outlier-threshold", score_args.outlier_threshold, "Outlier distance");
  score->add_option("--assign", score_args.assign, "Assignment metric: mahalanobis or euclidean");
  score->add_option("--output-dir", score_args.output_dir, "Output directory");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Per-cluster report with anomaly flags");
  report->add_option("--scored", report_args.scored, "Scored CSV")->required();
  report->add_option("--model", report_args.model, "Model JSON")->required();
  report->add_option("--rule-occupancy-min", report_args.rules.stuck_occupancy_min,
                     "Stuck-pattern occupancy floor");
  report->add_option("--rule-speed-max", report_args.rules.stuck_speed_max,
                     "Stuck-pattern speed ceiling");
  report->add_option("--rule-share-min", report_args.rules.dominance_share_min,
                     "Single-detector share floor");
  report->add_option("--rule-fraction-min", report_args.rules.dominance_fraction_min,
                     "Single-detector member-fraction floor");
  report->add_option("--output-dir", report_args.output_dir, "Output directory");

  DriftArgs drift_args;
  auto* drift = app.add_subcommand("drift", "Distance between two models' center sets");
  drift->add_option("--model-a", drift_args.model_a, "Baseline model JSON")->required();
  drift->add_option("--model-b", drift_args.model_b, "Comparison model JSON")->required();
  drift->add_flag("--symmetric", drift_args.symmetric, "Take the larger of both directions");
  drift->add_option("--output-dir", drift_args.output_dir, "Output directory");

  RegimesArgs regimes_args;
  auto* regimes = app.add_subcommand("regimes", "Per-detector regime time series");
  regimes->add_option("--input", regimes_args.input, "Observation CSV")->required();
  regimes->add_option("--model", regimes_args.model, "Model JSON")->required();
  regimes->add_option("--detector", regimes_args.detector, "Detector id")->required();
  regimes->add_option("--window", regimes_args.window, "Rolling-average window")
      ->check(CLI::PositiveNumber);
  regimes->add_flag("--centered", regimes_args.centered, "Center the window instead of trailing");
  regimes->add_option("--output-dir", regimes_args.output_dir, "Output directory");

  TravelTimeArgs traveltime_args;
  auto* traveltime = app.add_subcommand("traveltime", "Clean data and estimate travel times");
  traveltime->add_option("--input", traveltime_args.input, "Observation CSV")->required();
  traveltime->add_option("--layout", traveltime_args.layout, "Detector layout CSV")->required();
  traveltime->add_option("--cleaner", traveltime_args.cleaner, "rule or ml");
  traveltime->add_option("--model", traveltime_args.model, "Model JSON (ml cleaner)");
  traveltime->add_option("--outlier-threshold", traveltime_args.outlier_threshold,
                         "Outlier distance for the ml cleaner");
  traveltime->add_option("--lookback", traveltime_args.lookback,
                         "Carry-forward lookback, minutes");
  traveltime->add_option("--output-dir", traveltime_args.output_dir, "Output directory");

  CompareArgs compare_args;
  auto* compare =
      app.add_subcommand("compare", "Agreement of two travel-time series with ground truth");
  compare->add_option("--tt-rule", compare_args.tt_rule, "Rule-cleaned travel times")->required();
  compare->add_option("--tt-ml", compare_args.tt_ml, "ML-cleaned travel times")->required();
  compare->add_option("--ground-truth", compare_args.ground_truth, "Ground-truth travel times")
      ->required();
  compare->add_option("--timezone", compare_args.timezone, "Local timezone for the filters");
  compare->add_option("--peak", compare_args.peak, "Peak window, e.g. 16-18");
  compare->add_flag("--include-weekends", compare_args.include_weekends,
                    "Keep weekend minutes in the comparison");
  compare->add_option("--output-dir", compare_args.output_dir, "Output directory");

  SpiderArgs spider_args;
  auto* spider = app.add_subcommand("spider", "Spider-plot data for a model's centers");
  spider->add_option("--model", spider_args.model, "Model JSON")->required();
  spider->add_option("--output-dir", spider_args.output_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  try {
    if (generate->parsed()) {
      if (seed_opt->count() > 0) generate_args.seed = seed_override;
      return run_generate(generate_args);
    }
    if (elbow->parsed()) {
      if (elbow_k->count() > 0) elbow_args.k_override = elbow_override;
      return run_elbow(elbow_args);
    }
    if (fit->parsed()) return run_fit(fit_args);
    if (score->parsed()) return run_score(score_args);
    if (report->parsed()) return run_report(report_args);
    if (drift->parsed()) return run_drift(drift_args);
    if (regimes->parsed()) return run_regimes(regimes_args);
    if (traveltime->parsed()) return run_traveltime(traveltime_args);
    if (compare->parsed()) return run_compare(compare_args);
    if (spider->parsed()) return run_spider(spider_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;  // data error
  }
  return 0;
}
