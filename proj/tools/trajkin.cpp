// trajkin: kinematic trajectory mining pipeline.
//
//   trajkin extract  --root <geolife> --out <dir>
//   trajkin classify --features <csv> --out <dir>
//   trajkin anomaly  --features <csv> --out <dir>
//   trajkin synth    --profiles <json> --out <dir>
//
// Exit codes: 0 success, 1 validation or metric failure, 2 input/IO error.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "trajkin/anomaly.hpp"
#include "trajkin/error.hpp"
#include "trajkin/features.hpp"
#include "trajkin/ingest.hpp"
#include "trajkin/io.hpp"
#include "trajkin/learn.hpp"
#include "trajkin/synth.hpp"

namespace fs = std::filesystem;
using namespace trajkin;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInput = 2;

struct RunConfig {
  std::string root;
  std::string features;
  std::string profiles;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::size_t k_folds = 5;
  std::size_t min_trips = 30;
  double iqr_multiplier = 1.5;
  double anomaly_rate = 0.03;
  std::size_t trials_per_user = 10;
  std::size_t lof_k = 20;

  void validate() const {
    if (k_folds < 2 || min_trips == 0 || trials_per_user == 0 || lof_k == 0) {
      throw Error(ErrorCode::InvalidArgument, "counts must be positive (k-folds >= 2)");
    }
    if (!(anomaly_rate > 0.0 && anomaly_rate < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "--rate must lie in (0, 1)");
    }
    if (!(iqr_multiplier > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "--iqr-mult must be positive");
    }
  }
};

FeatureDataset extract_dataset(const RunConfig& config, bool verbose) {
  const DatasetLoad load = load_dataset(config.root);
  for (const auto& w : load.warnings) std::cerr << "warning: " << w << "\n";

  std::vector<Trip> trips;
  std::size_t skipped_labels = 0;
  std::size_t labels = 0;
  for (const auto& archive : load.archives) {
    labels += archive.labels.size();
    auto assembled = assemble_trips(archive);
    skipped_labels += assembled.skipped_labels;
    for (auto& t : assembled.trips) trips.push_back(std::move(t));
  }
  FeatureDataset dataset =
      build_feature_dataset(trips, {config.iqr_multiplier, config.min_trips});

  if (verbose) {
    const Provenance& p = dataset.provenance;
    std::cout << "labeled users:            " << load.archives.size() << "\n"
              << "users without labels:     " << load.users_without_labels << "\n"
              << "labels (valid):           " << labels << "\n"
              << "labels dropped (inverted):" << " " << load.dropped_inverted_labels << "\n"
              << "labels with < 2 points:   " << skipped_labels << "\n"
              << "trips assembled:          " << p.trips_in << "\n"
              << "dropped, < 3 points:      " << p.too_few_points << "\n"
              << "dropped, bad timestamps:  " << p.duplicate_timestamp << "\n"
              << "dropped, IQR outlier:     " << p.iqr_outlier << "\n"
              << "dropped, user < min trips:" << " " << p.user_below_threshold << " ("
              << p.users_removed << " users)\n"
              << "final: " << dataset.rows.size() << " trips over "
              << dataset.users().size() << " users\n";
  }
  return dataset;
}

FeatureDataset input_dataset(const RunConfig& config) {
  if (!config.features.empty()) {
    auto rows = parse_features_csv(read_text_file(config.features));
    FeatureDataset dataset;
    dataset.rows = std::move(rows);
    return dataset;
  }
  if (!config.root.empty()) return extract_dataset(config, false);
  throw Error(ErrorCode::Io, "one of --features or --root is required");
}

void cmd_extract(const RunConfig& config) {
  if (config.root.empty()) throw Error(ErrorCode::Io, "--root is required");
  const FeatureDataset dataset = extract_dataset(config, true);
  const fs::path out = config.out;
  write_file_atomic(out / "features.csv", format_features_csv(dataset.rows));
  write_file_atomic(out / "provenance.json", provenance_json(dataset));
}

void cmd_classify(const RunConfig& config) {
  const FeatureDataset dataset = input_dataset(config);
  ClassificationConfig cc;
  cc.k = config.k_folds;
  cc.seed = config.seed;
  const ClassificationReport report = run_classification(dataset, cc);

  const fs::path out = config.out;
  write_file_atomic(out / "classification_report.json", classification_report_json(report));
  write_file_atomic(out / "confusion_matrix.csv", confusion_matrix_csv(report));
  write_file_atomic(out / "per_class_metrics.csv", per_class_metrics_csv(report));
  write_file_atomic(out / "scatter_max_speed_vs_std_abs_accel.csv",
                    feature_scatter_csv(dataset.rows, 1, 9));
  write_file_atomic(out / "scatter_max_speed_vs_mean_speed.csv",
                    feature_scatter_csv(dataset.rows, 1, 5));

  std::cout << std::fixed << std::setprecision(3) << "model            accuracy       roc_auc        macro_f1\n";
  for (const ModelSummary* m : {&report.tree, &report.weighted, &report.uniform}) {
    std::cout << std::left << std::setw(16) << m->name << " " << m->accuracy.mean << " +- "
              << m->accuracy.stddev << "  " << m->roc_auc.mean << " +- " << m->roc_auc.stddev
              << "  " << m->macro_f1.mean << " +- " << m->macro_f1.stddev << "\n";
  }
}

void cmd_anomaly(const RunConfig& config) {
  const FeatureDataset dataset = input_dataset(config);
  AnomalyConfig ac;
  ac.trials_per_user = config.trials_per_user;
  ac.rate = config.anomaly_rate;
  ac.lof_k = config.lof_k;
  ac.seed = config.seed;
  const AnomalyReport report = run_anomaly_experiment(dataset, ac);

  const fs::path out = config.out;
  write_file_atomic(out / "anomaly_trials.csv", anomaly_trials_csv(report));
  write_file_atomic(out / "anomaly_per_user.csv", anomaly_per_user_csv(report));
  write_file_atomic(out / "anomaly_summary.json", anomaly_summary_json(report));

  std::cout << report.trials.size() << " trials\n" << std::fixed << std::setprecision(3)
            << "        LOF    random\n"
            << "mean    " << report.lof.mean << "  " << report.random.mean << "\n"
            << "std     " << report.lof.stddev << "  " << report.random.stddev << "\n"
            << "min     " << report.lof.min << "  " << report.random.min << "\n"
            << "median  " << report.lof.median << "  " << report.random.median << "\n"
            << "max     " << report.lof.max << "  " << report.random.max << "\n";
}

void cmd_synth(const RunConfig& config) {
  if (config.profiles.empty()) throw Error(ErrorCode::Io, "--profiles is required");
  const auto profiles = parse_profiles_json(read_text_file(config.profiles));
  const SyntheticCorpus corpus = generate_corpus(profiles, config.seed);
  write_corpus(corpus, config.out);
  std::cout << "wrote " << corpus.trips.size() << " trips for " << profiles.size()
            << " users under " << (fs::path(config.out) / "Data").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematic feature mining, user classification and anomaly detection "
               "for GPS trajectories"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", config.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  };
  const auto add_pipeline = [&](CLI::App* cmd) {
    cmd->add_option("--root", config.root, "Geolife root (contains Data/)");
    cmd->add_option("--min-trips", config.min_trips, "Minimum trips per user")
        ->capture_default_str();
    cmd->add_option("--iqr-mult", config.iqr_multiplier, "IQR fence multiplier")
        ->capture_default_str();
  };

  auto* extract = app.add_subcommand("extract", "Build the per-trip feature CSV");
  add_common(extract);
  add_pipeline(extract);

  auto* classify = app.add_subcommand("classify", "Decision-tree user classification");
  add_common(classify);
  add_pipeline(classify);
  classify->add_option("--features", config.features, "Feature CSV from extract");
  classify->add_option("--k-folds", config.k_folds, "Stratified folds")->capture_default_str();

  auto* anomaly = app.add_subcommand("anomaly", "LOF anomaly-injection experiment");
  add_common(anomaly);
  add_pipeline(anomaly);
  anomaly->add_option("--features", config.features, "Feature CSV from extract");
  anomaly->add_option("--rate", config.anomaly_rate, "Injected fraction of trips")
      ->capture_default_str();
  anomaly->add_option("--trials", config.trials_per_user, "Trials per user")
      ->capture_default_str();
  anomaly->add_option("--lof-k", config.lof_k, "LOF neighbor count")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write a synthetic Geolife-layout corpus");
  add_common(synth);
  synth->add_option("--profiles", config.profiles, "JSON array of user profiles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    config.validate();
    if (extract->parsed()) cmd_extract(config);
    if (classify->parsed()) cmd_classify(config);
    if (anomaly->parsed()) cmd_anomaly(config);
    if (synth->parsed()) cmd_synth(config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
