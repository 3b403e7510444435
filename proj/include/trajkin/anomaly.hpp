#pragma once

// Foreign-trip injection experiment scored with Local Outlier Factor and
// evaluated by area under the precision-recall curve.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajkin/features.hpp"

namespace trajkin {

struct InjectedDataset {
  std::string subject;
  std::vector<FeatureVector> rows;        // normals first, then anomalies
  std::vector<std::uint8_t> is_anomaly;   // 1 = injected foreign trip
  std::vector<std::string> source_user;   // owner of each row
  std::size_t n_normal = 0;
  std::size_t n_anomaly = 0;
};

// max(1, round(rate * n_normal))
std::size_t anomaly_count(std::size_t n_normal, double rate);

// Throws UnknownUser when the subject has no rows and InsufficientDonors
// when the other users cannot supply the anomaly sample.
InjectedDataset inject_anomalies(const FeatureDataset& dataset, std::string_view subject,
                                 double rate, std::uint64_t seed);

struct Standardized {
  std::vector<FeatureVector> rows;
  FeatureVector mean{};
  FeatureVector stddev{};  // population; zero-variance columns map to 0
};

Standardized standardize(std::span<const FeatureVector> rows);

struct LofScore {
  std::size_t index = 0;
  double lof = 0.0;
};

// Local Outlier Factor with Euclidean distance. Neighborhoods include every
// point tied with the k-th nearest distance. A point whose neighbors all
// coincide with it has infinite local reachability density; the ratio of two
// infinite densities is taken as 1. Throws TooFewRows unless rows > k.
std::vector<LofScore> lof_scores(std::span<const FeatureVector> rows, std::size_t k = 20);

// Step-wise average precision, tied scores forming a single threshold.
// Throws NoPositives when no flag is set.
double pr_auc(std::span<const std::uint8_t> truth, std::span<const double> scores);

struct AnomalyConfig {
  std::size_t trials_per_user = 10;
  double rate = 0.03;
  std::size_t lof_k = 20;
  std::uint64_t seed = 0;
};

struct TrialResult {
  std::string subject;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n_normal = 0;
  std::size_t n_anomaly = 0;
  double pr_auc_lof = 0.0;
  double pr_auc_random = 0.0;
};

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct UserAnomalySummary {
  std::string user_id;
  double mean_lof = 0.0;
  double max_lof = 0.0;
  double mean_random = 0.0;
};

struct AnomalyReport {
  AnomalyConfig config;
  std::vector<TrialResult> trials;
  SummaryStats lof;
  SummaryStats random;
  std::vector<UserAnomalySummary> per_user;
};

// One trial per (user, trial index) over users in sorted id order.
TrialResult run_trial(const FeatureDataset& dataset, std::string_view subject,
                      std::size_t trial, const AnomalyConfig& config);

AnomalyReport run_anomaly_experiment(const FeatureDataset& dataset,
                                     const AnomalyConfig& config = {});

}  // namespace trajkin
