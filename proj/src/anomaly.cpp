#include "trajkin/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trajkin/error.hpp"
#include "trajkin/random.hpp"

namespace trajkin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double euclidean(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double density_ratio(double neighbor_lrd, double own_lrd) {
  if (std::isinf(neighbor_lrd) && std::isinf(own_lrd)) return 1.0;
  return neighbor_lrd / own_lrd;
}

}  // namespace

std::size_t anomaly_count(std::size_t n_normal, double rate) {
  const auto rounded = std::llround(rate * static_cast<double>(n_normal));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(0LL, rounded)));
}

InjectedDataset inject_anomalies(const FeatureDataset& dataset, std::string_view subject,
                                 double rate, std::uint64_t seed) {
  InjectedDataset out;
  out.subject = std::string(subject);
  std::vector<std::size_t> donors;
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    const auto& row = dataset.rows[i];
    if (row.user_id == subject) {
      out.rows.push_back(row.features.to_vector());
      out.is_anomaly.push_back(0);
      out.source_user.push_back(row.user_id);
    } else {
      donors.push_back(i);
    }
  }
  out.n_normal = out.rows.size();
  if (out.n_normal == 0) {
    throw Error(ErrorCode::UnknownUser, "no rows for user " + out.subject);
  }
  out.n_anomaly = anomaly_count(out.n_normal, rate);
  if (donors.size() < out.n_anomaly) {
    throw Error(ErrorCode::InsufficientDonors,
                "need " + std::to_string(out.n_anomaly) + " donor rows, have " +
                    std::to_string(donors.size()));
  }
  // Partial Fisher-Yates: the first n_anomaly slots become a uniform sample
  // without replacement.
  Rng rng(seed);
  for (std::size_t i = 0; i < out.n_anomaly; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, donors.size() - i));
    std::swap(donors[i], donors[j]);
    const auto& row = dataset.rows[donors[i]];
    out.rows.push_back(row.features.to_vector());
    out.is_anomaly.push_back(1);
    out.source_user.push_back(row.user_id);
  }
  return out;
}

Standardized standardize(std::span<const FeatureVector> rows) {
  Standardized out;
  if (rows.empty()) return out;
  const double n = static_cast<double>(rows.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[f];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[f] - mean) * (r[f] - mean);
    out.mean[f] = mean;
    out.stddev[f] = std::sqrt(ss / n);
  }
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    FeatureVector z{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      z[f] = out.stddev[f] > 0.0 ? (r[f] - out.mean[f]) / out.stddev[f] : 0.0;
    }
    out.rows.push_back(z);
  }
  return out;
}

std::vector<LofScore> lof_scores(std::span<const FeatureVector> rows, std::size_t k) {
  const std::size_t n = rows.size();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "LOF needs k >= 1");
  if (n <= k) {
    throw Error(ErrorCode::TooFewRows, "LOF needs more than k = " + std::to_string(k) +
                                           " rows, got " + std::to_string(n));
  }

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = euclidean(rows[i], rows[j]);
    }
  }

  std::vector<double> k_distance(n);
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<double> others;
  others.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(dist[i * n + j]);
    }
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     others.end());
    k_distance[i] = others[k - 1];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dist[i * n + j] <= k_distance[i]) neighbors[i].push_back(j);
    }
  }

  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach_sum = 0.0;
    for (std::size_t j : neighbors[i]) reach_sum += std::max(k_distance[j], dist[i * n + j]);
    const double mean_reach = reach_sum / static_cast<double>(neighbors[i].size());
    lrd[i] = mean_reach > 0.0 ? 1.0 / mean_reach : kInf;
  }

  std::vector<LofScore> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ratio_sum = 0.0;
    for (std::size_t j : neighbors[i]) ratio_sum += density_ratio(lrd[j], lrd[i]);
    out[i] = {i, ratio_sum / static_cast<double>(neighbors[i].size())};
  }
  return out;
}

double pr_auc(std::span<const std::uint8_t> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) {
    throw Error(ErrorCode::InvalidArgument, "labels and scores differ in length");
  }
  const auto total_pos = static_cast<std::size_t>(
      std::count_if(truth.begin(), truth.end(), [](std::uint8_t t) { return t != 0; }));
  if (total_pos == 0) throw Error(ErrorCode::NoPositives, "no positive rows");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += truth[order[j]] != 0;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "summary of empty input");
  SummaryStats s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.median = quantile(values, 0.5);
  return s;
}

TrialResult run_trial(const FeatureDataset& dataset, std::string_view subject,
                      std::size_t trial, const AnomalyConfig& config) {
  TrialResult result;
  result.subject = std::string(subject);
  result.trial = trial;
  result.seed = derive_seed(config.seed, stable_hash(subject), trial);

  const InjectedDataset injected =
      inject_anomalies(dataset, subject, config.rate, derive_seed(result.seed, 1));
  result.n_normal = injected.n_normal;
  result.n_anomaly = injected.n_anomaly;

  const Standardized z = standardize(injected.rows);
  const auto lof = lof_scores(z.rows, config.lof_k);
  std::vector<double> lof_values(lof.size());
  for (const auto& s : lof) lof_values[s.index] = s.lof;
  result.pr_auc_lof = pr_auc(injected.is_anomaly, lof_values);

  Rng rng(derive_seed(result.seed, 2));
  std::vector<double> random_scores(injected.rows.size());
  for (double& s : random_scores) s = uniform01(rng);
  result.pr_auc_random = pr_auc(injected.is_anomaly, random_scores);
  return result;
}

AnomalyReport run_anomaly_experiment(const FeatureDataset& dataset,
                                     const AnomalyConfig& config) {
  AnomalyReport report;
  report.config = config;
  auto users = dataset.users();
  std::sort(users.begin(), users.end());

  std::vector<double> lof_all, random_all;
  for (const auto& user : users) {
    std::vector<double> lof_user, random_user;
    for (std::size_t t = 0; t < config.trials_per_user; ++t) {
      TrialResult r = run_trial(dataset, user, t, config);
      lof_user.push_back(r.pr_auc_lof);
      random_user.push_back(r.pr_auc_random);
      report.trials.push_back(std::move(r));
    }
    if (!lof_user.empty()) {
      const SummaryStats l = summarize(lof_user);
      const SummaryStats r = summarize(random_user);
      report.per_user.push_back({user, l.mean, l.max, r.mean});
    }
    lof_all.insert(lof_all.end(), lof_user.begin(), lof_user.end());
    random_all.insert(random_all.end(), random_user.begin(), random_user.end());
  }
  if (!lof_all.empty()) {
    report.lof = summarize(lof_all);
    report.random = summarize(random_all);
  }
  return report;
}

}  // namespace trajkin
