#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"
#include "trajkin/anomaly.hpp"
#include "trajkin/error.hpp"

using namespace trajkin;

namespace {

FeatureVector vec2(double a, double b) {
  FeatureVector v{};
  v[0] = a;
  v[1] = b;
  return v;
}

std::vector<FeatureVector> grid_with_outlier() {
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) rows.push_back(vec2(i, j));
  }
  rows.push_back(vec2(30, 30));
  return rows;
}

FeatureDataset users_dataset(const std::vector<std::pair<std::string, int>>& counts) {
  FeatureDataset ds;
  double x = 0;
  for (const auto& [user, n] : counts) {
    for (int i = 0; i < n; ++i) {
      FeatureVector v{};
      v.fill(x++);
      ds.rows.push_back({user, "walk", KinematicFeatures::from_vector(v)});
    }
  }
  return ds;
}

std::vector<double> lof_values(const std::vector<FeatureVector>& rows, std::size_t k) {
  std::vector<double> out;
  for (const auto& s : lof_scores(rows, k)) out.push_back(s.lof);
  return out;
}

}  // namespace

TEST_CASE("anomaly_count rounds 3% with a floor of one") {
  CHECK(anomaly_count(100, 0.03) == 3);
  CHECK(anomaly_count(31, 0.03) == 1);
  CHECK(anomaly_count(748, 0.03) == 22);
  CHECK(anomaly_count(10, 0.03) == 1);
}

TEST_CASE("inject_anomalies") {
  const auto ds = users_dataset({{"a", 100}, {"b", 20}, {"c", 20}});
  const auto inj = inject_anomalies(ds, "a", 0.03, 5);
  CHECK(inj.n_normal == 100);
  CHECK(inj.n_anomaly == 3);
  CHECK(inj.rows.size() == 103);
  std::set<double> distinct;
  for (std::size_t i = 0; i < inj.rows.size(); ++i) {
    CHECK(static_cast<bool>(inj.is_anomaly[i]) == (i >= 100));
    if (inj.is_anomaly[i]) {
      CHECK(inj.source_user[i] != "a");
      distinct.insert(inj.rows[i][0]);
    }
  }
  CHECK(distinct.size() == 3);  // sampled without replacement
  CHECK(inject_anomalies(ds, "a", 0.03, 5).rows == inj.rows);

  CHECK(test::code_of([&] { inject_anomalies(ds, "zzz", 0.03, 1); }) == ErrorCode::UnknownUser);
  const auto lonely = users_dataset({{"a", 100}, {"b", 2}});
  CHECK(test::code_of([&] { inject_anomalies(lonely, "a", 0.03, 1); }) ==
        ErrorCode::InsufficientDonors);
}

TEST_CASE("donor sampling is uniform over pooled rows") {
  // b owns 3/4 of the donor pool.
  const auto ds = users_dataset({{"a", 40}, {"b", 30}, {"c", 10}});
  int from_b = 0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) from_b += inject_anomalies(ds, "a", 0.03, t).source_user[40] == "b";
  const double se = std::sqrt(0.75 * 0.25 / trials);
  CHECK(std::fabs(from_b / static_cast<double>(trials) - 0.75) <= 3 * se);
}

TEST_CASE("standardize") {
  SUBCASE("constant column maps to zero") {
    std::vector<FeatureVector> rows(5, vec2(3.0, 1.0));
    rows[2][1] = 2.0;
    const auto z = standardize(rows);
    for (const auto& r : z.rows) CHECK(r[0] == 0.0);
    CHECK(z.stddev[0] == 0.0);
  }
  SUBCASE("random data ends with zero mean and unit std") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(50.0, 20.0);
    std::vector<FeatureVector> rows(200);
    for (auto& r : rows) for (auto& x : r) x = d(rng);
    const auto z = standardize(rows);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::vector<long double> col;
      for (const auto& r : z.rows) col.push_back(r[f]);
      CHECK(std::fabs(static_cast<double>(oracle::ld_mean(col))) <= 1e-9);
      CHECK(std::fabs(static_cast<double>(oracle::ld_pstd(col)) - 1.0) <= 1e-9);
    }
    const auto again = standardize(z.rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        CHECK(std::fabs(again.rows[i][f] - z.rows[i][f]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("lof_scores") {
  SUBCASE("far point in a grid has the maximum score") {
    const auto rows = grid_with_outlier();
    const auto lof = lof_values(rows, 10);
    const auto top = std::max_element(lof.begin(), lof.end()) - lof.begin();
    CHECK(top == 100);
    CHECK(lof[100] > 1.5);
    // Interior points, away from the grid edge.
    for (int i = 3; i <= 6; ++i) {
      for (int j = 3; j <= 6; ++j) CHECK(std::fabs(lof[static_cast<std::size_t>(i * 10 + j)] - 1.0) <= 0.2);
    }
    const auto o = oracle::lof(rows, 10);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(oracle::rel_close(lof[i], o[i], 1e-9));
  }
  SUBCASE("identical points all score one") {
    const std::vector<FeatureVector> rows(30, vec2(1.0, 2.0));
    for (double v : lof_values(rows, 5)) CHECK(v == 1.0);
  }
  SUBCASE("two clean clusters score below the planted-outlier case") {
    std::vector<FeatureVector> rows;
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) {
        rows.push_back(vec2(i, j));
        rows.push_back(vec2(100 + i, j));
      }
    }
    const auto clean = lof_values(rows, 10);
    const auto planted = lof_values(grid_with_outlier(), 10);
    CHECK(*std::max_element(clean.begin(), clean.end()) <
          *std::max_element(planted.begin(), planted.end()));
  }
  SUBCASE("duplicate cluster next to a lone point follows the infinite-density rule") {
    std::vector<FeatureVector> rows(6, vec2(0, 0));
    rows.push_back(vec2(5, 5));
    const auto lof = lof_values(rows, 3);
    for (std::size_t i = 0; i < 6; ++i) CHECK(lof[i] == 1.0);
    CHECK(std::isinf(lof[6]));
    const auto o = oracle::lof(rows, 3);
    CHECK(std::isinf(o[6]));
  }
  SUBCASE("too few rows") {
    const std::vector<FeatureVector> rows(20, vec2(0, 0));
    CHECK(test::code_of([&] { lof_scores(rows, 20); }) == ErrorCode::TooFewRows);
  }
}

TEST_CASE("lof_scores matches the brute-force oracle and is similarity invariant") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 30 + rng() % 120;
    std::vector<FeatureVector> rows(n);
    for (auto& r : rows) {
      for (auto& x : r) x = std::round(d(rng) * 4.0) / 4.0;  // force distance ties
    }
    for (std::size_t k : {5u, 10u, 20u}) {
      const auto lof = lof_values(rows, k);
      const auto o = oracle::lof(rows, k);
      for (std::size_t i = 0; i < n; ++i) CHECK(oracle::rel_close(lof[i], o[i], 1e-9));

      auto moved = rows;
      for (auto& r : moved) for (auto& x : r) x = 3.0 * x - 17.0;
      const auto lof_moved = lof_values(moved, k);
      for (std::size_t i = 0; i < n; ++i) CHECK(oracle::rel_close(lof[i], lof_moved[i], 1e-9));
    }
  }
}

TEST_CASE("pr_auc") {
  CHECK(pr_auc(std::vector<std::uint8_t>{1, 1, 0, 0}, std::vector<double>{4, 3, 2, 1}) == 1.0);
  const std::vector<std::uint8_t> truth{1, 0, 1, 0};
  const std::vector<double> scores{0.9, 0.8, 0.7, 0.1};
  CHECK(pr_auc(truth, scores) == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
  CHECK(pr_auc(truth, scores) == doctest::Approx(oracle::threshold_sweep_ap(truth, scores)));
  // All tied: one threshold step at prevalence.
  CHECK(pr_auc(truth, std::vector<double>(4, 1.0)) == 0.5);
  CHECK(test::code_of([] {
          pr_auc(std::vector<std::uint8_t>{0, 0}, std::vector<double>{1, 2});
        }) == ErrorCode::NoPositives);
}

TEST_CASE("pr_auc agrees with the threshold sweep and ignores monotone rescaling") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<std::uint8_t> truth(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng() % 3 == 0;
      scores[i] = static_cast<double>(rng() % 10);
    }
    truth[0] = 1;
    const double ap = pr_auc(truth, scores);
    CHECK(std::fabs(ap - oracle::threshold_sweep_ap(truth, scores)) <= 1e-12);
    auto squashed = scores;
    for (auto& s : squashed) s = std::exp(s / 3.0) - 40.0;
    CHECK(pr_auc(truth, squashed) == ap);
  }
}

TEST_CASE("random scores match the expected AP of a random ranking") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint8_t> truth(100, 0);
  for (int i = 0; i < 4; ++i) truth[static_cast<std::size_t>(i * 25)] = 1;
  std::vector<double> aps;
  for (int sim = 0; sim < 1000; ++sim) {
    std::vector<double> s(100);
    for (auto& x : s) x = u(rng);
    aps.push_back(pr_auc(truth, s));
  }
  const auto stats = summarize(aps);
  const double se = stats.stddev / std::sqrt(1000.0);
  // Expected AP of a uniformly random ranking with P positives among N.
  const double n = 100, p = 4;
  double harmonic = 0.0;
  for (int r = 1; r <= 100; ++r) harmonic += 1.0 / r;
  const double expected = (p - 1) / (n - 1) + (n - p) / (n - 1) * harmonic / n;
  CHECK(std::fabs(stats.mean - expected) <= 3 * se);
}

TEST_CASE("run_anomaly_experiment") {
  FeatureDataset ds;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.2);
  for (int u = 0; u < 4; ++u) {
    for (int i = 0; i < 70; ++i) {
      FeatureVector v{};
      for (auto& x : v) x = 10.0 * u + noise(rng);
      ds.rows.push_back({"u" + std::to_string(u), "car", KinematicFeatures::from_vector(v)});
    }
  }
  AnomalyConfig cfg;
  cfg.trials_per_user = 3;
  cfg.seed = 9;
  const auto report = run_anomaly_experiment(ds, cfg);
  CHECK(report.trials.size() == 12);
  CHECK(report.per_user.size() == 4);
  for (const auto& t : report.trials) {
    CHECK(t.n_normal == 70);
    CHECK(t.n_anomaly == 2);
    CHECK(t.pr_auc_lof >= 0.9);
    CHECK(t.pr_auc_lof > t.pr_auc_random);
    CHECK(t.pr_auc_random >= 0.0);
    CHECK(t.pr_auc_random <= 1.0);
  }
  const auto again = run_anomaly_experiment(ds, cfg);
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    CHECK(again.trials[i].pr_auc_lof == report.trials[i].pr_auc_lof);
    CHECK(again.trials[i].pr_auc_random == report.trials[i].pr_auc_random);
    CHECK(again.trials[i].seed == report.trials[i].seed);
  }
}

TEST_CASE("summarize") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.median == 2.5);
  CHECK(s.min == 1);
  CHECK(s.max == 4);
  CHECK(s.stddev == doctest::Approx(std::sqrt(1.25)));
}
