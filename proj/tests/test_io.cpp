#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"
#include "trajkin/error.hpp"
#include "trajkin/io.hpp"

using namespace trajkin;
using nlohmann::json;

namespace {

FeatureRow random_row(std::mt19937_64& rng, const std::string& user) {
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  FeatureVector v{};
  for (auto& x : v) x = u(rng);
  return {user, "walk", KinematicFeatures::from_vector(v)};
}

FeatureDataset separable_dataset() {
  FeatureDataset ds;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int u = 0; u < 3; ++u) {
    for (int i = 0; i < 35; ++i) {
      FeatureVector v{};
      for (auto& x : v) x = 5.0 * u + noise(rng);
      ds.rows.push_back({"u" + std::to_string(u), u == 0 ? "walk" : "car",
                         KinematicFeatures::from_vector(v)});
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(static_cast<double>(rng() >> 11), static_cast<int>(rng() % 80) - 60);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
}

TEST_CASE("features CSV round trip") {
  std::mt19937_64 rng(9);
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 50; ++i) rows.push_back(random_row(rng, "0" + std::to_string(i % 4)));
  const auto text = format_features_csv(rows);
  CHECK(text.substr(0, kFeaturesCsvHeader.size()) == kFeaturesCsvHeader);
  CHECK(parse_features_csv(text) == rows);

  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(parse_features_csv(crlf) == rows);
}

TEST_CASE("features CSV errors") {
  const std::string header(kFeaturesCsvHeader);
  CHECK(test::code_of([&] { parse_features_csv(header + "\n"); }) == ErrorCode::EmptyFile);
  CHECK(test::code_of([&] { parse_features_csv("a,b\n1,2\n"); }) == ErrorCode::MalformedLine);

  const std::string good = "000,walk,1,2,3,4,5,6,7,8,9,10\n";
  try {
    parse_features_csv(header + "\n" + good + "000,walk,1,2,3\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedLine);
    CHECK(e.line() == 3);
  }
  try {
    parse_features_csv(header + "\n" + good + good + "000,walk,1,2,3,4,x,6,7,8,9,10\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.line() == 4);
  }
  CHECK(test::code_of([&] { parse_features_csv(header + "\n000,walk,1,2,3,4,nan,6,7,8,9,10\n"); }) ==
        ErrorCode::MalformedLine);

  std::vector<FeatureRow> bad{{"a,b", "walk", {}}};
  CHECK(test::code_of([&] { format_features_csv(bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("write_file_atomic") {
  test::TempDir dir;
  const auto path = dir.path() / "out.txt";
  write_file_atomic(path, "first");
  CHECK(test::read(path) == "first");
  write_file_atomic(path, "second");
  CHECK(test::read(path) == "second");
  CHECK(!std::filesystem::exists(dir.path() / "out.txt.tmp"));
  write_file_atomic(dir.path() / "nested" / "x.txt", "x");
  CHECK(test::read(dir.path() / "nested" / "x.txt") == "x");
  CHECK(test::code_of([&] { write_file_atomic(path / "x.txt", "x"); }) == ErrorCode::Io);
}

TEST_CASE("parse_profiles_json") {
  const auto profiles = parse_profiles_json(
      R"([{"user_id": "a", "mean_cruise_speed": 3.5, "trips": 7},
          {"user_id": "b", "gps_noise_std": 2}])");
  REQUIRE(profiles.size() == 2);
  CHECK(profiles[0].mean_cruise_speed == 3.5);
  CHECK(profiles[0].trips == 7);
  CHECK(profiles[0].points_per_trip == UserProfile{}.points_per_trip);
  CHECK(profiles[1].gps_noise_std == 2.0);

  CHECK(test::code_of([] { parse_profiles_json("{"); }) == ErrorCode::MalformedLine);
  CHECK(test::code_of([] { parse_profiles_json("{}"); }) == ErrorCode::MalformedLine);
  CHECK(test::code_of([] { parse_profiles_json(R"([{"trips": 3}])"); }) == ErrorCode::MalformedLine);
  CHECK(test::code_of([] { parse_profiles_json("[]"); }) == ErrorCode::EmptyFile);
  CHECK(test::code_of([] { parse_profiles_json(R"([{"user_id": "a", "trips": 0}])"); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("classification outputs are consistent") {
  ClassificationConfig cfg;
  cfg.seed = 4;
  const auto report = run_classification(separable_dataset(), cfg);

  const auto doc = json::parse(classification_report_json(report));
  CHECK(doc.at("models").size() == 3);
  const auto& order = doc.at("confusion_matrix").at("order");
  const auto& counts = doc.at("confusion_matrix").at("counts");
  REQUIRE(order.size() == 3);
  std::size_t total = 0;
  for (const auto& row : counts) {
    for (const auto& c : row) total += c.get<std::size_t>();
  }
  CHECK(total == 105);

  const auto csv = confusion_matrix_csv(report);
  CHECK(csv.rfind("true_label,predicted_label,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 9);

  const auto per_class = per_class_metrics_csv(report);
  CHECK(std::count(per_class.begin(), per_class.end(), '\n') == 1 + 3);

  const auto ds = separable_dataset();
  const auto scatter = feature_scatter_csv(ds.rows, 1, 9);
  CHECK(scatter.rfind("user_id,modality,max_speed,std_abs_accel\n", 0) == 0);
  CHECK(std::count(scatter.begin(), scatter.end(), '\n') == 1 + 105);
}

TEST_CASE("anomaly outputs are consistent") {
  AnomalyConfig cfg;
  cfg.trials_per_user = 2;
  cfg.seed = 1;
  const auto report = run_anomaly_experiment(separable_dataset(), cfg);
  const auto trials = anomaly_trials_csv(report);
  CHECK(trials.rfind("subject_user,trial,seed,n_normal,n_anomaly,pr_auc_lof,pr_auc_random\n", 0) == 0);
  CHECK(std::count(trials.begin(), trials.end(), '\n') == 1 + 6);
  const auto per_user = anomaly_per_user_csv(report);
  CHECK(std::count(per_user.begin(), per_user.end(), '\n') == 1 + 3);

  const auto doc = json::parse(anomaly_summary_json(report));
  CHECK(doc.at("trials").get<std::size_t>() == 6);
  for (const char* scorer : {"lof", "random"}) {
    const auto& s = doc.at(scorer);
    CHECK(s.at("min").get<double>() <= s.at("median").get<double>());
    CHECK(s.at("median").get<double>() <= s.at("max").get<double>());
  }
}
