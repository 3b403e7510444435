#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "trajkin/error.hpp"
#include "trajkin/features.hpp"
#include "trajkin/learn.hpp"
#include "trajkin/synth.hpp"

using namespace trajkin;

namespace {

UserProfile profile(const std::string& id, double cruise) {
  UserProfile p;
  p.user_id = id;
  p.mean_cruise_speed = cruise;
  return p;
}

bool strictly_ascending(const Trip& trip) {
  for (std::size_t i = 1; i < trip.points.size(); ++i) {
    if (!(trip.points[i].timestamp > trip.points[i - 1].timestamp)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("constant motion without noise") {
  UserProfile p = profile("u", 8.0);
  p.speed_jitter = 0.0;
  p.accel_scale = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = extract_features(generate_trip(p, seed));
    CHECK(f.std_speed <= 1e-6);
    CHECK(std::fabs(f.mean_speed - 8.0) <= 1e-6);
    CHECK(std::fabs(f.max_speed - 8.0) <= 1e-6);
    CHECK(std::fabs(f.min_speed - 8.0) <= 1e-6);
    CHECK(f.duration == doctest::Approx(119 * 5.0));
  }
}

TEST_CASE("generated trips satisfy the trip invariants") {
  UserProfile p = profile("u", 3.0);
  p.gps_noise_std = 5.0;
  p.accel_scale = 1.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Trip t = generate_trip(p, seed, 1.3e9);
    CHECK(t.points.size() == p.points_per_trip);
    CHECK(strictly_ascending(t));
    CHECK(t.points.front().timestamp == 1.3e9);
    CHECK(t.modality == "bike");
    for (const auto& pt : t.points) CHECK(is_valid(pt));
    CHECK(extract_features(t).min_speed >= 0.0);
  }
}

TEST_CASE("modality_for_speed") {
  CHECK(modality_for_speed(1.0) == "walk");
  CHECK(modality_for_speed(5.0) == "bike");
  CHECK(modality_for_speed(10.0) == "bus");
  CHECK(modality_for_speed(20.0) == "car");
}

TEST_CASE("profile validation") {
  UserProfile p = profile("u", 5.0);
  p.points_per_trip = 2;
  CHECK(test::code_of([&] { generate_trip(p, 1); }) == ErrorCode::InvalidArgument);
  p = profile("", 5.0);
  CHECK(test::code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  p = profile("u", -1.0);
  CHECK(test::code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("disjoint profiles are separated by a depth-1 tree") {
  UserProfile slow = profile("slow", 3.0);
  UserProfile fast = profile("fast", 20.0);
  for (auto* p : {&slow, &fast}) {
    p->speed_jitter = 0.3;
    p->accel_scale = 0.05;
  }
  const std::vector<UserProfile> profiles{slow, fast};
  const auto corpus = generate_corpus(profiles, 4);
  std::vector<LabeledVector> rows;
  for (const auto& t : corpus.trips) rows.push_back({t.user_id, extract_features(t).to_vector()});
  const auto tree = train_tree(rows, TreeParams{1, 2});
  CHECK(tree.depth() == 1);
  for (const auto& r : rows) CHECK(tree.classes()[tree.predict(r.x).label] == r.label);
}

TEST_CASE("decimation lowers the observed peak speed") {
  UserProfile p = profile("u", 10.0);
  p.sampling_period = 1.0;
  p.points_per_trip = 1201;
  p.accel_scale = 0.5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Trip fine = generate_trip(p, seed);
    const Trip coarse = decimate_trip(fine, 60);
    CHECK(coarse.points.size() == 21);
    CHECK(extract_features(coarse).max_speed < extract_features(fine).max_speed);
  }
  CHECK(test::code_of([&] { decimate_trip(generate_trip(p, 0), 0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("generate_corpus size and determinism") {
  std::vector<UserProfile> profiles;
  for (int u = 0; u < 26; ++u) profiles.push_back(profile("user" + std::to_string(u), 2.0 + u));
  const auto a = generate_corpus(profiles, 77);
  CHECK(a.trips.size() == 26 * 40);
  CHECK(generate_corpus(profiles, 77).trips == a.trips);
  CHECK(generate_corpus(profiles, 78).trips != a.trips);
  // Trips of one user never overlap in time.
  for (std::size_t i = 1; i < 40; ++i) {
    CHECK(a.trips[i].points.front().timestamp > a.trips[i - 1].points.back().timestamp);
  }
}

TEST_CASE("mean observed speed tracks the cruise speed") {
  UserProfile p = profile("u", 12.0);
  p.trips = 150;
  const std::vector<UserProfile> profiles{p};
  const auto corpus = generate_corpus(profiles, 31);
  std::vector<double> means;
  for (const auto& t : corpus.trips) means.push_back(extract_features(t).mean_speed);
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(means.size());
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  const double se = std::sqrt(var / static_cast<double>(means.size())) /
                    std::sqrt(static_cast<double>(means.size()));
  CHECK(std::fabs(m - 12.0) <= 3 * se);
}

TEST_CASE("written corpus reingests to the same trips") {
  UserProfile a = profile("000", 4.0);
  UserProfile b = profile("001", 15.0);
  a.trips = 6;
  b.trips = 5;
  b.gps_noise_std = 3.0;
  const std::vector<UserProfile> profiles{a, b};
  const auto corpus = generate_corpus(profiles, 12);
  test::TempDir dir;
  write_corpus(corpus, dir.path());

  const auto load = load_dataset(dir.path());
  REQUIRE(load.archives.size() == 2);
  CHECK(load.warnings.empty());
  std::vector<Trip> back;
  for (const auto& archive : load.archives) {
    const auto assembly = assemble_trips(archive);
    CHECK(assembly.skipped_labels == 0);
    back.insert(back.end(), assembly.trips.begin(), assembly.trips.end());
  }
  // Start times and the sampling period are whole seconds, so truncation on
  // write is lossless here.
  CHECK(back == corpus.trips);
}

TEST_CASE("fractional timestamps are truncated on write") {
  UserProfile p = profile("000", 4.0);
  p.trips = 1;
  p.sampling_period = 2.5;
  p.points_per_trip = 5;
  SyntheticCorpus corpus;
  corpus.profiles = {p};
  corpus.trips = {generate_trip(p, 3)};
  test::TempDir dir;
  write_corpus(corpus, dir.path());
  const auto load = load_dataset(dir.path());
  REQUIRE(load.archives.size() == 1);
  const auto trips = assemble_trips(load.archives[0]).trips;
  REQUIRE(trips.size() == 1);
  REQUIRE(trips[0].points.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(trips[0].points[i].timestamp == std::floor(corpus.trips[0].points[i].timestamp));
    CHECK(trips[0].points[i].latitude == corpus.trips[0].points[i].latitude);
  }
}
