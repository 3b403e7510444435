#include "trajkin/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>

#include "trajkin/error.hpp"
#include "trajkin/random.hpp"

namespace trajkin {
namespace {

constexpr double kMetersPerDegreeLat = kEarthRadiusMeters * std::numbers::pi / 180.0;
constexpr double kGapBetweenTrips = 3600.0;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string plt_name(double start_time) {
  // Geolife names trajectory files after their first timestamp.
  using namespace std::chrono;
  const sys_seconds tp{seconds{static_cast<long long>(std::floor(start_time))}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d%02u%02u%02ld%02ld%02ld.plt",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

}  // namespace

void UserProfile::validate() const {
  if (user_id.empty()) throw Error(ErrorCode::InvalidArgument, "profile needs a user_id");
  if (!(mean_cruise_speed > 0.0) || !(speed_jitter >= 0.0) || !(accel_scale >= 0.0) ||
      !(sampling_period > 0.0) || !(gps_noise_std >= 0.0) || trips == 0 ||
      points_per_trip < 3) {
    throw Error(ErrorCode::InvalidArgument, "profile " + user_id + " has an invalid field");
  }
}

std::string modality_for_speed(double cruise_speed) {
  if (cruise_speed < 2.5) return "walk";
  if (cruise_speed < 7.0) return "bike";
  if (cruise_speed < 12.0) return "bus";
  return "car";
}

Trip generate_trip(const UserProfile& profile, std::uint64_t seed, double start_time) {
  profile.validate();
  Rng rng(seed);
  const GpsPoint origin{start_time, 39.9 + (uniform01(rng) - 0.5) * 0.2,
                        116.4 + (uniform01(rng) - 0.5) * 0.3};
  const double bearing = uniform01(rng) * 360.0;
  const double cruise =
      std::max(0.0, profile.mean_cruise_speed + profile.speed_jitter * standard_normal(rng));
  const double step_std = profile.accel_scale * profile.sampling_period;

  const auto noisy = [&](GpsPoint p) {
    if (profile.gps_noise_std > 0.0) {
      const double north = profile.gps_noise_std * standard_normal(rng);
      const double east = profile.gps_noise_std * standard_normal(rng);
      p.latitude += north / kMetersPerDegreeLat;
      p.longitude += east / (kMetersPerDegreeLat * std::cos(p.latitude * std::numbers::pi / 180.0));
    }
    return p;
  };

  Trip trip;
  trip.user_id = profile.user_id;
  trip.modality = modality_for_speed(profile.mean_cruise_speed);
  trip.points.reserve(profile.points_per_trip);
  trip.points.push_back(noisy(origin));
  double speed = cruise;
  double travelled = 0.0;
  for (std::size_t i = 1; i < profile.points_per_trip; ++i) {
    travelled += speed * profile.sampling_period;
    GpsPoint p = destination_point(origin, bearing, travelled);
    p.timestamp = start_time + static_cast<double>(i) * profile.sampling_period;
    trip.points.push_back(noisy(p));
    speed = std::max(0.0, speed + kSpeedReversion * (cruise - speed) +
                              step_std * standard_normal(rng));
  }
  return trip;
}

Trip decimate_trip(const Trip& trip, std::size_t stride) {
  if (stride == 0) throw Error(ErrorCode::InvalidArgument, "stride must be positive");
  Trip out{trip.user_id, trip.modality, {}};
  for (std::size_t i = 0; i < trip.points.size(); i += stride) {
    out.points.push_back(trip.points[i]);
  }
  return out;
}

SyntheticCorpus generate_corpus(std::span<const UserProfile> profiles, std::uint64_t seed) {
  SyntheticCorpus corpus;
  corpus.profiles.assign(profiles.begin(), profiles.end());
  for (std::size_t u = 0; u < profiles.size(); ++u) {
    const UserProfile& profile = profiles[u];
    profile.validate();
    const double trip_span =
        static_cast<double>(profile.points_per_trip - 1) * profile.sampling_period;
    for (std::size_t t = 0; t < profile.trips; ++t) {
      const double start =
          kDefaultSynthStart + static_cast<double>(t) * std::ceil(trip_span + kGapBetweenTrips);
      corpus.trips.push_back(generate_trip(profile, derive_seed(seed, u, t), start));
    }
  }
  return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::map<std::string, std::vector<const Trip*>> by_user;
  for (const auto& profile : corpus.profiles) by_user[profile.user_id];
  for (const auto& trip : corpus.trips) by_user[trip.user_id].push_back(&trip);

  std::error_code ec;
  for (const auto& [user, trips] : by_user) {
    const fs::path user_dir = root / "Data" / user;
    fs::create_directories(user_dir / "Trajectory", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + user_dir.string());
    std::vector<TripLabel> labels;
    for (const Trip* trip : trips) {
      write_file(user_dir / "Trajectory" / plt_name(trip->points.front().timestamp),
                 format_plt(trip->points));
      labels.push_back({std::floor(trip->points.front().timestamp),
                        std::floor(trip->points.back().timestamp), trip->modality});
    }
    write_file(user_dir / "labels.txt", format_labels(labels));
  }
}

}  // namespace trajkin
