#pragma once

// Synthetic trajectories with per-user kinematic profiles.
//
// Motion is one-dimensional along a great circle from a random origin near
// Beijing. Each trip draws a cruise speed from N(mean_cruise_speed,
// speed_jitter); the speed then follows a mean-reverting random walk towards
// it, clipped at 0, with step std accel_scale * sampling_period. Coordinates
// get isotropic Gaussian noise of gps_noise_std meters.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trajkin/ingest.hpp"

namespace trajkin {

struct UserProfile {
  std::string user_id;
  double mean_cruise_speed = 10.0;  // m/s
  double speed_jitter = 1.0;        // m/s
  double accel_scale = 0.2;         // m/s^2
  std::size_t trips = 40;
  std::size_t points_per_trip = 120;
  double sampling_period = 5.0;  // s
  double gps_noise_std = 0.0;    // m

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

// Fraction of the gap to the cruise speed recovered per step.
inline constexpr double kSpeedReversion = 0.1;
// Default first trip start: 2008-01-01T00:00:00Z.
inline constexpr double kDefaultSynthStart = 1199145600.0;

// Label token for a cruise speed: walk, bike, bus or car.
std::string modality_for_speed(double cruise_speed);

Trip generate_trip(const UserProfile& profile, std::uint64_t seed,
                   double start_time = kDefaultSynthStart);

// Every `stride`-th point of the trip, starting with the first.
Trip decimate_trip(const Trip& trip, std::size_t stride);

struct SyntheticCorpus {
  std::vector<Trip> trips;
  std::vector<UserProfile> profiles;
};

SyntheticCorpus generate_corpus(std::span<const UserProfile> profiles, std::uint64_t seed);

// Writes root/Data/<user>/Trajectory/<start>.plt (one file per trip) and
// root/Data/<user>/labels.txt. Timestamps are truncated to whole seconds.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& root);

}  // namespace trajkin
