#pragma once

// Great-circle distance and finite-difference kinematics over GPS samples.

#include <span>
#include <vector>

namespace trajkin {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

struct GpsPoint {
  double timestamp = 0.0;  // seconds since Unix epoch, UTC
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]

  bool operator==(const GpsPoint&) const = default;
};

struct SpeedSample {
  double interval_end_time = 0.0;
  double speed = 0.0;  // m/s

  bool operator==(const SpeedSample&) const = default;
};

struct AccelerationSample {
  double interval_end_time = 0.0;
  double acceleration = 0.0;  // m/s^2

  bool operator==(const AccelerationSample&) const = default;
};

bool is_valid(const GpsPoint& p);

// Haversine distance in meters on a sphere of radius kEarthRadiusMeters.
double haversine_distance(const GpsPoint& a, const GpsPoint& b);

// Point reached by travelling `distance` meters from `origin` along the
// great circle with initial `bearing_deg` (clockwise from north). The
// timestamp is copied from origin.
GpsPoint destination_point(const GpsPoint& origin, double bearing_deg,
                           double distance);

// Speed over each consecutive pair. Throws TooFewPoints for fewer than two
// points and DuplicateTimestamp for any non-increasing timestamp.
std::vector<SpeedSample> speed_sequence(std::span<const GpsPoint> points);

// Rate of change between consecutive speed samples, divided by the elapsed
// time between their interval end times.
std::vector<AccelerationSample> acceleration_sequence(
    std::span<const SpeedSample> speeds);

}  // namespace trajkin
