#include "trajkin/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trajkin/error.hpp"

namespace trajkin {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

bool is_valid(const GpsPoint& p) {
  return std::isfinite(p.timestamp) && p.latitude >= -90.0 &&
         p.latitude <= 90.0 && p.longitude >= -180.0 && p.longitude <= 180.0;
}

double haversine_distance(const GpsPoint& a, const GpsPoint& b) {
  const double lat1 = a.latitude * kDegToRad;
  const double lat2 = b.latitude * kDegToRad;
  const double sin_dlat = std::sin((b.latitude - a.latitude) * kDegToRad / 2.0);
  const double sin_dlon =
      std::sin((b.longitude - a.longitude) * kDegToRad / 2.0);
  // The product cos(lat1) * cos(lat2) is commutative, and both squared sines
  // are even in their argument, so the result is exactly symmetric.
  double h = sin_dlat * sin_dlat +
             std::cos(lat1) * std::cos(lat2) * sin_dlon * sin_dlon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

GpsPoint destination_point(const GpsPoint& origin, double bearing_deg,
                           double distance) {
  const double delta = distance / kEarthRadiusMeters;
  const double theta = bearing_deg * kDegToRad;
  const double lat1 = origin.latitude * kDegToRad;
  const double lon1 = origin.longitude * kDegToRad;

  const double sin_lat2 = std::sin(lat1) * std::cos(delta) +
                          std::cos(lat1) * std::sin(delta) * std::cos(theta);
  const double lat2 = std::asin(std::clamp(sin_lat2, -1.0, 1.0));
  const double lon2 =
      lon1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(lat1),
                        std::cos(delta) - std::sin(lat1) * sin_lat2);

  double lon_deg = lon2 / kDegToRad;
  lon_deg = std::remainder(lon_deg, 360.0);
  return GpsPoint{origin.timestamp, lat2 / kDegToRad, lon_deg};
}

std::vector<SpeedSample> speed_sequence(std::span<const GpsPoint> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::TooFewPoints,
                "speed needs at least 2 points, got " +
                    std::to_string(points.size()));
  }
  std::vector<SpeedSample> out;
  out.reserve(points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double dt = points[i + 1].timestamp - points[i].timestamp;
    if (!(dt > 0.0)) {
      throw Error(ErrorCode::DuplicateTimestamp,
                  "non-increasing timestamp at point " + std::to_string(i + 1));
    }
    out.push_back({points[i + 1].timestamp,
                   haversine_distance(points[i], points[i + 1]) / dt});
  }
  return out;
}

std::vector<AccelerationSample> acceleration_sequence(
    std::span<const SpeedSample> speeds) {
  if (speeds.size() < 2) {
    throw Error(ErrorCode::TooFewPoints,
                "acceleration needs at least 2 speed samples, got " +
                    std::to_string(speeds.size()));
  }
  std::vector<AccelerationSample> out;
  out.reserve(speeds.size() - 1);
  for (std::size_t i = 0; i + 1 < speeds.size(); ++i) {
    const double dt =
        speeds[i + 1].interval_end_time - speeds[i].interval_end_time;
    if (!(dt > 0.0)) {
      throw Error(ErrorCode::DuplicateTimestamp,
                  "non-increasing speed sample time at index " +
                      std::to_string(i + 1));
    }
    out.push_back(
        {speeds[i + 1].interval_end_time, (speeds[i + 1].speed - speeds[i].speed) / dt});
  }
  return out;
}

}  // namespace trajkin
