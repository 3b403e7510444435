#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "temp_dir.hpp"
#include "trajkin/error.hpp"

namespace test {

template <typename Fn>
trajkin::ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const trajkin::Error& e) {
    return e.code();
  }
  FAIL("expected trajkin::Error");
  return trajkin::ErrorCode::Io;
}

inline void write(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace test

#include <numbers>
#include <span>
#include <vector>

#include "trajkin/geo.hpp"

namespace test {

// Points along the meridian through (lat0, 116.4) covering the given
// per-interval distances (meters) with the given time steps.
inline std::vector<trajkin::GpsPoint> meridian_trip(std::span<const double> distances,
                                                   std::span<const double> steps,
                                                   double lat0 = 39.9, double t0 = 1.2e9) {
  constexpr double kDegPerMeter = 180.0 / (std::numbers::pi * trajkin::kEarthRadiusMeters);
  std::vector<trajkin::GpsPoint> pts{{t0, lat0, 116.4}};
  double travelled = 0.0, t = t0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    travelled += distances[i];
    t += steps[i];
    pts.push_back({t, lat0 + travelled * kDegPerMeter, 116.4});
  }
  return pts;
}

}  // namespace test
