#pragma once

// Per-trip kinematic features, pooled IQR outlier removal and the minimum
// trips-per-user filter.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajkin/ingest.hpp"

namespace trajkin {

inline constexpr std::size_t kFeatureCount = 10;

using FeatureVector = std::array<double, kFeatureCount>;

// Column names, in FeatureVector order, as written to the features CSV.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "duration_s",    "max_speed",      "min_speed", "max_pos_accel",
    "min_neg_accel", "mean_speed",     "mean_abs_accel", "std_speed",
    "std_accel",     "std_abs_accel",
};

struct KinematicFeatures {
  double duration = 0.0;        // s
  double max_speed = 0.0;       // m/s
  double min_speed = 0.0;       // m/s
  double max_pos_accel = 0.0;   // m/s^2, plain maximum of the samples
  double min_neg_accel = 0.0;   // m/s^2, plain minimum of the samples
  double mean_speed = 0.0;      // m/s
  double mean_abs_accel = 0.0;  // m/s^2
  double std_speed = 0.0;       // m/s, population
  double std_accel = 0.0;       // m/s^2, population
  double std_abs_accel = 0.0;   // m/s^2, population

  FeatureVector to_vector() const;
  static KinematicFeatures from_vector(const FeatureVector& v);

  bool operator==(const KinematicFeatures&) const = default;
};

struct FeatureRow {
  std::string user_id;
  std::string modality;
  KinematicFeatures features;

  bool operator==(const FeatureRow&) const = default;
};

struct FeatureBounds {
  double q1 = 0.0;
  double q3 = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double v) const { return v >= lower && v <= upper; }
};

using IqrBounds = std::array<FeatureBounds, kFeatureCount>;

struct UserCounts {
  std::size_t before = 0;
  std::size_t after = 0;
};

struct Provenance {
  std::size_t trips_in = 0;
  std::size_t too_few_points = 0;
  std::size_t duplicate_timestamp = 0;
  std::size_t iqr_outlier = 0;
  // A trip outside several bounds is counted once per offending feature.
  std::array<std::size_t, kFeatureCount> iqr_drops_by_feature{};
  std::size_t user_below_threshold = 0;  // trips
  std::size_t users_removed = 0;
  std::map<std::string, UserCounts> per_user;
  std::optional<IqrBounds> bounds;
};

struct FeatureDataset {
  std::vector<FeatureRow> rows;
  Provenance provenance;

  // Distinct user ids in first-appearance order.
  std::vector<std::string> users() const;
};

struct OutlierFilterResult {
  std::vector<FeatureRow> rows;
  std::array<std::size_t, kFeatureCount> drops_by_feature{};
  std::size_t dropped = 0;
};

struct PipelineConfig {
  double iqr_multiplier = 1.5;
  std::size_t min_trips = 30;
};

// Throws TooFewPoints for fewer than 3 points and DuplicateTimestamp for
// non-increasing timestamps.
KinematicFeatures extract_features(std::span<const GpsPoint> points);
inline KinematicFeatures extract_features(const Trip& trip) {
  return extract_features(trip.points);
}

// Linear interpolation between order statistics at position (n-1)*q.
double quantile(std::span<const double> values, double q);

IqrBounds compute_iqr_bounds(std::span<const FeatureRow> rows,
                             double multiplier = 1.5);

OutlierFilterResult filter_outlier_trips(std::span<const FeatureRow> rows,
                                         const IqrBounds& bounds);

FeatureDataset filter_users(std::span<const FeatureRow> rows,
                            std::size_t min_trips = 30);

// extract -> IQR filter -> user threshold, with every drop recorded.
FeatureDataset build_feature_dataset(std::span<const Trip> trips,
                                     const PipelineConfig& config = {});

}  // namespace trajkin
