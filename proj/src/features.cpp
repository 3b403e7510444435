#include "trajkin/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "trajkin/error.hpp"

namespace trajkin {
namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

// Two-pass population moments.
Moments moments(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

FeatureVector KinematicFeatures::to_vector() const {
  return {duration,   max_speed,      min_speed, max_pos_accel, min_neg_accel,
          mean_speed, mean_abs_accel, std_speed, std_accel,     std_abs_accel};
}

KinematicFeatures KinematicFeatures::from_vector(const FeatureVector& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

std::vector<std::string> FeatureDataset::users() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& row : rows) {
    if (seen.insert(row.user_id).second) out.push_back(row.user_id);
  }
  return out;
}

KinematicFeatures extract_features(std::span<const GpsPoint> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::TooFewPoints,
                "features need at least 3 points, got " +
                    std::to_string(points.size()));
  }
  const auto speeds = speed_sequence(points);
  const auto accels = acceleration_sequence(speeds);

  std::vector<double> speed_values;
  speed_values.reserve(speeds.size());
  for (const auto& s : speeds) speed_values.push_back(s.speed);
  std::vector<double> accel_values, abs_accel_values;
  accel_values.reserve(accels.size());
  abs_accel_values.reserve(accels.size());
  for (const auto& a : accels) {
    accel_values.push_back(a.acceleration);
    abs_accel_values.push_back(std::abs(a.acceleration));
  }

  const auto [min_speed, max_speed] =
      std::minmax_element(speed_values.begin(), speed_values.end());
  const auto [min_accel, max_accel] =
      std::minmax_element(accel_values.begin(), accel_values.end());
  const Moments speed = moments(speed_values);
  const Moments accel = moments(accel_values);
  const Moments abs_accel = moments(abs_accel_values);

  KinematicFeatures f;
  f.duration = points.back().timestamp - points.front().timestamp;
  f.max_speed = *max_speed;
  f.min_speed = *min_speed;
  f.max_pos_accel = *max_accel;
  f.min_neg_accel = *min_accel;
  // Rounding can push the mean a hair outside [min, max] when all samples
  // are equal.
  f.mean_speed = std::clamp(speed.mean, f.min_speed, f.max_speed);
  f.mean_abs_accel = abs_accel.mean;
  f.std_speed = speed.stddev;
  f.std_accel = accel.stddev;
  f.std_abs_accel = abs_accel.stddev;
  return f;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty input");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile fraction outside [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

IqrBounds compute_iqr_bounds(std::span<const FeatureRow> rows, double multiplier) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "IQR bounds of empty input");
  IqrBounds bounds{};
  std::vector<double> column(rows.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = rows[i].features.to_vector()[f];
    }
    FeatureBounds& b = bounds[f];
    b.q1 = quantile(column, 0.25);
    b.q3 = quantile(column, 0.75);
    const double iqr = b.q3 - b.q1;
    b.lower = b.q1 - multiplier * iqr;
    b.upper = b.q3 + multiplier * iqr;
  }
  return bounds;
}

OutlierFilterResult filter_outlier_trips(std::span<const FeatureRow> rows,
                                         const IqrBounds& bounds) {
  OutlierFilterResult result;
  for (const auto& row : rows) {
    const FeatureVector v = row.features.to_vector();
    bool keep = true;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (!bounds[f].contains(v[f])) {
        ++result.drops_by_feature[f];
        keep = false;
      }
    }
    if (keep) {
      result.rows.push_back(row);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

FeatureDataset filter_users(std::span<const FeatureRow> rows, std::size_t min_trips) {
  FeatureDataset dataset;
  auto& per_user = dataset.provenance.per_user;
  for (const auto& row : rows) ++per_user[row.user_id].before;
  for (const auto& row : rows) {
    if (per_user[row.user_id].before >= min_trips) {
      dataset.rows.push_back(row);
      ++per_user[row.user_id].after;
    } else {
      ++dataset.provenance.user_below_threshold;
    }
  }
  for (const auto& [user, counts] : per_user) {
    if (counts.after == 0) ++dataset.provenance.users_removed;
  }
  return dataset;
}

FeatureDataset build_feature_dataset(std::span<const Trip> trips,
                                     const PipelineConfig& config) {
  Provenance provenance;
  provenance.trips_in = trips.size();

  std::vector<FeatureRow> rows;
  rows.reserve(trips.size());
  for (const auto& trip : trips) {
    try {
      rows.push_back({trip.user_id, trip.modality, extract_features(trip)});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TooFewPoints) {
        ++provenance.too_few_points;
      } else if (e.code() == ErrorCode::DuplicateTimestamp) {
        ++provenance.duplicate_timestamp;
      } else {
        throw;
      }
    }
  }

  std::vector<FeatureRow> survivors;
  if (!rows.empty()) {
    const IqrBounds bounds = compute_iqr_bounds(rows, config.iqr_multiplier);
    auto filtered = filter_outlier_trips(rows, bounds);
    provenance.iqr_outlier = filtered.dropped;
    provenance.iqr_drops_by_feature = filtered.drops_by_feature;
    provenance.bounds = bounds;
    survivors = std::move(filtered.rows);
  }

  FeatureDataset dataset = filter_users(survivors, config.min_trips);
  provenance.user_below_threshold = dataset.provenance.user_below_threshold;
  provenance.users_removed = dataset.provenance.users_removed;
  provenance.per_user = std::move(dataset.provenance.per_user);
  dataset.provenance = std::move(provenance);
  return dataset;
}

}  // namespace trajkin
