#pragma once

// Geolife-format trajectory (PLT) and label file handling, and assembly of
// modality-labeled trips from labeled time intervals.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajkin/geo.hpp"

namespace trajkin {

enum class Modality {
  Walk,
  Bike,
  Bus,
  Car,
  Taxi,
  Subway,
  Train,
  Airplane,
  Boat,
  Run,
  Motorcycle,
  Other,
};

// Maps a label token onto the known modalities; unrecognized tokens map to
// Modality::Other. The token itself is always kept verbatim on the label.
Modality modality_kind(std::string_view token);

struct TripLabel {
  double start_time = 0.0;
  double end_time = 0.0;
  std::string modality;

  bool operator==(const TripLabel&) const = default;
};

struct Trip {
  std::string user_id;
  std::string modality;
  std::vector<GpsPoint> points;  // strictly ascending timestamps

  bool operator==(const Trip&) const = default;
};

struct UserArchive {
  std::string user_id;
  std::vector<std::vector<GpsPoint>> trajectories;  // one per PLT file
  std::vector<TripLabel> labels;                    // sorted by start_time
};

struct LabelParseResult {
  std::vector<TripLabel> labels;
  std::size_t dropped_inverted = 0;  // rows with start >= end
};

struct TripAssembly {
  std::vector<Trip> trips;
  std::size_t skipped_labels = 0;  // labels matching fewer than 2 points
};

struct DatasetLoad {
  std::vector<UserArchive> archives;
  std::size_t users_without_labels = 0;
  std::size_t dropped_inverted_labels = 0;
  std::vector<std::string> warnings;
};

// Epoch seconds for a UTC civil date/time. Throws InvalidArgument on an
// impossible date or time of day.
double utc_epoch_seconds(int year, unsigned month, unsigned day, unsigned hour,
                         unsigned minute, unsigned second);

std::vector<GpsPoint> parse_plt(std::string_view text);
LabelParseResult parse_labels(std::string_view text);

TripAssembly assemble_trips(const UserArchive& archive);

// Loads root/Data/<user>/Trajectory/*.plt plus root/Data/<user>/labels.txt.
// Users without a usable labels.txt are skipped and counted. Throws
// MissingRoot when root/Data is not a directory.
DatasetLoad load_dataset(const std::filesystem::path& root);

// Inverse of parse_plt for whole-second timestamps.
std::string format_plt(std::span<const GpsPoint> points);
std::string format_labels(std::span<const TripLabel> labels);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace trajkin
