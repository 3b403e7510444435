#include "trajkin/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include "trajkin/error.hpp"

namespace trajkin {
namespace {

constexpr std::size_t kPltHeaderLines = 6;
constexpr std::size_t kPltFields = 7;
constexpr double kSecondsPerDay = 86400.0;
// Days between 1899-12-30 (the PLT day-count origin) and 1970-01-01.
constexpr double kPltEpochOffsetDays = 25569.0;

// Splits text into lines, stripping a trailing '\r' from each.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    begin = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t end = line.find(sep, begin);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::MalformedLine,
              "line " + std::to_string(line_no) + ": " + why, line_no);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Parses "<date><date_sep><time>" where date is YYYY?MM?DD with the given
// separator and time is HH:MM:SS.
bool parse_date(std::string_view s, char sep, int& y, unsigned& m, unsigned& d) {
  const auto parts = split(trim(s), sep);
  return parts.size() == 3 && parse_int(parts[0], y) && parse_int(parts[1], m) &&
         parse_int(parts[2], d);
}

bool parse_time(std::string_view s, unsigned& h, unsigned& mi, unsigned& sec) {
  const auto parts = split(trim(s), ':');
  return parts.size() == 3 && parse_int(parts[0], h) &&
         parse_int(parts[1], mi) && parse_int(parts[2], sec);
}

bool to_epoch(int y, unsigned m, unsigned d, unsigned h, unsigned mi,
              unsigned sec, double& out) {
  try {
    out = utc_epoch_seconds(y, m, d, h, mi, sec);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// "YYYY/MM/DD HH:MM:SS"
bool parse_label_time(std::string_view s, double& out) {
  s = trim(s);
  const std::size_t space = s.find(' ');
  if (space == std::string_view::npos) return false;
  int y = 0;
  unsigned m = 0, d = 0, h = 0, mi = 0, sec = 0;
  return parse_date(s.substr(0, space), '/', y, m, d) &&
         parse_time(s.substr(space + 1), h, mi, sec) &&
         to_epoch(y, m, d, h, mi, sec, out);
}

void append_number(std::string& out, double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::string two_digits(unsigned v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

struct CivilTime {
  int year;
  unsigned month, day, hour, minute, second;
};

CivilTime civil_from_epoch(double epoch_seconds) {
  using namespace std::chrono;
  const auto whole = static_cast<long long>(std::floor(epoch_seconds));
  const sys_seconds tp{seconds{whole}};
  const auto day_point = floor<days>(tp);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{tp - day_point};
  return {static_cast<int>(ymd.year()),
          static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day()),
          static_cast<unsigned>(hms.hours().count()),
          static_cast<unsigned>(hms.minutes().count()),
          static_cast<unsigned>(hms.seconds().count())};
}

}  // namespace

Modality modality_kind(std::string_view token) {
  static constexpr std::pair<std::string_view, Modality> kTokens[] = {
      {"walk", Modality::Walk},         {"bike", Modality::Bike},
      {"bus", Modality::Bus},           {"car", Modality::Car},
      {"taxi", Modality::Taxi},         {"subway", Modality::Subway},
      {"train", Modality::Train},       {"airplane", Modality::Airplane},
      {"boat", Modality::Boat},         {"run", Modality::Run},
      {"motorcycle", Modality::Motorcycle},
  };
  for (const auto& [name, kind] : kTokens) {
    if (name == token) return kind;
  }
  return Modality::Other;
}

double utc_epoch_seconds(int year, unsigned month, unsigned day, unsigned hour,
                         unsigned minute, unsigned second) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
    throw Error(ErrorCode::InvalidArgument, "invalid calendar date or time");
  }
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days_since_epoch) * kSecondsPerDay +
         static_cast<double>(hour * 3600U + minute * 60U + second);
}

std::vector<GpsPoint> parse_plt(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<GpsPoint> points;
  for (std::size_t i = kPltHeaderLines; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() != kPltFields) {
      malformed(line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    GpsPoint p;
    double ignored = 0.0;
    if (!parse_double(fields[0], p.latitude) ||
        !parse_double(fields[1], p.longitude)) {
      malformed(line_no, "unparsable coordinate");
    }
    // Fields 3-5 (constant, altitude, fractional day count) are not used,
    // but must still be numeric.
    for (std::size_t f = 2; f < 5; ++f) {
      if (!parse_double(fields[f], ignored)) {
        malformed(line_no, "unparsable numeric field " + std::to_string(f + 1));
      }
    }
    int y = 0;
    unsigned m = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!parse_date(fields[5], '-', y, m, d) || !parse_time(fields[6], h, mi, sec) ||
        !to_epoch(y, m, d, h, mi, sec, p.timestamp)) {
      malformed(line_no, "unparsable date/time");
    }
    if (!is_valid(p)) malformed(line_no, "coordinate out of range");
    points.push_back(p);
  }
  if (points.empty()) throw Error(ErrorCode::EmptyFile, "PLT file has no data lines");
  return points;
}

LabelParseResult parse_labels(std::string_view text) {
  const auto lines = split_lines(text);
  LabelParseResult result;
  bool any_data = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    any_data = true;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 3) {
      malformed(line_no, "expected 3 tab-separated fields, got " +
                             std::to_string(fields.size()));
    }
    TripLabel label;
    if (!parse_label_time(fields[0], label.start_time) ||
        !parse_label_time(fields[1], label.end_time)) {
      malformed(line_no, "unparsable label time");
    }
    label.modality = std::string(trim(fields[2]));
    if (label.modality.empty()) malformed(line_no, "empty modality");
    if (label.start_time >= label.end_time) {
      ++result.dropped_inverted;
      continue;
    }
    result.labels.push_back(std::move(label));
  }
  if (!any_data) throw Error(ErrorCode::EmptyFile, "label file has no data lines");
  return result;
}

TripAssembly assemble_trips(const UserArchive& archive) {
  std::vector<GpsPoint> merged;
  for (const auto& trajectory : archive.trajectories) {
    merged.insert(merged.end(), trajectory.begin(), trajectory.end());
  }
  // Stable sort keeps file order among equal timestamps, so unique() below
  // retains the first occurrence.
  std::stable_sort(merged.begin(), merged.end(),
                   [](const GpsPoint& a, const GpsPoint& b) {
                     return a.timestamp < b.timestamp;
                   });
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](const GpsPoint& a, const GpsPoint& b) {
                             return a.timestamp == b.timestamp;
                           }),
               merged.end());

  TripAssembly result;
  for (const auto& label : archive.labels) {
    const auto first = std::lower_bound(
        merged.begin(), merged.end(), label.start_time,
        [](const GpsPoint& p, double t) { return p.timestamp < t; });
    const auto last = std::upper_bound(
        first, merged.end(), label.end_time,
        [](double t, const GpsPoint& p) { return t < p.timestamp; });
    if (last - first < 2) {
      ++result.skipped_labels;
      continue;
    }
    result.trips.push_back(
        Trip{archive.user_id, label.modality, std::vector<GpsPoint>(first, last)});
  }
  return result;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

DatasetLoad load_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const fs::path data_dir = root / "Data";
  std::error_code ec;
  if (!fs::is_directory(data_dir, ec)) {
    throw Error(ErrorCode::MissingRoot,
                "expected a Geolife directory at " + data_dir.string());
  }

  std::vector<fs::path> user_dirs;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.is_directory()) user_dirs.push_back(entry.path());
  }
  std::sort(user_dirs.begin(), user_dirs.end());

  DatasetLoad result;
  if (user_dirs.empty()) {
    result.warnings.push_back("no user directories under " + data_dir.string());
    return result;
  }

  for (const auto& user_dir : user_dirs) {
    const std::string user_id = user_dir.filename().string();
    const fs::path labels_path = user_dir / "labels.txt";
    if (!fs::is_regular_file(labels_path)) {
      ++result.users_without_labels;
      continue;
    }

    UserArchive archive;
    archive.user_id = user_id;
    try {
      auto parsed = parse_labels(read_text_file(labels_path));
      result.dropped_inverted_labels += parsed.dropped_inverted;
      archive.labels = std::move(parsed.labels);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyFile) {
        ++result.users_without_labels;
        continue;
      }
      throw Error(e.code(), labels_path.string() + ": " + e.what(), e.line());
    }
    if (archive.labels.empty()) {
      ++result.users_without_labels;
      continue;
    }
    std::stable_sort(archive.labels.begin(), archive.labels.end(),
                     [](const TripLabel& a, const TripLabel& b) {
                       return a.start_time < b.start_time;
                     });

    std::vector<fs::path> plt_files;
    const fs::path trajectory_dir = user_dir / "Trajectory";
    if (fs::is_directory(trajectory_dir)) {
      for (const auto& entry : fs::directory_iterator(trajectory_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".plt") {
          plt_files.push_back(entry.path());
        }
      }
    }
    std::sort(plt_files.begin(), plt_files.end());
    for (const auto& plt : plt_files) {
      try {
        archive.trajectories.push_back(parse_plt(read_text_file(plt)));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::EmptyFile) {
          result.warnings.push_back("empty trajectory file " + plt.string());
          continue;
        }
        throw Error(e.code(), plt.string() + ": " + e.what(), e.line());
      }
    }
    result.archives.push_back(std::move(archive));
  }
  return result;
}

std::string format_plt(std::span<const GpsPoint> points) {
  std::string out =
      "Geolife trajectory\r\nWGS 84\r\nAltitude is in Feet\r\n"
      "Reserved 3\r\n0,2,255,My Track,0,0,2,8421376\r\n0\r\n";
  for (const auto& p : points) {
    const CivilTime c = civil_from_epoch(p.timestamp);
    append_number(out, p.latitude);
    out += ',';
    append_number(out, p.longitude);
    out += ",0,0,";
    append_number(out, std::floor(p.timestamp) / kSecondsPerDay + kPltEpochOffsetDays);
    out += ',';
    out += std::to_string(c.year) + "-" + two_digits(c.month) + "-" +
           two_digits(c.day) + "," + two_digits(c.hour) + ":" +
           two_digits(c.minute) + ":" + two_digits(c.second) + "\r\n";
  }
  return out;
}

std::string format_labels(std::span<const TripLabel> labels) {
  std::string out = "Start Time\tEnd Time\tTransportation Mode\r\n";
  const auto stamp = [](double t) {
    const CivilTime c = civil_from_epoch(t);
    return std::to_string(c.year) + "/" + two_digits(c.month) + "/" +
           two_digits(c.day) + " " + two_digits(c.hour) + ":" +
           two_digits(c.minute) + ":" + two_digits(c.second);
  };
  for (const auto& label : labels) {
    out += stamp(label.start_time) + "\t" + stamp(label.end_time) + "\t" +
           label.modality + "\r\n";
  }
  return out;
}

}  // namespace trajkin
