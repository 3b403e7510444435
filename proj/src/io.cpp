#include "trajkin/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "json.hpp"
#include "trajkin/error.hpp"

namespace trajkin {
namespace {

using nlohmann::json;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t end = line.find(',', begin);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
}

void check_plain_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") != std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument,
                "field cannot be written to CSV unquoted: " + std::string(field));
  }
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.stddev}}; }

json model_json(const ModelSummary& model) {
  json folds = json::array();
  for (std::size_t i = 0; i < model.folds.size(); ++i) {
    folds.push_back({{"fold", i},
                     {"accuracy", model.folds[i].accuracy},
                     {"roc_auc", model.folds[i].roc_auc},
                     {"macro_f1", model.folds[i].macro_f1}});
  }
  return {{"name", model.name},
          {"folds", folds},
          {"accuracy", mean_std_json(model.accuracy)},
          {"roc_auc", mean_std_json(model.roc_auc)},
          {"macro_f1", mean_std_json(model.macro_f1)}};
}

json summary_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"min", s.min},
          {"median", s.median}, {"max", s.max}};
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_features_csv(std::span<const FeatureRow> rows) {
  std::string out(kFeaturesCsvHeader);
  out += '\n';
  for (const auto& row : rows) {
    check_plain_field(row.user_id);
    check_plain_field(row.modality);
    out += row.user_id;
    out += ',';
    out += row.modality;
    for (double v : row.features.to_vector()) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<FeatureRow> parse_features_csv(std::string_view text) {
  std::vector<FeatureRow> rows;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  bool saw_header = false;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!saw_header) {
      if (line != kFeaturesCsvHeader) {
        throw Error(ErrorCode::MalformedLine, "line 1: unexpected features CSV header", 1);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != 2 + kFeatureCount) {
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": expected 12 fields", line_no);
    }
    FeatureRow row;
    row.user_id = std::string(fields[0]);
    row.modality = std::string(fields[1]);
    FeatureVector v{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto field = fields[2 + f];
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v[f]);
      if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v[f])) {
        throw Error(ErrorCode::MalformedLine,
                    "line " + std::to_string(line_no) + ": bad value for " +
                        std::string(kFeatureNames[f]),
                    line_no);
      }
    }
    row.features = KinematicFeatures::from_vector(v);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, "features CSV has no data rows");
  return rows;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string provenance_json(const FeatureDataset& dataset) {
  const Provenance& p = dataset.provenance;
  json drops = json::object();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    drops[std::string(kFeatureNames[f])] = p.iqr_drops_by_feature[f];
  }
  json users = json::object();
  for (const auto& [user, counts] : p.per_user) {
    users[user] = {{"before", counts.before}, {"after", counts.after}};
  }
  json doc = {{"trips_in", p.trips_in},
              {"too_few_points", p.too_few_points},
              {"duplicate_timestamp", p.duplicate_timestamp},
              {"iqr_outlier", p.iqr_outlier},
              {"iqr_drops_by_feature", drops},
              {"user_below_threshold", p.user_below_threshold},
              {"users_removed", p.users_removed},
              {"final_trips", dataset.rows.size()},
              {"final_users", dataset.users().size()},
              {"per_user", users}};
  if (p.bounds) {
    json bounds = json::object();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& b = (*p.bounds)[f];
      bounds[std::string(kFeatureNames[f])] = {
          {"q1", b.q1}, {"q3", b.q3}, {"lower", b.lower}, {"upper", b.upper}};
    }
    doc["iqr_bounds"] = bounds;
  }
  return doc.dump(2) + "\n";
}

std::string classification_report_json(const ClassificationReport& report) {
  json matrix = json::array();
  for (std::size_t t = 0; t < report.confusion.size(); ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < report.confusion.size(); ++p) {
      row.push_back(report.confusion.at(t, p));
    }
    matrix.push_back(row);
  }
  json per_class = json::array();
  for (const auto& m : report.per_class) {
    per_class.push_back({{"class", m.class_id},
                         {"support", m.support},
                         {"precision", m.precision},
                         {"recall", m.recall}});
  }
  json doc = {{"k_folds", report.config.k},
              {"seed", report.config.seed},
              {"max_depth", report.config.tree.max_depth},
              {"min_samples_split", report.config.tree.min_samples_split},
              {"classes", report.classes},
              {"models", json::array({model_json(report.tree), model_json(report.weighted),
                                      model_json(report.uniform)})},
              {"per_class", per_class},
              {"confusion_matrix", {{"rows", "true"}, {"columns", "predicted"},
                                    {"order", report.classes}, {"counts", matrix}}}};
  return doc.dump(2) + "\n";
}

std::string confusion_matrix_csv(const ClassificationReport& report) {
  std::string out = "true_label,predicted_label,count\n";
  for (std::size_t t = 0; t < report.confusion.size(); ++t) {
    for (std::size_t p = 0; p < report.confusion.size(); ++p) {
      out += report.classes[t] + "," + report.classes[p] + "," +
             std::to_string(report.confusion.at(t, p)) + "\n";
    }
  }
  return out;
}

std::string per_class_metrics_csv(const ClassificationReport& report) {
  std::string out = "class,support,precision,recall\n";
  for (const auto& m : report.per_class) {
    out += m.class_id + "," + std::to_string(m.support) + "," + format_double(m.precision) +
           "," + format_double(m.recall) + "\n";
  }
  return out;
}

std::string feature_scatter_csv(std::span<const FeatureRow> rows, std::size_t x_feature,
                                std::size_t y_feature) {
  if (x_feature >= kFeatureCount || y_feature >= kFeatureCount) {
    throw Error(ErrorCode::InvalidArgument, "feature index out of range");
  }
  std::string out = "user_id,modality," + std::string(kFeatureNames[x_feature]) + "," +
                    std::string(kFeatureNames[y_feature]) + "\n";
  for (const auto& row : rows) {
    const FeatureVector v = row.features.to_vector();
    out += row.user_id + "," + row.modality + "," + format_double(v[x_feature]) + "," +
           format_double(v[y_feature]) + "\n";
  }
  return out;
}

std::string anomaly_trials_csv(const AnomalyReport& report) {
  std::string out = "subject_user,trial,seed,n_normal,n_anomaly,pr_auc_lof,pr_auc_random\n";
  for (const auto& t : report.trials) {
    out += t.subject + "," + std::to_string(t.trial) + "," + std::to_string(t.seed) + "," +
           std::to_string(t.n_normal) + "," + std::to_string(t.n_anomaly) + "," +
           format_double(t.pr_auc_lof) + "," + format_double(t.pr_auc_random) + "\n";
  }
  return out;
}

std::string anomaly_per_user_csv(const AnomalyReport& report) {
  std::string out = "user_id,mean_pr_auc_lof,max_pr_auc_lof,mean_pr_auc_random\n";
  for (const auto& u : report.per_user) {
    out += u.user_id + "," + format_double(u.mean_lof) + "," + format_double(u.max_lof) +
           "," + format_double(u.mean_random) + "\n";
  }
  return out;
}

std::string anomaly_summary_json(const AnomalyReport& report) {
  json doc = {{"trials", report.trials.size()},
              {"trials_per_user", report.config.trials_per_user},
              {"rate", report.config.rate},
              {"lof_k", report.config.lof_k},
              {"seed", report.config.seed},
              {"lof", summary_json(report.lof)},
              {"random", summary_json(report.random)}};
  return doc.dump(2) + "\n";
}

std::vector<UserProfile> parse_profiles_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedLine, std::string("profiles JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::MalformedLine, "profiles JSON must be an array");
  std::vector<UserProfile> profiles;
  try {
    for (const auto& item : doc) {
      UserProfile p;
      p.user_id = item.at("user_id").get<std::string>();
      p.mean_cruise_speed = item.value("mean_cruise_speed", p.mean_cruise_speed);
      p.speed_jitter = item.value("speed_jitter", p.speed_jitter);
      p.accel_scale = item.value("accel_scale", p.accel_scale);
      p.trips = item.value("trips", p.trips);
      p.points_per_trip = item.value("points_per_trip", p.points_per_trip);
      p.sampling_period = item.value("sampling_period", p.sampling_period);
      p.gps_noise_std = item.value("gps_noise_std", p.gps_noise_std);
      p.validate();
      profiles.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedLine, std::string("profiles JSON: ") + e.what());
  }
  if (profiles.empty()) throw Error(ErrorCode::EmptyFile, "no profiles given");
  return profiles;
}

}  // namespace trajkin
