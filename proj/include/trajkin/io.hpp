#pragma once

// File formats shared by the pipeline stages and the CLI.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trajkin/anomaly.hpp"
#include "trajkin/features.hpp"
#include "trajkin/learn.hpp"
#include "trajkin/synth.hpp"

namespace trajkin {

inline constexpr std::string_view kFeaturesCsvHeader =
    "user_id,modality,duration_s,max_speed,min_speed,max_pos_accel,min_neg_accel,"
    "mean_speed,mean_abs_accel,std_speed,std_accel,std_abs_accel";

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

std::string format_features_csv(std::span<const FeatureRow> rows);
// Throws MalformedLine (with line number) or EmptyFile.
std::vector<FeatureRow> parse_features_csv(std::string_view text);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string provenance_json(const FeatureDataset& dataset);

// Structured JSON: per-fold metrics, mean/std per model, per-class
// precision/recall and the dense confusion matrix with its class order.
std::string classification_report_json(const ClassificationReport& report);
// Long format: true_label,predicted_label,count
std::string confusion_matrix_csv(const ClassificationReport& report);
std::string per_class_metrics_csv(const ClassificationReport& report);
// user_id,modality,<x name>,<y name> for each row.
std::string feature_scatter_csv(std::span<const FeatureRow> rows, std::size_t x_feature,
                                std::size_t y_feature);

std::string anomaly_trials_csv(const AnomalyReport& report);
std::string anomaly_per_user_csv(const AnomalyReport& report);
std::string anomaly_summary_json(const AnomalyReport& report);

// JSON array of profile objects; missing optional fields take the
// UserProfile defaults.
std::vector<UserProfile> parse_profiles_json(std::string_view text);

}  // namespace trajkin
