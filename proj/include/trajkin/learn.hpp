#pragma once

// User-wise trip classification: CART decision tree, stratified folds,
// random baselines and the classification metrics.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trajkin/features.hpp"

namespace trajkin {

struct LabeledVector {
  std::string label;
  FeatureVector x{};
};

std::vector<LabeledVector> to_labeled(std::span<const FeatureRow> rows);

// Class ids ordered by descending frequency, then lexicographically.
std::vector<std::string> classes_by_frequency(std::span<const std::string> labels);
std::vector<std::string> classes_by_frequency(std::span<const LabeledVector> rows);

struct TreeParams {
  std::size_t max_depth = 0;  // 0 means unlimited
  std::size_t min_samples_split = 2;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  std::vector<std::size_t> class_counts;  // indexed like DecisionTree::classes()

  bool is_leaf() const { return feature < 0; }
};

struct Prediction {
  std::size_t label = 0;  // index into the class list
  std::vector<double> probabilities;
};

class DecisionTree {
 public:
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

  // Routes x to a leaf. Ties in the leaf's class counts go to the class with
  // more training rows, then the lexicographically smaller id.
  Prediction predict(const FeatureVector& x) const;

 private:
  friend DecisionTree train_tree(std::span<const LabeledVector>,
                                 const std::vector<std::string>&,
                                 const TreeParams&);

  std::vector<std::string> classes_;
  std::vector<std::size_t> tie_rank_;
  std::vector<TreeNode> nodes_;
};

// CART with Gini impurity. Every label must appear in `classes`; the
// probability vectors of predict() follow that order.
DecisionTree train_tree(std::span<const LabeledVector> rows,
                        const std::vector<std::string>& classes,
                        const TreeParams& params = {});
DecisionTree train_tree(std::span<const LabeledVector> rows,
                        const TreeParams& params = {});

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of_row;

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

// Per class (in lexicographic order) the row indices are shuffled and dealt
// round-robin into the folds. The dealing position carries over between
// classes so the overall fold sizes stay balanced too.
FoldAssignment stratified_kfold(std::span<const std::string> labels,
                                std::size_t k, std::uint64_t seed);
FoldAssignment stratified_kfold(std::span<const LabeledVector> rows,
                                std::size_t k, std::uint64_t seed);

struct BaselinePredictions {
  std::vector<std::size_t> labels;
  std::vector<std::vector<double>> probabilities;
};

BaselinePredictions weighted_random_baseline(
    std::span<const std::size_t> train_histogram, std::size_t test_size,
    std::uint64_t seed);
BaselinePredictions uniform_random_baseline(std::size_t n_classes,
                                            std::size_t test_size,
                                            std::uint64_t seed);

double accuracy(std::span<const std::size_t> truth,
                std::span<const std::size_t> predicted);

// Unweighted mean of per-class F1 over the classes present in `truth`.
double macro_f1(std::span<const std::size_t> truth,
                std::span<const std::size_t> predicted, std::size_t n_classes);

// Mann-Whitney AUC with ties counted as one half. Throws Undefined when
// either side is empty.
double binary_roc_auc(std::span<const std::uint8_t> positive,
                      std::span<const double> scores);

// One-vs-rest AUC per class, macro-averaged over classes that have both
// positives and negatives.
double roc_auc_ovr_macro(std::span<const std::size_t> truth,
                         std::span<const std::vector<double>> probabilities,
                         std::size_t n_classes);

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 0)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t size() const { return n_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * n_ + predicted];
  }
  void add(std::size_t truth, std::size_t predicted, std::size_t count = 1) {
    counts_[truth * n_ + predicted] += count;
  }
  void add(const ConfusionMatrix& other);

  std::size_t row_sum(std::size_t truth) const;
  std::size_t column_sum(std::size_t predicted) const;
  std::size_t trace() const;
  std::size_t total() const;

  static ConfusionMatrix from_predictions(std::span<const std::size_t> truth,
                                          std::span<const std::size_t> predicted,
                                          std::size_t n_classes);

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

struct ModelScores {
  double accuracy = 0.0;
  double roc_auc = 0.0;
  double macro_f1 = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population, across folds
};

struct ModelSummary {
  std::string name;
  std::vector<ModelScores> folds;
  MeanStd accuracy;
  MeanStd roc_auc;
  MeanStd macro_f1;
};

struct ClassMetrics {
  std::string class_id;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
};

struct ClassificationConfig {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  TreeParams tree;
};

struct ClassificationReport {
  ClassificationConfig config;
  std::vector<std::string> classes;  // descending trip count
  ModelSummary tree;
  ModelSummary weighted;
  ModelSummary uniform;
  ConfusionMatrix confusion;  // decision tree, summed over folds
  std::vector<ClassMetrics> per_class;
};

ClassificationReport run_classification(const FeatureDataset& dataset,
                                        const ClassificationConfig& config = {});

}  // namespace trajkin
