#include "trajkin/learn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "trajkin/error.hpp"
#include "trajkin/random.hpp"

namespace trajkin {
namespace {

__extension__ using Int128 = __int128;

// A candidate split scores SL/nL + SR/nR where S is the sum of squared class
// counts on a side; maximizing it minimizes weighted Gini impurity. Kept as
// an exact fraction so equal-impurity candidates compare equal and the
// documented tie-break applies.
struct SplitScore {
  std::uint64_t numerator = 0;    // SL*nR + SR*nL
  std::uint64_t denominator = 1;  // nL*nR

  bool better_than(const SplitScore& other) const {
    return static_cast<Int128>(numerator) * other.denominator >
           static_cast<Int128>(other.numerator) * denominator;
  }
};

struct Candidate {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  SplitScore score;
};

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles: the midpoint can round up to hi, which would send hi
  // to the left child.
  return mid < hi ? mid : lo;
}

Candidate best_split(std::span<const LabeledVector> rows,
                     std::span<const std::size_t> label_ids,
                     std::span<const std::size_t> members,
                     std::span<const std::size_t> node_counts,
                     std::size_t n_classes) {
  Candidate best;
  const std::size_t n = members.size();
  std::uint64_t total_sq = 0;
  for (std::size_t c : node_counts) total_sq += static_cast<std::uint64_t>(c) * c;

  std::vector<std::size_t> order(members.begin(), members.end());
  std::vector<std::size_t> left(n_classes);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return rows[a].x[f] < rows[b].x[f];
    });
    std::fill(left.begin(), left.end(), 0);
    std::uint64_t left_sq = 0;
    std::uint64_t right_sq = total_sq;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t c = label_ids[order[i]];
      const std::uint64_t right_c = node_counts[c] - left[c];
      left_sq += 2 * static_cast<std::uint64_t>(left[c]) + 1;
      right_sq -= 2 * right_c - 1;
      ++left[c];

      const double here = rows[order[i]].x[f];
      const double next = rows[order[i + 1]].x[f];
      if (!(here < next)) continue;
      const std::uint64_t n_left = i + 1;
      const std::uint64_t n_right = n - n_left;
      const SplitScore score{left_sq * n_right + right_sq * n_left, n_left * n_right};
      // Strict improvement only: earlier features and lower thresholds win ties.
      if (!best.found || score.better_than(best.score)) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = midpoint(here, next);
        best.score = score;
      }
    }
  }
  return best;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

void summarize(ModelSummary& summary) {
  std::vector<double> acc, auc, f1;
  for (const auto& s : summary.folds) {
    acc.push_back(s.accuracy);
    auc.push_back(s.roc_auc);
    f1.push_back(s.macro_f1);
  }
  summary.accuracy = mean_std(acc);
  summary.roc_auc = mean_std(auc);
  summary.macro_f1 = mean_std(f1);
}

ModelScores score(std::span<const std::size_t> truth,
                  std::span<const std::size_t> predicted,
                  std::span<const std::vector<double>> probabilities,
                  std::size_t n_classes) {
  return {accuracy(truth, predicted),
          roc_auc_ovr_macro(truth, probabilities, n_classes),
          macro_f1(truth, predicted, n_classes)};
}

}  // namespace

std::vector<LabeledVector> to_labeled(std::span<const FeatureRow> rows) {
  std::vector<LabeledVector> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back({row.user_id, row.features.to_vector()});
  return out;
}

std::vector<std::string> classes_by_frequency(std::span<const std::string> labels) {
  std::map<std::string, std::size_t> counts;
  for (const auto& label : labels) ++counts[label];
  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (auto& [label, count] : entries) out.push_back(std::move(label));
  return out;
}

std::vector<std::string> classes_by_frequency(std::span<const LabeledVector> rows) {
  std::vector<std::string> labels;
  labels.reserve(rows.size());
  for (const auto& row : rows) labels.push_back(row.label);
  return classes_by_frequency(labels);
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t max_depth = 0;
  while (!stack.empty()) {
    const auto [node, d] = stack.back();
    stack.pop_back();
    max_depth = std::max(max_depth, d);
    if (!nodes_[node].is_leaf()) {
      stack.push_back({nodes_[node].left, d + 1});
      stack.push_back({nodes_[node].right, d + 1});
    }
  }
  return max_depth;
}

Prediction DecisionTree::predict(const FeatureVector& x) const {
  std::size_t node = 0;
  while (!nodes_[node].is_leaf()) {
    const TreeNode& n = nodes_[node];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  const auto& counts = nodes_[node].class_counts;
  const double total = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  Prediction p;
  p.probabilities.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    p.probabilities[c] = static_cast<double>(counts[c]) / total;
  }
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[p.label] ||
        (counts[c] == counts[p.label] && tie_rank_[c] < tie_rank_[p.label])) {
      p.label = c;
    }
  }
  return p;
}

DecisionTree train_tree(std::span<const LabeledVector> rows,
                        const std::vector<std::string>& classes,
                        const TreeParams& params) {
  if (rows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
  const std::size_t n_classes = classes.size();
  std::unordered_map<std::string, std::size_t> class_id;
  for (std::size_t c = 0; c < n_classes; ++c) class_id.emplace(classes[c], c);

  std::vector<std::size_t> label_ids(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto it = class_id.find(rows[i].label);
    if (it == class_id.end()) {
      throw Error(ErrorCode::InvalidArgument, "label not in class list: " + rows[i].label);
    }
    label_ids[i] = it->second;
  }

  DecisionTree tree;
  tree.classes_ = classes;

  std::vector<std::size_t> root_counts(n_classes, 0);
  for (std::size_t id : label_ids) ++root_counts[id];
  std::vector<std::size_t> by_rank(n_classes);
  std::iota(by_rank.begin(), by_rank.end(), 0);
  std::stable_sort(by_rank.begin(), by_rank.end(), [&](std::size_t a, std::size_t b) {
    if (root_counts[a] != root_counts[b]) return root_counts[a] > root_counts[b];
    return classes[a] < classes[b];
  });
  tree.tie_rank_.resize(n_classes);
  for (std::size_t r = 0; r < n_classes; ++r) tree.tie_rank_[by_rank[r]] = r;

  struct Pending {
    std::size_t node;
    std::size_t depth;
    std::vector<std::size_t> members;
  };
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  tree.nodes_.push_back(TreeNode{-1, 0.0, 0, 0, root_counts});
  std::vector<Pending> stack;
  stack.push_back({0, 0, std::move(all)});

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const auto counts = tree.nodes_[job.node].class_counts;
    const auto nonzero = std::count_if(counts.begin(), counts.end(),
                                       [](std::size_t c) { return c > 0; });
    if (nonzero <= 1 || job.members.size() < params.min_samples_split ||
        (params.max_depth > 0 && job.depth >= params.max_depth)) {
      continue;
    }
    const Candidate split = best_split(rows, label_ids, job.members, counts, n_classes);
    if (!split.found) continue;  // every feature constant within the node

    Pending left{0, job.depth + 1, {}};
    Pending right{0, job.depth + 1, {}};
    std::vector<std::size_t> left_counts(n_classes, 0), right_counts(n_classes, 0);
    const auto f = static_cast<std::size_t>(split.feature);
    for (std::size_t i : job.members) {
      if (rows[i].x[f] <= split.threshold) {
        left.members.push_back(i);
        ++left_counts[label_ids[i]];
      } else {
        right.members.push_back(i);
        ++right_counts[label_ids[i]];
      }
    }
    left.node = tree.nodes_.size();
    tree.nodes_.push_back(TreeNode{-1, 0.0, 0, 0, std::move(left_counts)});
    right.node = tree.nodes_.size();
    tree.nodes_.push_back(TreeNode{-1, 0.0, 0, 0, std::move(right_counts)});
    TreeNode& parent = tree.nodes_[job.node];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left.node;
    parent.right = right.node;
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return tree;
}

DecisionTree train_tree(std::span<const LabeledVector> rows, const TreeParams& params) {
  return train_tree(rows, classes_by_frequency(rows), params);
}

std::vector<std::size_t> FoldAssignment::test_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::train_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] != fold) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_kfold(std::span<const std::string> labels, std::size_t k,
                                std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  FoldAssignment folds;
  folds.k = k;
  folds.fold_of_row.assign(labels.size(), 0);
  Rng rng(seed);
  std::size_t dealer = 0;
  for (auto& [label, members] : by_class) {
    if (members.size() < k) {
      throw Error(ErrorCode::ClassTooSmall,
                  "class " + label + " has " + std::to_string(members.size()) +
                      " rows, fewer than k = " + std::to_string(k));
    }
    shuffle(std::span<std::size_t>(members), rng);
    for (std::size_t i : members) {
      folds.fold_of_row[i] = dealer % k;
      ++dealer;
    }
  }
  return folds;
}

FoldAssignment stratified_kfold(std::span<const LabeledVector> rows, std::size_t k,
                                std::uint64_t seed) {
  std::vector<std::string> labels;
  labels.reserve(rows.size());
  for (const auto& row : rows) labels.push_back(row.label);
  return stratified_kfold(labels, k, seed);
}

BaselinePredictions weighted_random_baseline(std::span<const std::size_t> train_histogram,
                                             std::size_t test_size, std::uint64_t seed) {
  const double total = static_cast<double>(
      std::accumulate(train_histogram.begin(), train_histogram.end(), std::size_t{0}));
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyTrainingSet, "empty label histogram");
  std::vector<double> distribution(train_histogram.size());
  for (std::size_t c = 0; c < train_histogram.size(); ++c) {
    distribution[c] = static_cast<double>(train_histogram[c]) / total;
  }
  std::size_t last_nonzero = 0;
  for (std::size_t c = 0; c < train_histogram.size(); ++c) {
    if (train_histogram[c] > 0) last_nonzero = c;
  }

  BaselinePredictions out;
  out.labels.reserve(test_size);
  out.probabilities.assign(test_size, distribution);
  Rng rng(seed);
  for (std::size_t i = 0; i < test_size; ++i) {
    const double u = uniform01(rng) * total;
    double cumulative = 0.0;
    std::size_t chosen = last_nonzero;
    for (std::size_t c = 0; c < train_histogram.size(); ++c) {
      cumulative += static_cast<double>(train_histogram[c]);
      if (u < cumulative) {
        chosen = c;
        break;
      }
    }
    out.labels.push_back(chosen);
  }
  return out;
}

BaselinePredictions uniform_random_baseline(std::size_t n_classes, std::size_t test_size,
                                            std::uint64_t seed) {
  if (n_classes == 0) throw Error(ErrorCode::InvalidArgument, "no classes");
  BaselinePredictions out;
  out.labels.reserve(test_size);
  out.probabilities.assign(test_size,
                           std::vector<double>(n_classes, 1.0 / static_cast<double>(n_classes)));
  Rng rng(seed);
  for (std::size_t i = 0; i < test_size; ++i) {
    out.labels.push_back(static_cast<std::size_t>(uniform_index(rng, n_classes)));
  }
  return out;
}

double accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::InvalidArgument, "label vectors differ in length");
  }
  if (truth.empty()) throw Error(ErrorCode::EmptyInput, "accuracy of empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double macro_f1(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                std::size_t n_classes) {
  const ConfusionMatrix cm = ConfusionMatrix::from_predictions(truth, predicted, n_classes);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const std::size_t support = cm.row_sum(c);
    if (support == 0) continue;
    ++present;
    const std::size_t tp = cm.at(c, c);
    const std::size_t predicted_c = cm.column_sum(c);
    if (tp == 0) continue;
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted_c);
    const double recall = static_cast<double>(tp) / static_cast<double>(support);
    sum += 2.0 * precision * recall / (precision + recall);
  }
  if (present == 0) throw Error(ErrorCode::EmptyInput, "macro F1 of empty input");
  return sum / static_cast<double>(present);
}

double binary_roc_auc(std::span<const std::uint8_t> positive, std::span<const double> scores) {
  if (positive.size() != scores.size()) {
    throw Error(ErrorCode::InvalidArgument, "labels and scores differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share their average.
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        positive_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::Undefined, "ROC-AUC needs positives and negatives");
  }
  const double p = static_cast<double>(n_pos);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(n_neg));
}

double roc_auc_ovr_macro(std::span<const std::size_t> truth,
                         std::span<const std::vector<double>> probabilities,
                         std::size_t n_classes) {
  if (truth.size() != probabilities.size()) {
    throw Error(ErrorCode::InvalidArgument, "labels and probabilities differ in length");
  }
  std::vector<std::uint8_t> positive(truth.size());
  std::vector<double> scores(truth.size());
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      positive[i] = truth[i] == c;
      n_pos += positive[i];
      scores[i] = probabilities[i].at(c);
    }
    if (n_pos == 0 || n_pos == truth.size()) continue;
    sum += binary_roc_auc(positive, scores);
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::Undefined, "no class has both positives and negatives");
  }
  return sum / static_cast<double>(used);
}

void ConfusionMatrix::add(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw Error(ErrorCode::InvalidArgument, "confusion size mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < n_; ++t) s += at(t, predicted);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < n_; ++c) s += at(c, c);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

ConfusionMatrix ConfusionMatrix::from_predictions(std::span<const std::size_t> truth,
                                                  std::span<const std::size_t> predicted,
                                                  std::size_t n_classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::InvalidArgument, "label vectors differ in length");
  }
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n_classes || predicted[i] >= n_classes) {
      throw Error(ErrorCode::InvalidArgument, "class index out of range");
    }
    cm.add(truth[i], predicted[i]);
  }
  return cm;
}

ClassificationReport run_classification(const FeatureDataset& dataset,
                                        const ClassificationConfig& config) {
  const auto rows = to_labeled(dataset.rows);
  if (rows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "empty feature dataset");

  ClassificationReport report;
  report.config = config;
  report.classes = classes_by_frequency(rows);
  const std::size_t n_classes = report.classes.size();
  std::unordered_map<std::string, std::size_t> class_id;
  for (std::size_t c = 0; c < n_classes; ++c) class_id.emplace(report.classes[c], c);

  report.tree.name = "decision_tree";
  report.weighted.name = "weighted_guess";
  report.uniform.name = "random_guess";
  report.confusion = ConfusionMatrix(n_classes);

  const FoldAssignment folds = stratified_kfold(rows, config.k, derive_seed(config.seed, 0));
  for (std::size_t fold = 0; fold < config.k; ++fold) {
    const auto train_idx = folds.train_rows(fold);
    const auto test_idx = folds.test_rows(fold);

    std::vector<LabeledVector> train;
    train.reserve(train_idx.size());
    std::vector<std::size_t> histogram(n_classes, 0);
    for (std::size_t i : train_idx) {
      train.push_back(rows[i]);
      ++histogram[class_id.at(rows[i].label)];
    }
    std::vector<std::size_t> truth;
    truth.reserve(test_idx.size());
    for (std::size_t i : test_idx) truth.push_back(class_id.at(rows[i].label));

    const DecisionTree tree = train_tree(train, report.classes, config.tree);
    std::vector<std::size_t> predicted;
    std::vector<std::vector<double>> probabilities;
    predicted.reserve(test_idx.size());
    probabilities.reserve(test_idx.size());
    for (std::size_t i : test_idx) {
      Prediction p = tree.predict(rows[i].x);
      predicted.push_back(p.label);
      probabilities.push_back(std::move(p.probabilities));
    }
    report.tree.folds.push_back(score(truth, predicted, probabilities, n_classes));
    report.confusion.add(ConfusionMatrix::from_predictions(truth, predicted, n_classes));

    const auto weighted =
        weighted_random_baseline(histogram, test_idx.size(), derive_seed(config.seed, 1, fold));
    report.weighted.folds.push_back(
        score(truth, weighted.labels, weighted.probabilities, n_classes));
    const auto uniform =
        uniform_random_baseline(n_classes, test_idx.size(), derive_seed(config.seed, 2, fold));
    report.uniform.folds.push_back(
        score(truth, uniform.labels, uniform.probabilities, n_classes));
  }
  summarize(report.tree);
  summarize(report.weighted);
  summarize(report.uniform);

  for (std::size_t c = 0; c < n_classes; ++c) {
    ClassMetrics m;
    m.class_id = report.classes[c];
    m.support = report.confusion.row_sum(c);
    const std::size_t tp = report.confusion.at(c, c);
    const std::size_t predicted_c = report.confusion.column_sum(c);
    m.precision = predicted_c == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted_c);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support);
    report.per_class.push_back(std::move(m));
  }
  return report;
}

}  // namespace trajkin
