#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "simdiag/classify.hpp"
#include "simdiag/features.hpp"
#include "simdiag/joint_diag.hpp"
#include "simdiag/matrix_core.hpp"

namespace simdiag {

/// Matrices with binary labels and subject (group) identifiers.
class LabeledDataset {
 public:
  /// `sample_ids` defaults to the decimal sample index when empty.
  LabeledDataset(SymmetricMatrixSet matrices, std::vector<int> labels,
                 std::vector<std::string> subject_ids, std::vector<std::string> sample_ids = {});

  std::size_t size() const noexcept { return labels_.size(); }
  const SymmetricMatrixSet& matrices() const noexcept { return matrices_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& subject_ids() const noexcept { return subject_ids_; }
  const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }

  /// Throws single_class unless labels are 0/1 with both present.
  void require_binary() const;

 private:
  SymmetricMatrixSet matrices_;
  std::vector<int> labels_;
  std::vector<std::string> subject_ids_;
  std::vector<std::string> sample_ids_;
};

struct CVConfig {
  int folds = 10;
  int repeats = 100;
  bool grouped = true;
  bool transductive = false;
  std::uint64_t seed = 0;
  int inner_folds = 3;  // hyperparameter tuning on the training fold

  void validate() const;
};

/// Fraction of positive/negative pairs ranked correctly, ties counted half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// k disjoint test-index sets. Groups never straddle folds; group counts per
/// fold differ by at most one and each class's groups are dealt evenly.
/// Depends only on (labels, group ids, seed), not on sample order.
std::vector<std::vector<std::size_t>> stratified_group_kfold(std::span<const int> labels,
                                                             std::span<const std::string> groups,
                                                             int k, std::uint64_t seed);

struct PipelineConfig {
  std::string task = "task";
  FeatureMethod feature_method = FeatureMethod::joint_diag;
  ModelKind model = ModelKind::logreg;
  CVConfig cv;
  JointDiagConfig joint;
  TrainConfig train = default_train_config(ModelKind::logreg);
};

struct EvalReport {
  PipelineConfig config;
  std::vector<double> per_repeat;  // mean test-fold AUC of every valid repeat
  double mean_auc = 0.0;
  double std_auc = 0.0;  // population std over per_repeat
  std::vector<std::string> warnings;
};

/// Seen once per trained outer-fold model. Indices refer to the caller's dataset order.
struct FoldRecord {
  int repeat = 0;
  int fold = 0;
  std::span<const std::size_t> test_indices;
  const LinearModel& model;
  double auc = 0.0;
};

using FoldObserver = std::function<void(const FoldRecord&)>;

/// Repeated stratified (group) k-fold CV with nested tuning and ROC AUC.
EvalReport run_cv(const LabeledDataset& dataset, const PipelineConfig& config,
                  const FoldObserver& observer = {});

std::string report_to_json(const EvalReport& report);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);

}  // namespace simdiag
