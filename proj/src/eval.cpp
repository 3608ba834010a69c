#include "simdiag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "random_util.hpp"
#include "simdiag/error.hpp"

namespace simdiag {

LabeledDataset::LabeledDataset(SymmetricMatrixSet matrices, std::vector<int> labels,
                               std::vector<std::string> subject_ids,
                               std::vector<std::string> sample_ids)
    : matrices_(std::move(matrices)),
      labels_(std::move(labels)),
      subject_ids_(std::move(subject_ids)),
      sample_ids_(std::move(sample_ids)) {
  if (sample_ids_.empty()) {
    for (std::size_t i = 0; i < labels_.size(); ++i) sample_ids_.push_back(std::to_string(i));
  }
  const std::size_t n = matrices_.count();
  if (labels_.size() != n || subject_ids_.size() != n || sample_ids_.size() != n) {
    throw Error(ErrorCategory::dimension_mismatch,
                "dataset: matrices, labels, subject ids and sample ids must have equal length");
  }
}

void LabeledDataset::require_binary() const {
  bool has0 = false, has1 = false;
  for (int label : labels_) {
    if (label != 0 && label != 1) {
      throw Error(ErrorCategory::invalid_argument, "dataset: labels must be 0 or 1");
    }
    has0 = has0 || label == 0;
    has1 = has1 || label == 1;
  }
  if (!has0 || !has1) throw Error(ErrorCategory::single_class, "dataset: both classes must be present");
}

void CVConfig::validate() const {
  if (folds < 2 || repeats < 1 || inner_folds < 2) {
    throw Error(ErrorCategory::invalid_argument, "cv config: folds >= 2, repeats >= 1, inner_folds >= 2 required");
  }
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCategory::dimension_mismatch, "roc_auc: scores and labels differ in length");
  }
  double positives = 0.0, negatives = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCategory::invalid_argument, "roc_auc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw Error(ErrorCategory::non_finite, "roc_auc: NaN score");
    (labels[i] == 1 ? positives : negatives) += 1.0;
  }
  if (positives == 0.0 || negatives == 0.0) {
    throw Error(ErrorCategory::single_class, "roc_auc: both classes must be present");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double concordant = 0.0;
  double negatives_below = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    double tied_pos = 0.0, tied_neg = 0.0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      (labels[order[end]] == 1 ? tied_pos : tied_neg) += 1.0;
      ++end;
    }
    concordant += tied_pos * negatives_below + 0.5 * tied_pos * tied_neg;
    negatives_below += tied_neg;
    start = end;
  }
  return concordant / (positives * negatives);
}

std::vector<std::vector<std::size_t>> stratified_group_kfold(std::span<const int> labels,
                                                             std::span<const std::string> groups,
                                                             int k, std::uint64_t seed) {
  if (labels.size() != groups.size()) {
    throw Error(ErrorCategory::dimension_mismatch, "stratified_group_kfold: labels and groups differ in length");
  }
  if (k < 2) throw Error(ErrorCategory::invalid_argument, "stratified_group_kfold: k must be >= 2");

  struct Group {
    std::vector<std::size_t> members;
    int positives = 0;
  };
  // std::map keys the group order on ids alone.
  std::map<std::string, Group> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Group& g = by_id[groups[i]];
    g.members.push_back(i);
    g.positives += labels[i] == 1 ? 1 : 0;
  }
  if (static_cast<std::size_t>(k) > by_id.size()) {
    std::ostringstream os;
    os << "stratified_group_kfold: k = " << k << " exceeds the number of groups (" << by_id.size() << ")";
    throw Error(ErrorCategory::invalid_argument, os.str());
  }

  std::vector<const Group*> ordered;
  ordered.reserve(by_id.size());
  for (const auto& [id, g] : by_id) ordered.push_back(&g);
  std::mt19937_64 rng(seed);
  detail::shuffle(ordered, rng);
  // Majority label per group; positive groups are dealt first, then negative,
  // continuing one round-robin counter so group counts stay within one.
  std::stable_partition(ordered.begin(), ordered.end(), [](const Group* g) {
    return 2 * g->positives >= static_cast<int>(g->members.size());
  });

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < ordered.size(); ++j) {
    auto& fold = folds[j % static_cast<std::size_t>(k)];
    fold.insert(fold.end(), ordered[j]->members.begin(), ordered[j]->members.end());
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

namespace {

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

template <class T>
std::vector<T> gather(const std::vector<T>& values, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& taken) {
  std::vector<bool> mask(n, false);
  for (std::size_t i : taken) mask[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) out.push_back(i);
  }
  return out;
}

bool both_classes(const std::vector<int>& labels) {
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  return pos > 0 && pos < static_cast<long>(labels.size());
}

std::size_t distinct(const std::vector<std::string>& ids) {
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

// Inner CV over the grid on raw training features; first best setting wins.
Hyperparams tune(const Matrix& x, const std::vector<int>& y, const std::vector<std::string>& groups,
                 const PipelineConfig& config, std::uint64_t seed) {
  const auto grid = hyperparam_grid(config.model);
  if (distinct(groups) < static_cast<std::size_t>(config.cv.inner_folds)) return grid.front();

  const auto folds = stratified_group_kfold(y, groups, config.cv.inner_folds, seed);
  struct Split {
    Matrix train_x, test_x;
    std::vector<int> train_y, test_y;
  };
  std::vector<Split> splits;
  for (const auto& test : folds) {
    const auto train = complement(y.size(), test);
    Split s{{}, {}, gather(y, train), gather(y, test)};
    if (!both_classes(s.train_y) || !both_classes(s.test_y)) continue;
    const Standardizer scaler = Standardizer::fit(x, train);
    s.train_x = scaler.apply(gather_rows(x, train));
    s.test_x = scaler.apply(gather_rows(x, test));
    splits.push_back(std::move(s));
  }
  if (splits.empty()) return grid.front();

  Hyperparams best = grid.front();
  double best_auc = -1.0;
  for (const auto& hp : grid) {
    double sum = 0.0;
    bool ok = true;
    for (const auto& s : splits) {
      try {
        const LinearModel model = train_model(config.model, s.train_x, s.train_y, hp, config.train);
        const Vector scores = decision_scores(model, s.test_x);
        sum += roc_auc({scores.data(), static_cast<std::size_t>(scores.size())}, s.test_y);
      } catch (const Error&) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const double mean = sum / static_cast<double>(splits.size());
    if (mean > best_auc) {
      best_auc = mean;
      best = hp;
    }
  }
  return best;
}

}  // namespace

EvalReport run_cv(const LabeledDataset& dataset, const PipelineConfig& config,
                  const FoldObserver& observer) {
  config.cv.validate();
  config.joint.validate();
  config.train.validate();
  dataset.require_binary();

  // Canonical sample order keyed on (subject id, sample id) so results do not
  // depend on the order samples were supplied in.
  const std::size_t n = dataset.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = dataset.subject_ids()[a];
    const auto& sb = dataset.subject_ids()[b];
    if (sa != sb) return sa < sb;
    if (dataset.sample_ids()[a] != dataset.sample_ids()[b]) return dataset.sample_ids()[a] < dataset.sample_ids()[b];
    return a < b;
  });
  const SymmetricMatrixSet matrices = dataset.matrices().subset(perm);
  const std::vector<int> labels = gather(dataset.labels(), perm);
  const std::vector<std::string> groups =
      config.cv.grouped ? gather(dataset.subject_ids(), perm) : gather(dataset.sample_ids(), perm);

  // Per-matrix eigenvalues never mix samples, so one pass serves both modes.
  Matrix precomputed;
  const bool fit_per_fold = config.feature_method == FeatureMethod::joint_diag && !config.cv.transductive;
  if (config.feature_method == FeatureMethod::eigen) {
    precomputed = eigen_features(matrices).values;
  } else if (config.cv.transductive) {
    precomputed = joint_features(matrices, config.joint).features.values;
  }

  EvalReport report;
  report.config = config;
  for (int r = 0; r < config.cv.repeats; ++r) {
    const auto folds = stratified_group_kfold(labels, groups, config.cv.folds,
                                              config.cv.seed + static_cast<std::uint64_t>(r));
    double auc_sum = 0.0;
    int valid_folds = 0;
    for (int f = 0; f < config.cv.folds; ++f) {
      const auto& test = folds[static_cast<std::size_t>(f)];
      const auto train = complement(n, test);
      const auto train_y = gather(labels, train);
      const auto test_y = gather(labels, test);
      if (!both_classes(train_y) || !both_classes(test_y)) {
        std::ostringstream os;
        os << "repeat " << r << " fold " << f << " skipped: "
           << (both_classes(train_y) ? "test" : "training") << " fold has a single class";
        report.warnings.push_back(os.str());
        continue;
      }

      Matrix train_raw, test_raw;
      if (fit_per_fold) {
        const JointFeatures fitted = joint_features(matrices.subset(train), config.joint);
        train_raw = fitted.features.values;
        test_raw.resize(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(matrices.dim()));
        for (std::size_t t = 0; t < test.size(); ++t) {
          test_raw.row(static_cast<Eigen::Index>(t)) =
              project_features(matrices[test[t]], fitted.diagonalization.basis).transpose();
        }
      } else {
        train_raw = gather_rows(precomputed, train);
        test_raw = gather_rows(precomputed, test);
      }

      const std::uint64_t fold_seed =
          detail::derive_seed(config.cv.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f));
      const Hyperparams hp = tune(train_raw, train_y, gather(groups, train), config, fold_seed);

      std::vector<std::size_t> all_train(train.size());
      std::iota(all_train.begin(), all_train.end(), std::size_t{0});
      const Standardizer scaler = Standardizer::fit(train_raw, all_train);
      TrainConfig train_cfg = config.train;
      train_cfg.seed = fold_seed;
      const LinearModel model = train_model(config.model, scaler.apply(train_raw), train_y, hp, train_cfg);
      const Vector scores = decision_scores(model, scaler.apply(test_raw));
      const double auc = roc_auc({scores.data(), static_cast<std::size_t>(scores.size())}, test_y);
      auc_sum += auc;
      ++valid_folds;

      if (observer) {
        std::vector<std::size_t> original(test.size());
        for (std::size_t t = 0; t < test.size(); ++t) original[t] = perm[test[t]];
        observer({r, f, original, model, auc});
      }
    }
    if (valid_folds == 0) {
      report.warnings.push_back("repeat " + std::to_string(r) + " invalid: every fold was skipped");
      continue;
    }
    report.per_repeat.push_back(auc_sum / valid_folds);
  }
  if (report.per_repeat.empty()) {
    throw Error(ErrorCategory::no_valid_repeat, "run_cv: no repeat produced a valid fold");
  }
  const auto count = static_cast<double>(report.per_repeat.size());
  report.mean_auc = std::accumulate(report.per_repeat.begin(), report.per_repeat.end(), 0.0) / count;
  double ss = 0.0;
  for (double v : report.per_repeat) ss += (v - report.mean_auc) * (v - report.mean_auc);
  report.std_auc = std::sqrt(ss / count);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  const PipelineConfig& c = report.config;
  nlohmann::json j;
  j["task"] = c.task;
  j["feature_method"] = feature_method_name(c.feature_method);
  j["model"] = model_kind_name(c.model);
  j["folds"] = c.cv.folds;
  j["repeats"] = c.cv.repeats;
  j["grouped"] = c.cv.grouped;
  j["transductive"] = c.cv.transductive;
  j["mean_auc"] = report.mean_auc;
  j["std_auc"] = report.std_auc;
  j["per_repeat"] = report.per_repeat;
  j["warnings"] = report.warnings;
  j["config"] = {
      {"seed", c.cv.seed},
      {"inner_folds", c.cv.inner_folds},
      {"joint_diag",
       {{"rotation_tol", c.joint.rotation_tol},
        {"off_tol", c.joint.off_tol},
        {"max_sweeps", c.joint.max_sweeps},
        {"normalize_inputs", c.joint.normalize_inputs},
        {"reorthogonalize_every", c.joint.reorthogonalize_every}}},
      {"train",
       {{"max_iterations", c.train.max_iterations},
        {"initial_step", c.train.initial_step},
        {"decay", c.train.decay},
        {"tolerance", c.train.tolerance}}},
  };
  return j.dump(2) + "\n";
}

std::string report_csv_header() {
  return "task,feature_method,model,folds,repeats,grouped,transductive,mean_auc,std_auc,cell\n";
}

std::string report_csv_row(const EvalReport& report) {
  const PipelineConfig& c = report.config;
  char cell[64];
  std::snprintf(cell, sizeof cell, "%.3f \xC2\xB1 %.3f", report.mean_auc, report.std_auc);
  char numbers[96];
  std::snprintf(numbers, sizeof numbers, "%.17g,%.17g", report.mean_auc, report.std_auc);
  std::ostringstream os;
  os << c.task << ',' << feature_method_name(c.feature_method) << ',' << model_kind_name(c.model) << ','
     << c.cv.folds << ',' << c.cv.repeats << ',' << (c.cv.grouped ? "true" : "false") << ','
     << (c.cv.transductive ? "true" : "false") << ',' << numbers << ',' << cell << '\n';
  return os.str();
}

}  // namespace simdiag
