// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [path-to-cli]; the CLI determinism check is skipped without it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "simdiag/classify.hpp"
#include "simdiag/data_io.hpp"
#include "simdiag/eval.hpp"
#include "simdiag/experiment.hpp"
#include "simdiag/features.hpp"
#include "simdiag/joint_diag.hpp"
#include "simdiag/synth.hpp"
#include "test_support.hpp"

using namespace simdiag;
using namespace simdiag::testing;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr int kExactEnsembles = 20;
constexpr double kExactOffRatio = 1e-12;
constexpr double kExactRecovery = 1e-8;
constexpr double kExactSeconds = 5.0;
// Criterion 2
constexpr int kDescentEnsembles = 50;
constexpr double kDescentSlack = 1e-12;
constexpr double kDriftLimit = 1e-10;
constexpr double kDescentSeconds = 30.0;
// Criterion 3
constexpr int kOracleMatrices = 100;
constexpr double kOracleAgreement = 1e-8;
constexpr double kEigenResidual = 1e-7;
// Criterion 4
constexpr double kNoiseLevels[] = {1e-4, 1e-3, 1e-2};
constexpr int kNoiseEnsembles = 20;
constexpr double kLinearityFactor = 4.0;
// Criterion 5
constexpr int kAucInstances = 1000;
// Criterion 6
constexpr int kGradientDraws = 100;
constexpr double kGradientRelError = 1e-5;
constexpr double kSgdLossGap = 1e-3;
// Criterion 7
constexpr double kSignalAuc = 0.9;
constexpr double kNullLow = 0.45;
constexpr double kNullHigh = 0.55;
constexpr double kPipelineSeconds = 120.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome exact_joint_diagonalization() {
  Clock clock;
  double worst_ratio = 0.0, worst_recovery = 0.0;
  int converged = 0;
  for (int e = 0; e < kExactEnsembles; ++e) {
    const auto c = commuting_set(10, 16, 1000 + static_cast<std::uint64_t>(e));
    const auto r = joint_diagonalize(c.set);
    converged += r.converged;
    worst_ratio = std::max(worst_ratio, r.off_ratio());
    worst_recovery = std::max(worst_recovery, diagonal_recovery_error(r.diagonals, c.diagonals));
  }
  const double t = clock.seconds();
  return {converged == kExactEnsembles && worst_ratio <= kExactOffRatio && worst_recovery <= kExactRecovery &&
              t <= kExactSeconds,
          fmt("converged %d/%d, max off ratio %.2e (<= %.0e), max recovery error %.2e (<= %.0e), %.2f s (<= %.0f s)",
              converged, kExactEnsembles, worst_ratio, kExactOffRatio, worst_recovery, kExactRecovery, t,
              kExactSeconds)};
}

Outcome monotone_descent() {
  Clock clock;
  std::mt19937_64 rng(2000);
  double worst_rise = 0.0, worst_drift = 0.0;
  int sweeps = 0;
  bool monotone = true;
  for (int e = 0; e < kDescentEnsembles; ++e) {
    const auto set = random_set(20, 32, rng);
    const auto r = joint_diagonalize(set);
    sweeps = std::max(sweeps, r.sweeps_used);
    for (std::size_t t = 1; t < r.off_history.size(); ++t) {
      const double rise = (r.off_history[t] - r.off_history[t - 1]) / r.off_history[0];
      worst_rise = std::max(worst_rise, rise);
      if (r.off_history[t] > r.off_history[t - 1] + kDescentSlack * r.off_history[0]) monotone = false;
    }
    worst_drift = std::max(worst_drift, orthogonality_drift(r.basis.columns()));
  }
  const double t = clock.seconds();
  return {monotone && worst_drift <= kDriftLimit && t <= kDescentSeconds,
          fmt("largest relative rise %.2e (<= %.0e), max drift %.2e (<= %.0e), max sweeps %d, %.2f s (<= %.0f s)",
              worst_rise, kDescentSlack, worst_drift, kDriftLimit, sweeps, t, kDescentSeconds)};
}

Outcome oracle_reduction() {
  std::mt19937_64 rng(3000);
  double worst_gap = 0.0, worst_residual = 0.0;
  for (int m = 0; m < kOracleMatrices; ++m) {
    const SymMatrix a = random_sym_matrix(20, rng);
    const auto eig = jacobi_eigen(a);
    const auto joint = joint_diagonalize(SymmetricMatrixSet({a}));
    worst_gap = std::max(worst_gap, (joint.diagonals.row(0).transpose() - eig.eigenvalues).cwiseAbs().maxCoeff());
    const double norm = a.values().norm();
    const Matrix& v = eig.basis.columns();
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      const double residual = (a.values() * v.col(k) - eig.eigenvalues(k) * v.col(k)).norm() / norm;
      worst_residual = std::max(worst_residual, residual);
    }
  }
  return {worst_gap <= kOracleAgreement && worst_residual <= kEigenResidual,
          fmt("max eigenvalue gap %.2e (<= %.0e), max relative residual %.2e (<= %.0e)", worst_gap, kOracleAgreement,
              worst_residual, kEigenResidual)};
}

Outcome noise_robustness() {
  std::vector<double> medians, per_sigma;
  for (double sigma : kNoiseLevels) {
    std::vector<double> errors;
    for (int e = 0; e < kNoiseEnsembles; ++e) {
      const auto c = commuting_set(10, 16, 4000 + static_cast<std::uint64_t>(e), sigma);
      errors.push_back(diagonal_recovery_error(joint_diagonalize(c.set).diagonals, c.diagonals));
    }
    medians.push_back(median(errors));
    per_sigma.push_back(medians.back() / sigma);
  }
  const double spread = *std::max_element(per_sigma.begin(), per_sigma.end()) /
                        *std::min_element(per_sigma.begin(), per_sigma.end());
  return {std::isfinite(spread) && spread <= kLinearityFactor,
          fmt("median errors %.2e / %.2e / %.2e at sigma 1e-4 / 1e-3 / 1e-2, error/sigma spread x%.2f (<= x%.0f)",
              medians[0], medians[1], medians[2], spread, kLinearityFactor)};
}

Outcome auc_oracle() {
  std::mt19937_64 rng(5000);
  std::uniform_int_distribution<int> size(2, 50);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<int> coarse(0, 9);
  int exact = 0;
  for (int i = 0; i < kAucInstances; ++i) {
    const auto m = static_cast<std::size_t>(size(rng));
    std::vector<double> scores(m);
    std::vector<int> labels(m);
    for (auto& s : scores) s = coarse(rng) / 10.0;
    for (auto& l : labels) l = bit(rng);
    labels[0] = 1;
    labels[1] = 0;
    exact += roc_auc(scores, labels) == brute_force_auc(scores, labels);
  }
  const std::vector<double> scores{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> labels{0, 0, 1, 1};
  const double example = roc_auc(scores, labels);
  return {exact == kAucInstances && example == 0.75,
          fmt("%d/%d instances equal the pairwise count exactly, fixed example %.17g (== 0.75)", exact, kAucInstances,
              example)};
}

Outcome gradient_correctness() {
  std::mt19937_64 rng(6000);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> bit(0, 1);
  const double h = 1e-6;
  double worst = 0.0;
  for (int draw = 0; draw < kGradientDraws; ++draw) {
    const Eigen::Index n = 10 + draw % 15, d = 1 + draw % 8;
    Matrix x(n, d);
    for (auto& v : x.reshaped()) v = normal(rng);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = bit(rng);
    Vector w(d);
    for (auto& v : w) v = normal(rng);
    const double b = normal(rng);
    const double lambda = std::abs(normal(rng));
    const auto obj = logistic_objective(x, y, w, b, lambda);
    Vector analytic(d + 1), numeric(d + 1);
    analytic << obj.grad_w, obj.grad_b;
    for (Eigen::Index k = 0; k <= d; ++k) {
      Vector wp = w, wm = w;
      double bp = b, bm = b;
      if (k < d) {
        wp(k) += h;
        wm(k) -= h;
      } else {
        bp += h;
        bm -= h;
      }
      numeric(k) = (logistic_objective(x, y, wp, bp, lambda).loss - logistic_objective(x, y, wm, bm, lambda).loss) / (2 * h);
    }
    worst = std::max(worst, (analytic - numeric).norm() / std::max(analytic.norm(), 1e-3));
  }

  // Fixed small problem: overlapping classes in four dimensions.
  std::mt19937_64 prng(6001);
  Matrix x(80, 4);
  std::vector<int> y(80);
  for (Eigen::Index i = 0; i < 80; ++i) {
    y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    for (Eigen::Index k = 0; k < 4; ++k) x(i, k) = normal(prng) + (i % 2 && k < 2 ? 0.8 : 0.0);
  }
  const double lambda = 0.1;
  TrainConfig cfg;
  cfg.max_iterations = 2000;
  cfg.initial_step = 0.2;
  cfg.decay = 0.05;
  cfg.tolerance = 0.0;
  cfg.seed = 6002;
  const auto sgd = train_sgd_elasticnet(x, y, lambda, 0.0, cfg);
  const auto lr = train_logreg(x, y, lambda);
  const double gap = elastic_net_objective(x, y, sgd.weights, sgd.intercept, lambda, 0.0) -
                     logistic_objective(x, y, lr.weights, lr.intercept, lambda).loss;
  return {worst <= kGradientRelError && std::abs(gap) <= kSgdLossGap,
          fmt("max relative gradient error %.2e (<= %.0e), SGD minus full-batch loss %.2e (<= %.0e)", worst,
              kGradientRelError, gap, kSgdLossGap)};
}

SynthOutput signal_dataset() {
  // 100 samples, d = 20, class means 6x spread apart in 3 coordinates, sigma 0.05.
  return generate(two_class_spec(20, 50, 3, 6.0, 2.0, 1.0, 0.05, 0.0, 7000));
}

PipelineConfig ten_by_ten(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.task = "class1-vs-class0";
  cfg.cv.folds = 10;
  cfg.cv.repeats = 10;
  cfg.cv.grouped = true;
  cfg.cv.seed = seed;
  return cfg;
}

Outcome pipeline_signal_null() {
  Clock clock;
  const auto data = signal_dataset();
  const auto signal = run_cv(data.dataset, ten_by_ten(7001));

  std::vector<int> labels = data.dataset.labels();
  std::mt19937_64 rng(7002);
  std::shuffle(labels.begin(), labels.end(), rng);
  const LabeledDataset permuted(data.dataset.matrices(), labels, data.dataset.subject_ids(),
                                data.dataset.sample_ids());
  const auto null = run_cv(permuted, ten_by_ten(7001));
  const double t = clock.seconds();
  return {signal.mean_auc >= kSignalAuc && null.mean_auc >= kNullLow && null.mean_auc <= kNullHigh &&
              t <= kPipelineSeconds,
          fmt("signal AUC %.3f +/- %.3f (>= %.2f), permuted-label AUC %.3f +/- %.3f (in [%.2f, %.2f]), %.1f s "
              "(<= %.0f s)",
              signal.mean_auc, signal.std_auc, kSignalAuc, null.mean_auc, null.std_auc, kNullLow, kNullHigh, t,
              kPipelineSeconds)};
}

Outcome joint_beats_eigen() {
  // Both classes share one diagonal profile except that two coordinate pairs
  // trade values; sorted spectra then have the same distribution in both
  // classes, while a shared basis keeps coordinate identity. Every sample's
  // eigenbasis is jittered away from the common one.
  const std::size_t d = 16;
  SynthSpec spec;
  spec.dim = d;
  spec.class_counts = {50, 50};
  Vector base(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < base.size(); ++k) base(k) = 0.5 * static_cast<double>(base.size() - 1 - k);
  Vector swapped = base;
  std::swap(swapped(2), swapped(11));
  std::swap(swapped(5), swapped(8));
  spec.class_means = {base, swapped};
  spec.spread = 1.0;
  spec.sigma = 0.05;
  spec.basis_jitter = 0.05;
  spec.seed = 8000;
  const auto data = generate(spec);

  PipelineConfig cfg = ten_by_ten(8001);
  const auto joint = run_cv(data.dataset, cfg);
  cfg.feature_method = FeatureMethod::eigen;
  const auto eigen = run_cv(data.dataset, cfg);
  return {joint.mean_auc > eigen.mean_auc,
          fmt("joint-diagonal AUC %.3f +/- %.3f vs eigenvalue AUC %.3f +/- %.3f, margin %+.3f", joint.mean_auc,
              joint.std_auc, eigen.mean_auc, eigen.std_auc, joint.mean_auc - eigen.mean_auc)};
}

Outcome no_leakage() {
  const auto data = signal_dataset();
  PipelineConfig cfg = ten_by_ten(9000);
  cfg.cv.repeats = 2;
  std::map<std::pair<int, int>, std::string> baseline;
  std::map<std::pair<int, int>, std::vector<std::size_t>> tests;
  run_cv(data.dataset, cfg, [&](const FoldRecord& rec) {
    baseline[{rec.repeat, rec.fold}] = model_to_json(rec.model);
    tests[{rec.repeat, rec.fold}].assign(rec.test_indices.begin(), rec.test_indices.end());
  });

  std::mt19937_64 rng(9001);
  int identical = 0, checked = 0;
  for (const auto& [key, indices] : tests) {
    std::vector<SymMatrix> mutated = data.dataset.matrices().matrices();
    for (std::size_t i : indices) mutated[i] = SymMatrix(100.0 * random_symmetric(mutated[i].dim(), rng));
    const LabeledDataset changed(SymmetricMatrixSet(std::move(mutated)), data.dataset.labels(),
                                 data.dataset.subject_ids(), data.dataset.sample_ids());
    run_cv(changed, cfg, [&](const FoldRecord& rec) {
      if (std::make_pair(rec.repeat, rec.fold) != key) return;
      ++checked;
      identical += model_to_json(rec.model) == baseline.at(key);
    });
  }
  const int expected = static_cast<int>(baseline.size());
  return {expected == cfg.cv.folds * cfg.cv.repeats && checked == expected && identical == expected,
          fmt("%d/%d fold models byte-identical after mutating that fold's test matrices", identical, expected)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism(const char* cli) {
  const fs::path dir = fs::temp_directory_path() / "simdiag_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto data = generate(two_class_spec(10, 20, 3, 2.0, 1.0, 1.0, 0.1, 0.02, 10000));
  write_dataset(dir / "data", data.dataset, {synth_label_name(0), synth_label_name(1)});

  int configs = 0, identical = 0;
  for (const auto method : {FeatureMethod::joint_diag, FeatureMethod::eigen}) {
    for (const auto model : {ModelKind::logreg, ModelKind::sgd}) {
      for (const bool transductive : {false, true}) {
        ExperimentConfig cfg;
        cfg.manifest = dir / "data" / "manifest.tsv";
        cfg.task = parse_task("class1-vs-class0");
        cfg.pipeline.feature_method = method;
        cfg.pipeline.model = model;
        cfg.pipeline.train = default_train_config(model);
        cfg.pipeline.cv.repeats = 3;
        cfg.pipeline.cv.folds = 5;
        cfg.pipeline.cv.transductive = transductive;
        cfg.pipeline.cv.seed = 10001;
        cfg.report_json = dir / "a.json";
        run_experiment(cfg);
        cfg.report_json = dir / "b.json";
        run_experiment(cfg);
        ++configs;
        identical += slurp(dir / "a.json") == slurp(dir / "b.json");
      }
    }
  }

  std::string cli_note = "CLI check skipped (no binary given)";
  bool cli_ok = true;
  if (cli != nullptr) {
    const std::string base = std::string("\"") + cli + "\" evaluate --manifest \"" +
                             (dir / "data" / "manifest.tsv").string() +
                             "\" --task class1-vs-class0 --folds 5 --repeats 3 --seed 42 --out-json ";
    const int ra = std::system((base + "\"" + (dir / "cli_a.json").string() + "\" > /dev/null 2>&1").c_str());
    const int rb = std::system((base + "\"" + (dir / "cli_b.json").string() + "\" > /dev/null 2>&1").c_str());
    const std::string a = slurp(dir / "cli_a.json");
    cli_ok = ra == 0 && rb == 0 && !a.empty() && a == slurp(dir / "cli_b.json");
    cli_note = cli_ok ? "CLI evaluate reports byte-identical" : "CLI evaluate reports differ or the run failed";
  }
  fs::remove_all(dir);
  return {identical == configs && cli_ok,
          fmt("%d/%d library configurations byte-identical; %s", identical, configs, cli_note.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli = argc > 1 ? argv[1] : nullptr;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact joint diagonalization", exact_joint_diagonalization},
      {"monotone descent", monotone_descent},
      {"oracle reduction", oracle_reduction},
      {"noise robustness", noise_robustness},
      {"ROC AUC oracle", auc_oracle},
      {"gradient correctness", gradient_correctness},
      {"pipeline signal/null", pipeline_signal_null},
      {"joint features beat eigenvalues", joint_beats_eigen},
      {"no-leakage audit", no_leakage},
      {"determinism", [cli] { return determinism(cli); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("%s [%zu] %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
