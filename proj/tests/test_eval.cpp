#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "simdiag/error.hpp"
#include "simdiag/eval.hpp"
#include "simdiag/synth.hpp"
#include "test_support.hpp"

using namespace simdiag;
using namespace simdiag::testing;

namespace {

double auc(std::vector<double> scores, std::vector<int> labels) { return roc_auc(scores, labels); }

void check_partition(const std::vector<std::vector<std::size_t>>& folds, const std::vector<std::string>& groups) {
  std::vector<int> seen(groups.size(), 0);
  std::map<std::string, std::set<std::size_t>> fold_of_group;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t i : folds[f]) {
      REQUIRE(i < groups.size());
      ++seen[i];
      fold_of_group[groups[i]].insert(f);
    }
  }
  for (int count : seen) CHECK(count == 1);
  for (const auto& [group, where] : fold_of_group) CHECK(where.size() == 1);
}

std::size_t groups_in(const std::vector<std::size_t>& fold, const std::vector<std::string>& groups) {
  std::set<std::string> distinct;
  for (std::size_t i : fold) distinct.insert(groups[i]);
  return distinct.size();
}

SynthOutput small_two_class(std::size_t per_class, double sigma, std::uint64_t seed, double separation = 6.0) {
  return generate(two_class_spec(8, per_class, 3, separation, 2.0, 1.0, sigma, 0.0, seed));
}

PipelineConfig quick_config(int repeats, std::uint64_t seed = 0) {
  PipelineConfig cfg;
  cfg.cv.repeats = repeats;
  cfg.cv.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("roc_auc examples") {
  CHECK(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc({0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0}) == 0.5);
  CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), Error);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 2}), Error);
  CHECK_THROWS_AS(auc({0.1}, {1, 0}), Error);
}

TEST_CASE("roc_auc matches the pairwise count exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 50);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<int> coarse(0, 6);
  for (int instance = 0; instance < 1000; ++instance) {
    const int m = size(rng);
    std::vector<double> scores(static_cast<std::size_t>(m));
    std::vector<int> labels(static_cast<std::size_t>(m));
    for (auto& s : scores) s = coarse(rng) * 0.25;  // heavy ties
    for (auto& l : labels) l = bit(rng);
    labels[0] = 1;
    labels[1] = 0;
    CHECK(roc_auc(scores, labels) == brute_force_auc(scores, labels));
  }
}

TEST_CASE("roc_auc symmetries") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> bit(0, 1);
  for (int instance = 0; instance < 200; ++instance) {
    std::vector<double> scores(30);
    std::vector<int> labels(30), flipped(30);
    for (auto& s : scores) s = std::round(normal(rng) * 4.0) / 4.0;
    for (auto& l : labels) l = bit(rng);
    labels[0] = 1;
    labels[1] = 0;
    for (std::size_t i = 0; i < 30; ++i) flipped[i] = 1 - labels[i];
    CHECK(std::abs(roc_auc(scores, labels) + roc_auc(scores, flipped) - 1.0) <= 1e-12);

    std::vector<double> transformed;
    for (double s : scores) transformed.push_back(std::exp(3.0 * s) - 7.0);
    CHECK(roc_auc(transformed, labels) == roc_auc(scores, labels));
  }
}

TEST_CASE("stratified_group_kfold") {
  SUBCASE("singleton groups with balanced classes split exactly") {
    std::vector<int> labels;
    std::vector<std::string> groups;
    for (int i = 0; i < 40; ++i) {
      labels.push_back(i % 2);
      groups.push_back("g" + std::to_string(i));
    }
    const auto folds = stratified_group_kfold(labels, groups, 4, 9);
    REQUIRE(folds.size() == 4);
    check_partition(folds, groups);
    for (const auto& fold : folds) {
      CHECK(fold.size() == 10);
      int positives = 0;
      for (std::size_t i : fold) positives += labels[i];
      CHECK(positives == 5);
    }
  }
  SUBCASE("228 subjects with 756 scans give 22 or 23 subjects per fold") {
    std::mt19937_64 rng(1);
    std::vector<int> scans(228, 3);
    // 756 = 228 * 3 + 72: spread the extra scans over the first 72 subjects.
    for (std::size_t s = 0; s < 72; ++s) scans[s] += 1;
    std::vector<int> labels;
    std::vector<std::string> groups;
    for (std::size_t s = 0; s < scans.size(); ++s) {
      for (int k = 0; k < scans[s]; ++k) {
        labels.push_back(s % 3 == 0 ? 1 : 0);
        groups.push_back("subject" + std::to_string(s));
      }
    }
    REQUIRE(labels.size() == 756);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto folds = stratified_group_kfold(labels, groups, 10, seed);
      REQUIRE(folds.size() == 10);
      check_partition(folds, groups);
      for (const auto& fold : folds) {
        const std::size_t count = groups_in(fold, groups);
        CHECK((count == 22 || count == 23));
      }
    }
  }
  SUBCASE("random inputs always produce valid partitions") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> group_count(10, 60);
    std::uniform_int_distribution<int> scans(1, 5);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<int> labels;
      std::vector<std::string> groups;
      const int g = group_count(rng);
      for (int s = 0; s < g; ++s) {
        const int label = bit(rng);
        for (int k = scans(rng); k > 0; --k) {
          labels.push_back(label);
          groups.push_back("s" + std::to_string(s));
        }
      }
      const int k = 2 + trial % 9;
      const auto folds = stratified_group_kfold(labels, groups, k, static_cast<std::uint64_t>(trial));
      check_partition(folds, groups);
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& fold : folds) {
        lo = std::min(lo, groups_in(fold, groups));
        hi = std::max(hi, groups_in(fold, groups));
      }
      CHECK(hi - lo <= 1);
      CHECK(folds == stratified_group_kfold(labels, groups, k, static_cast<std::uint64_t>(trial)));
    }
  }
  SUBCASE("depends on group ids, not sample order") {
    std::vector<int> labels;
    std::vector<std::string> groups;
    for (int s = 0; s < 30; ++s) {
      for (int k = 0; k < 1 + s % 3; ++k) {
        labels.push_back(s % 2);
        groups.push_back("id" + std::to_string(s));
      }
    }
    std::vector<std::size_t> perm(labels.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> labels2;
    std::vector<std::string> groups2;
    for (std::size_t i : perm) {
      labels2.push_back(labels[i]);
      groups2.push_back(groups[i]);
    }
    const auto a = stratified_group_kfold(labels, groups, 5, 11);
    const auto b = stratified_group_kfold(labels2, groups2, 5, 11);
    for (std::size_t f = 0; f < 5; ++f) {
      std::set<std::string> ga, gb;
      for (std::size_t i : a[f]) ga.insert(groups[i]);
      for (std::size_t i : b[f]) gb.insert(groups2[i]);
      CHECK(ga == gb);
    }
  }
  SUBCASE("rejects more folds than groups") {
    const std::vector<int> labels{0, 1, 0, 1};
    const std::vector<std::string> groups{"a", "a", "b", "b"};
    CHECK_THROWS_AS(stratified_group_kfold(labels, groups, 3, 0), Error);
  }
}

TEST_CASE("cv config validation") {
  CVConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.folds = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.repeats = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("run_cv separates a noiseless separable set") {
  const auto data = small_two_class(30, 0.0, 4);
  const auto report = run_cv(data.dataset, quick_config(3));
  CHECK(report.mean_auc >= 0.99);
  CHECK(report.per_repeat.size() == 3);
}

TEST_CASE("run_cv stays at chance on random labels") {
  auto data = small_two_class(100, 0.05, 6);
  std::vector<int> labels(data.dataset.size());
  std::mt19937_64 rng(99);
  std::bernoulli_distribution coin(0.5);
  for (auto& l : labels) l = coin(rng) ? 1 : 0;
  const LabeledDataset shuffled(data.dataset.matrices(), labels, data.dataset.subject_ids(), data.dataset.sample_ids());
  PipelineConfig cfg = quick_config(20);
  cfg.feature_method = FeatureMethod::eigen;
  const auto report = run_cv(shuffled, cfg);
  CHECK(std::abs(report.mean_auc - 0.5) <= 0.05);
}

TEST_CASE("report invariants") {
  const auto data = small_two_class(20, 0.05, 8, 1.0);
  for (const auto method : {FeatureMethod::joint_diag, FeatureMethod::eigen}) {
    for (const bool transductive : {false, true}) {
      for (const bool grouped : {true, false}) {
        PipelineConfig cfg = quick_config(3, 5);
        cfg.feature_method = method;
        cfg.cv.transductive = transductive;
        cfg.cv.grouped = grouped;
        cfg.cv.folds = 5;
        const auto report = run_cv(data.dataset, cfg);
        REQUIRE(report.per_repeat.size() == 3);
        double sum = 0.0;
        for (double v : report.per_repeat) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
          sum += v;
        }
        CHECK(std::abs(report.mean_auc - sum / 3.0) <= 1e-12);
        double ss = 0.0;
        for (double v : report.per_repeat) ss += (v - report.mean_auc) * (v - report.mean_auc);
        CHECK(std::abs(report.std_auc - std::sqrt(ss / 3.0)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("run_cv is deterministic and order independent") {
  const auto data = small_two_class(25, 0.05, 10, 1.5);
  PipelineConfig cfg = quick_config(4, 17);
  cfg.model = ModelKind::sgd;
  cfg.train = default_train_config(ModelKind::sgd);
  cfg.train.max_iterations = 40;
  const std::string first = report_to_json(run_cv(data.dataset, cfg));
  CHECK(first == report_to_json(run_cv(data.dataset, cfg)));

  const auto& ds = data.dataset;
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> labels;
  std::vector<std::string> subjects, samples;
  for (std::size_t i : perm) {
    labels.push_back(ds.labels()[i]);
    subjects.push_back(ds.subject_ids()[i]);
    samples.push_back(ds.sample_ids()[i]);
  }
  const LabeledDataset permuted(ds.matrices().subset(perm), labels, subjects, samples);
  CHECK(first == report_to_json(run_cv(permuted, cfg)));

  PipelineConfig other = cfg;
  other.cv.seed = 18;
  CHECK(first != report_to_json(run_cv(data.dataset, other)));
}

TEST_CASE("perturbing test matrices never changes the fold's model") {
  const auto data = small_two_class(15, 0.05, 12, 1.0);
  PipelineConfig cfg = quick_config(2, 3);
  cfg.cv.folds = 5;
  std::map<std::pair<int, int>, std::string> baseline;
  std::map<std::pair<int, int>, std::vector<std::size_t>> tests;
  run_cv(data.dataset, cfg, [&](const FoldRecord& rec) {
    baseline[{rec.repeat, rec.fold}] = model_to_json(rec.model);
    tests[{rec.repeat, rec.fold}].assign(rec.test_indices.begin(), rec.test_indices.end());
  });
  REQUIRE(baseline.size() == 10);

  std::mt19937_64 rng(8);
  for (const auto& [key, indices] : tests) {
    std::vector<SymMatrix> mutated = data.dataset.matrices().matrices();
    for (std::size_t i : indices) mutated[i] = SymMatrix(random_symmetric(mutated[i].dim(), rng) * 50.0);
    const LabeledDataset changed(SymmetricMatrixSet(std::move(mutated)), data.dataset.labels(),
                                 data.dataset.subject_ids(), data.dataset.sample_ids());
    bool seen = false;
    run_cv(changed, cfg, [&](const FoldRecord& rec) {
      if (std::make_pair(rec.repeat, rec.fold) != key) return;
      seen = true;
      CHECK(model_to_json(rec.model) == baseline.at(key));
    });
    CHECK(seen);
  }
}

TEST_CASE("degenerate folds are skipped with a warning") {
  // Two positive subjects, four negatives, three folds: one test fold holds no positive.
  std::vector<SymMatrix> matrices;
  std::vector<int> labels;
  std::vector<std::string> subjects;
  std::mt19937_64 rng(4);
  for (int s = 0; s < 6; ++s) {
    for (int k = 0; k < 3; ++k) {
      matrices.push_back(random_sym_matrix(4, rng));
      labels.push_back(s < 2 ? 1 : 0);
      subjects.push_back("subj" + std::to_string(s));
    }
  }
  const LabeledDataset ds(SymmetricMatrixSet(std::move(matrices)), labels, subjects);
  PipelineConfig cfg = quick_config(2);
  cfg.cv.folds = 3;
  cfg.feature_method = FeatureMethod::eigen;
  const auto report = run_cv(ds, cfg);
  CHECK_FALSE(report.warnings.empty());
  CHECK(report.warnings.front().find("skipped") != std::string::npos);
  CHECK(report.per_repeat.size() == 2);
}

TEST_CASE("run_cv rejects single-class datasets") {
  const auto data = small_two_class(10, 0.0, 1);
  const std::vector<int> zeros(data.dataset.size(), 0);
  const LabeledDataset ds(data.dataset.matrices(), zeros, data.dataset.subject_ids());
  try {
    run_cv(ds, quick_config(1));
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::single_class);
  }
}

TEST_CASE("report serialization") {
  const auto data = small_two_class(12, 0.0, 2);
  PipelineConfig cfg = quick_config(2);
  cfg.task = "class1-vs-class0";
  cfg.cv.folds = 4;
  const auto report = run_cv(data.dataset, cfg);
  const std::string json = report_to_json(report);
  for (const char* key : {"\"task\"", "\"feature_method\"", "\"model\"", "\"folds\"", "\"repeats\"", "\"grouped\"",
                          "\"transductive\"", "\"mean_auc\"", "\"std_auc\"", "\"per_repeat\"", "\"warnings\""}) {
    CHECK(json.find(key) != std::string::npos);
  }
  CHECK(report_csv_header().rfind("task,feature_method,model", 0) == 0);
  const std::string row = report_csv_row(report);
  CHECK(row.rfind("class1-vs-class0,joint_diag,logreg,4,2", 0) == 0);
}
