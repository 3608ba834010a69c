#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simdiag/matrix_core.hpp"

namespace simdiag {

enum class ModelKind { logreg, sgd };

std::string_view model_kind_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

struct Hyperparams {
  double lambda = 0.0;    // regularization strength, >= 0
  double l1_ratio = 0.0;  // 0 = pure L2
};

struct TrainConfig {
  int max_iterations = 10000;  // Newton iterations (logreg) or epochs (sgd)
  double initial_step = 0.5;   // sgd: fraction of 1/L on the first epoch
  double decay = 0.1;          // sgd: step_e = initial_step / (L (1 + decay e))
  double tolerance = 1e-10;    // stop when |objective change| <= tolerance
  std::uint64_t seed = 0;

  void validate() const;
};

/// Defaults used by the evaluation pipeline for each model kind.
TrainConfig default_train_config(ModelKind kind);

struct LinearModel {
  ModelKind kind = ModelKind::logreg;
  Vector weights;
  double intercept = 0.0;
  Hyperparams hyperparams;
  std::uint64_t seed = 0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.size()); }
};

struct LogisticObjective {
  double loss = 0.0;  // mean logistic loss + (lambda / 2) ||w||^2
  Vector grad_w;
  double grad_b = 0.0;
};

/// Smooth objective and its analytic gradient (intercept unpenalized).
LogisticObjective logistic_objective(const Matrix& x, std::span<const int> y, const Vector& w,
                                     double b, double lambda);

/// mean logistic loss + lambda (l1_ratio ||w||_1 + (1 - l1_ratio) / 2 ||w||^2).
double elastic_net_objective(const Matrix& x, std::span<const int> y, const Vector& w, double b,
                             double lambda, double l1_ratio);

LinearModel train_logreg(const Matrix& x, std::span<const int> y, double lambda,
                         const TrainConfig& cfg = {});

LinearModel train_sgd_elasticnet(const Matrix& x, std::span<const int> y, double lambda,
                                 double l1_ratio, const TrainConfig& cfg);

LinearModel train_model(ModelKind kind, const Matrix& x, std::span<const int> y,
                        const Hyperparams& hp, const TrainConfig& cfg);

Vector decision_scores(const LinearModel& model, const Matrix& x);
Vector predict_proba(const LinearModel& model, const Matrix& x);

std::vector<Hyperparams> hyperparam_grid(ModelKind kind);

/// {kind, weights, intercept, hyperparams, seed}
std::string model_to_json(const LinearModel& model);

}  // namespace simdiag
