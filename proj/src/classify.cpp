#include "simdiag/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "simdiag/error.hpp"
#include "random_util.hpp"

namespace simdiag {

std::string_view model_kind_name(ModelKind kind) noexcept {
  return kind == ModelKind::logreg ? "logreg" : "sgd";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "logreg") return ModelKind::logreg;
  if (name == "sgd") return ModelKind::sgd;
  throw Error(ErrorCategory::invalid_argument, "unknown model kind '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (max_iterations < 1 || !(initial_step > 0.0) || decay < 0.0 || tolerance < 0.0) {
    throw Error(ErrorCategory::invalid_argument,
                "train config: max_iterations >= 1, initial_step > 0, decay >= 0 required");
  }
}

TrainConfig default_train_config(ModelKind kind) {
  TrainConfig cfg;
  if (kind == ModelKind::sgd) {
    cfg.max_iterations = 200;
    cfg.tolerance = 1e-7;
  }
  return cfg;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z))
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_training_inputs(const Matrix& x, std::span<const int> y, double lambda) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCategory::dimension_mismatch, "training: feature rows and labels differ in length");
  }
  if (y.size() < 2) {
    throw Error(ErrorCategory::invalid_argument, "training: need at least two samples");
  }
  bool has0 = false, has1 = false;
  for (int label : y) {
    if (label != 0 && label != 1) {
      throw Error(ErrorCategory::invalid_argument, "training: labels must be 0 or 1");
    }
    has0 = has0 || label == 0;
    has1 = has1 || label == 1;
  }
  if (!has0 || !has1) {
    throw Error(ErrorCategory::single_class, "training: both classes must be present");
  }
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "training: lambda must be >= 0");
  }
}

double mean_logistic_loss(const Matrix& x, std::span<const int> y, const Vector& w, double b) {
  const Vector z = (x * w).array() + b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y[static_cast<std::size_t>(i)] * z(i);
  return loss / static_cast<double>(z.size());
}

[[noreturn]] void diverged(const char* who, int iteration) {
  std::ostringstream os;
  os << who << ": objective became non-finite at iteration " << iteration;
  throw Error(ErrorCategory::diverged, os.str());
}

}  // namespace

LogisticObjective logistic_objective(const Matrix& x, std::span<const int> y, const Vector& w,
                                     double b, double lambda) {
  const auto n = static_cast<double>(x.rows());
  const Vector z = (x * w).array() + b;
  Vector residual(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const int label = y[static_cast<std::size_t>(i)];
    loss += softplus(z(i)) - label * z(i);
    residual(i) = sigmoid(z(i)) - label;
  }
  LogisticObjective out;
  out.loss = loss / n + 0.5 * lambda * w.squaredNorm();
  out.grad_w = x.transpose() * residual / n + lambda * w;
  out.grad_b = residual.sum() / n;
  return out;
}

double elastic_net_objective(const Matrix& x, std::span<const int> y, const Vector& w, double b,
                             double lambda, double l1_ratio) {
  return mean_logistic_loss(x, y, w, b) +
         lambda * (l1_ratio * w.lpNorm<1>() + 0.5 * (1.0 - l1_ratio) * w.squaredNorm());
}

// Damped Newton with Armijo backtracking on the smooth L2 objective.
LinearModel train_logreg(const Matrix& x, std::span<const int> y, double lambda,
                         const TrainConfig& cfg) {
  check_training_inputs(x, y, lambda);
  cfg.validate();
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  // Augmented design [X 1]; the last coordinate is the intercept.
  Matrix xa(n, d + 1);
  xa.leftCols(d) = x;
  xa.col(d).setOnes();

  Vector theta = Vector::Zero(d + 1);
  auto objective = [&](const Vector& t) {
    return logistic_objective(x, y, t.head(d), t(d), lambda);
  };
  LogisticObjective current = objective(theta);

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    Vector grad(d + 1);
    grad.head(d) = current.grad_w;
    grad(d) = current.grad_b;

    const Vector z = xa * theta;
    Vector weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(z(i));
      weight(i) = p * (1.0 - p);
    }
    Matrix hessian = xa.transpose() * weight.asDiagonal() * xa / static_cast<double>(n);
    hessian.diagonal().head(d).array() += lambda;
    // Small ridge keeps the system solvable when the data separate and lambda = 0.
    hessian.diagonal().array() += 1e-12 * (1.0 + hessian.diagonal().maxCoeff());
    const Vector step = hessian.ldlt().solve(-grad);
    const double slope = grad.dot(step);
    if (!step.allFinite() || !(slope < 0.0)) break;

    double t = 1.0;
    LogisticObjective trial = objective(theta + step);
    int halvings = 0;
    while (!(trial.loss <= current.loss + 1e-4 * t * slope) && halvings < 60) {
      t *= 0.5;
      ++halvings;
      trial = objective(theta + t * step);
    }
    if (!std::isfinite(trial.loss)) diverged("train_logreg", iter);
    if (!(trial.loss <= current.loss)) break;
    theta += t * step;
    const double change = current.loss - trial.loss;
    current = std::move(trial);
    if (change <= cfg.tolerance) break;
  }

  LinearModel model;
  model.kind = ModelKind::logreg;
  model.weights = theta.head(d);
  model.intercept = theta(d);
  model.hyperparams = {lambda, 0.0};
  model.seed = cfg.seed;
  return model;
}

LinearModel train_sgd_elasticnet(const Matrix& x, std::span<const int> y, double lambda,
                                 double l1_ratio, const TrainConfig& cfg) {
  check_training_inputs(x, y, lambda);
  cfg.validate();
  if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) {
    throw Error(ErrorCategory::invalid_argument, "train_sgd_elasticnet: l1_ratio must lie in [0, 1]");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  // Per-sample Lipschitz bound of the smooth part; sets the step scale.
  double max_row = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_row = std::max(max_row, x.row(i).squaredNorm());
  const double lipschitz = 0.25 * (max_row + 1.0) + lambda * (1.0 - l1_ratio);

  Vector w = Vector::Zero(d);
  double b = 0.0;
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);

  double previous = elastic_net_objective(x, y, w, b, lambda, l1_ratio);
  for (int epoch = 0; epoch < cfg.max_iterations; ++epoch) {
    detail::shuffle(order, rng);
    const double eta = cfg.initial_step / (lipschitz * (1.0 + cfg.decay * epoch));
    const double shrink = eta * lambda * l1_ratio;
    for (std::size_t i : order) {
      const auto row = x.row(static_cast<Eigen::Index>(i));
      const double residual = sigmoid(row.dot(w) + b) - y[i];
      w -= eta * (residual * row.transpose() + lambda * (1.0 - l1_ratio) * w);
      b -= eta * residual;
      if (shrink > 0.0) {
        for (Eigen::Index j = 0; j < d; ++j) {
          const double mag = std::abs(w(j)) - shrink;
          w(j) = mag > 0.0 ? std::copysign(mag, w(j)) : 0.0;
        }
      }
    }
    const double current = elastic_net_objective(x, y, w, b, lambda, l1_ratio);
    if (!std::isfinite(current)) diverged("train_sgd_elasticnet", epoch + 1);
    if (std::abs(previous - current) <= cfg.tolerance) break;
    previous = current;
  }

  LinearModel model;
  model.kind = ModelKind::sgd;
  model.weights = std::move(w);
  model.intercept = b;
  model.hyperparams = {lambda, l1_ratio};
  model.seed = cfg.seed;
  return model;
}

LinearModel train_model(ModelKind kind, const Matrix& x, std::span<const int> y,
                        const Hyperparams& hp, const TrainConfig& cfg) {
  return kind == ModelKind::logreg ? train_logreg(x, y, hp.lambda, cfg)
                                   : train_sgd_elasticnet(x, y, hp.lambda, hp.l1_ratio, cfg);
}

Vector decision_scores(const LinearModel& model, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model.dim()) {
    throw Error(ErrorCategory::dimension_mismatch, "decision_scores: feature count differs from model");
  }
  return (x * model.weights).array() + model.intercept;
}

Vector predict_proba(const LinearModel& model, const Matrix& x) {
  return decision_scores(model, x).unaryExpr([](double z) { return sigmoid(z); });
}

std::vector<Hyperparams> hyperparam_grid(ModelKind kind) {
  static constexpr double kLambdas[] = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  static constexpr double kL1Ratios[] = {0.0, 0.15, 0.5, 0.85, 1.0};
  std::vector<Hyperparams> grid;
  if (kind == ModelKind::logreg) {
    for (double lambda : kLambdas) grid.push_back({lambda, 0.0});
  } else {
    for (double lambda : kLambdas) {
      for (double ratio : kL1Ratios) grid.push_back({lambda, ratio});
    }
  }
  return grid;
}

std::string model_to_json(const LinearModel& model) {
  nlohmann::json j;
  j["kind"] = model_kind_name(model.kind);
  j["weights"] = std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size());
  j["intercept"] = model.intercept;
  j["hyperparams"] = {{"lambda", model.hyperparams.lambda}, {"l1_ratio", model.hyperparams.l1_ratio}};
  j["seed"] = model.seed;
  return j.dump();
}

}  // namespace simdiag
