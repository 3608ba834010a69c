#include "simdiag/features.hpp"

#include <cmath>
#include <string>

#include "simdiag/error.hpp"

namespace simdiag {

std::string_view feature_method_name(FeatureMethod method) noexcept {
  return method == FeatureMethod::joint_diag ? "joint_diag" : "eigen";
}

FeatureMethod parse_feature_method(std::string_view name) {
  if (name == "joint_diag") return FeatureMethod::joint_diag;
  if (name == "eigen") return FeatureMethod::eigen;
  throw Error(ErrorCategory::invalid_argument, "unknown feature method '" + std::string(name) + "'");
}

JointFeatures joint_features(const SymmetricMatrixSet& set, const JointDiagConfig& cfg) {
  JointDiagConfig canonical = cfg;
  canonical.canonicalize = true;
  JointDiagResult result = joint_diagonalize(set, canonical);
  FeatureMatrix features{result.diagonals, FeatureMethod::joint_diag};
  return {std::move(features), std::move(result)};
}

Vector project_features(const SymMatrix& a, const OrthoBasis& basis) {
  if (a.dim() != basis.dim()) {
    throw Error(ErrorCategory::dimension_mismatch, "project_features: basis and matrix dimensions differ");
  }
  return congruence_diagonal(basis.columns(), a.values());
}

FeatureMatrix eigen_features(const SymmetricMatrixSet& set) {
  const auto n = static_cast<Eigen::Index>(set.count());
  const auto d = static_cast<Eigen::Index>(set.dim());
  Matrix values(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      values.row(i) = jacobi_eigen(set[static_cast<std::size_t>(i)]).eigenvalues.transpose();
    } catch (const NotConverged& e) {
      throw NotConverged("matrix " + std::to_string(i) + ": " + e.what(), e.achieved_off_ratio());
    }
  }
  return {std::move(values), FeatureMethod::eigen};
}

Standardizer Standardizer::fit(const Matrix& rows, std::span<const std::size_t> subset) {
  if (subset.empty()) {
    throw Error(ErrorCategory::invalid_argument, "Standardizer::fit: empty row subset");
  }
  const Eigen::Index d = rows.cols();
  Standardizer s;
  s.mean_ = Vector::Zero(d);
  s.scale_ = Vector::Ones(d);
  const auto count = static_cast<double>(subset.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    const double first = rows(static_cast<Eigen::Index>(subset.front()), j);
    bool constant = true;
    double sum = 0.0;
    for (std::size_t i : subset) {
      const double v = rows(static_cast<Eigen::Index>(i), j);
      constant = constant && v == first;
      sum += v;
    }
    if (constant) {
      s.mean_(j) = first;
      continue;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t i : subset) {
      const double dev = rows(static_cast<Eigen::Index>(i), j) - mean;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / count);
    s.mean_(j) = mean;
    s.scale_(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& rows) const {
  if (rows.cols() != mean_.size()) {
    throw Error(ErrorCategory::dimension_mismatch, "Standardizer::apply: column count differs from fit");
  }
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out(i, j) = (rows(i, j) - mean_(j)) / scale_(j);
  }
  return out;
}

}  // namespace simdiag
