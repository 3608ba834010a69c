#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>

#include "simdiag/joint_diag.hpp"
#include "simdiag/matrix_core.hpp"

namespace simdiag {

enum class FeatureMethod { joint_diag, eigen };

std::string_view feature_method_name(FeatureMethod method) noexcept;
FeatureMethod parse_feature_method(std::string_view name);

/// n x d feature rows. Joint-diagonal columns share one basis; eigen columns
/// are rank positions of the sorted spectrum.
struct FeatureMatrix {
  Matrix values;
  FeatureMethod method = FeatureMethod::joint_diag;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
  bool shared_basis() const noexcept { return method == FeatureMethod::joint_diag; }
};

struct JointFeatures {
  FeatureMatrix features;
  JointDiagResult diagonalization;
};

/// Rows are diag(U^T A_i U) in canonical column order.
JointFeatures joint_features(const SymmetricMatrixSet& set, const JointDiagConfig& cfg = {});

/// Maps an unseen matrix onto a fitted basis.
Vector project_features(const SymMatrix& a, const OrthoBasis& basis);

/// Rows are per-matrix eigenvalues, descending.
FeatureMatrix eigen_features(const SymmetricMatrixSet& set);

/// Per-column z-scoring fitted on a subset of rows.
class Standardizer {
 public:
  static Standardizer fit(const Matrix& rows, std::span<const std::size_t> subset);

  Matrix apply(const Matrix& rows) const;

  const Vector& mean() const noexcept { return mean_; }
  const Vector& scale() const noexcept { return scale_; }

 private:
  Vector mean_;
  Vector scale_;
};

}  // namespace simdiag
