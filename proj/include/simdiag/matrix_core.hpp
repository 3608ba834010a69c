#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace simdiag {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Real symmetric d x d matrix. Entries are exactly symmetric and finite.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Takes ownership of an already symmetric matrix; throws if it is not
  /// square, not exactly symmetric, or holds a non-finite entry.
  explicit SymMatrix(Matrix values);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  const Matrix& values() const noexcept { return values_; }
  double operator()(std::size_t k, std::size_t l) const { return values_(k, l); }

  double frobenius_norm_squared() const { return values_.squaredNorm(); }

 private:
  struct Trusted {};
  SymMatrix(Matrix values, Trusted) : values_(std::move(values)) {}
  friend SymMatrix make_trusted_symmetric(Matrix values);

  Matrix values_;
};

/// Builds a SymMatrix without re-validating; callers guarantee the invariants.
SymMatrix make_trusted_symmetric(Matrix values);

/// Ordered set of symmetric matrices sharing one dimension (count >= 1).
class SymmetricMatrixSet {
 public:
  explicit SymmetricMatrixSet(std::vector<SymMatrix> matrices);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return matrices_.size(); }
  const SymMatrix& operator[](std::size_t i) const { return matrices_[i]; }
  const std::vector<SymMatrix>& matrices() const noexcept { return matrices_; }

  /// Subset in the order given by `indices`.
  SymmetricMatrixSet subset(std::span<const std::size_t> indices) const;

  double total_frobenius_squared() const;

 private:
  std::size_t dim_ = 0;
  std::vector<SymMatrix> matrices_;
};

/// Orthogonal d x d basis; columns are basis vectors.
class OrthoBasis {
 public:
  static constexpr double kOrthogonalityTolerance = 1e-10;

  /// Throws unless max|U^T U - I| <= kOrthogonalityTolerance.
  explicit OrthoBasis(Matrix columns);

  static OrthoBasis identity(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(columns_.rows()); }
  const Matrix& columns() const noexcept { return columns_; }

 private:
  Matrix columns_;
};

/// max-norm of U^T U - I.
double orthogonality_drift(const Matrix& u);

/// Flips each column so its largest-magnitude entry is positive (first index
/// wins among equal magnitudes).
void canonicalize_column_signs(Matrix& u);

struct SymmetrizeResult {
  SymMatrix matrix;
  double max_asymmetry = 0.0;
  bool asymmetry_warning = false;
};

/// (raw + raw^T) / 2, flagging asymmetry above `asymmetry_tol`.
SymmetrizeResult symmetrize(const Matrix& raw, double asymmetry_tol);

/// Sum of squares of the strictly off-diagonal entries.
double off_value(const Matrix& m);

/// U^T A U, re-symmetrized.
SymMatrix congruence(const OrthoBasis& u, const SymMatrix& a);

/// diag(U^T A U) without forming the full product. Used for every diagonal
/// feature so that fitted and projected rows agree bit for bit.
Vector congruence_diagonal(const Matrix& u, const Matrix& a);

struct EigenDecomposition {
  Vector eigenvalues;  // descending
  OrthoBasis basis;    // column k pairs with eigenvalues[k]
  int sweeps = 0;
  double off_ratio = 0.0;
};

inline constexpr double kDefaultEigenTolerance = 1e-12;
inline constexpr int kDefaultEigenMaxSweeps = 100;

/// Cyclic Jacobi eigensolver. Throws NotConverged when the relative off ratio
/// is still above `tol` after `max_sweeps`.
EigenDecomposition jacobi_eigen(const SymMatrix& a, double tol = kDefaultEigenTolerance,
                                int max_sweeps = kDefaultEigenMaxSweeps);

/// max over pairs of ||AiAj - AjAi||_F / (||Ai||_F ||Aj||_F), 0/0 taken as 0.
double commutation_residual(const SymmetricMatrixSet& set);

}  // namespace simdiag
