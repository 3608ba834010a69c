#include "simdiag/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "simdiag/error.hpp"
#include "simdiag/rotation.hpp"

namespace simdiag {

std::string_view category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::dimension_mismatch: return "dimension_mismatch";
    case ErrorCategory::non_finite: return "non_finite";
    case ErrorCategory::parse_error: return "parse_error";
    case ErrorCategory::io_error: return "io_error";
    case ErrorCategory::not_converged: return "not_converged";
    case ErrorCategory::single_class: return "single_class";
    case ErrorCategory::diverged: return "diverged";
    case ErrorCategory::no_valid_repeat: return "no_valid_repeat";
  }
  return "unknown";
}

Error with_stage(std::string_view stage, const Error& inner) {
  return Error(inner.category(), std::string(stage) + ": " + inner.what());
}

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCategory::dimension_mismatch, os.str());
  }
}

void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    for (Eigen::Index l = 0; l < m.cols(); ++l) {
      if (!std::isfinite(m(k, l))) {
        std::ostringstream os;
        os << what << ": non-finite entry at (" << k << ", " << l << ")";
        throw Error(ErrorCategory::non_finite, os.str());
      }
    }
  }
}

}  // namespace

SymMatrix::SymMatrix(Matrix values) : values_(std::move(values)) {
  require_square(values_, "SymMatrix");
  require_finite(values_, "SymMatrix");
  for (Eigen::Index k = 0; k < values_.rows(); ++k) {
    for (Eigen::Index l = k + 1; l < values_.cols(); ++l) {
      if (values_(k, l) != values_(l, k)) {
        std::ostringstream os;
        os << "SymMatrix: entries (" << k << ", " << l << ") and (" << l << ", " << k
           << ") differ";
        throw Error(ErrorCategory::invalid_argument, os.str());
      }
    }
  }
}

SymMatrix make_trusted_symmetric(Matrix values) { return SymMatrix(std::move(values), SymMatrix::Trusted{}); }

SymmetricMatrixSet::SymmetricMatrixSet(std::vector<SymMatrix> matrices)
    : matrices_(std::move(matrices)) {
  if (matrices_.empty()) {
    throw Error(ErrorCategory::invalid_argument, "matrix set must contain at least one matrix");
  }
  dim_ = matrices_.front().dim();
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    if (matrices_[i].dim() != dim_) {
      std::ostringstream os;
      os << "matrix " << i << " has dimension " << matrices_[i].dim() << ", expected " << dim_;
      throw Error(ErrorCategory::dimension_mismatch, os.str());
    }
  }
}

SymmetricMatrixSet SymmetricMatrixSet::subset(std::span<const std::size_t> indices) const {
  std::vector<SymMatrix> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(matrices_.at(i));
  return SymmetricMatrixSet(std::move(picked));
}

double SymmetricMatrixSet::total_frobenius_squared() const {
  double total = 0.0;
  for (const auto& m : matrices_) total += m.frobenius_norm_squared();
  return total;
}

double orthogonality_drift(const Matrix& u) {
  const Matrix gram = u.transpose() * u;
  return (gram - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

OrthoBasis::OrthoBasis(Matrix columns) : columns_(std::move(columns)) {
  require_square(columns_, "OrthoBasis");
  require_finite(columns_, "OrthoBasis");
  const double drift = orthogonality_drift(columns_);
  if (!(drift <= kOrthogonalityTolerance)) {
    std::ostringstream os;
    os << "OrthoBasis: orthogonality drift " << drift << " exceeds " << kOrthogonalityTolerance;
    throw Error(ErrorCategory::invalid_argument, os.str());
  }
}

OrthoBasis OrthoBasis::identity(std::size_t dim) {
  return OrthoBasis(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

SymmetrizeResult symmetrize(const Matrix& raw, double asymmetry_tol) {
  require_square(raw, "symmetrize");
  require_finite(raw, "symmetrize");
  const Eigen::Index d = raw.rows();
  Matrix out(d, d);
  double max_asym = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    out(k, k) = raw(k, k);
    for (Eigen::Index l = k + 1; l < d; ++l) {
      const double mean = 0.5 * (raw(k, l) + raw(l, k));
      out(k, l) = mean;
      out(l, k) = mean;
      max_asym = std::max(max_asym, std::abs(raw(k, l) - raw(l, k)));
    }
  }
  return {make_trusted_symmetric(std::move(out)), max_asym, max_asym > asymmetry_tol};
}

double off_value(const Matrix& m) {
  require_square(m, "off_value");
  double total = 0.0;
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    for (Eigen::Index l = 0; l < m.cols(); ++l) {
      if (k != l) total += m(k, l) * m(k, l);
    }
  }
  return total;
}

SymMatrix congruence(const OrthoBasis& u, const SymMatrix& a) {
  if (u.dim() != a.dim()) {
    throw Error(ErrorCategory::dimension_mismatch, "congruence: basis and matrix dimensions differ");
  }
  const Matrix product = u.columns().transpose() * a.values() * u.columns();
  Matrix sym = 0.5 * (product + product.transpose());
  return make_trusted_symmetric(std::move(sym));
}

Vector congruence_diagonal(const Matrix& u, const Matrix& a) {
  if (u.rows() != a.rows() || u.cols() != a.cols() || a.rows() != a.cols()) {
    throw Error(ErrorCategory::dimension_mismatch, "congruence_diagonal: dimensions differ");
  }
  // Column by column through a fresh contiguous copy: the result for a column
  // never depends on its position or on the other columns.
  Vector diag(u.cols());
  Vector col(u.rows());
  Vector image(u.rows());
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    col = u.col(j);
    image.noalias() = a * col;
    diag(j) = col.dot(image);
  }
  return diag;
}

PlaneRotation rotation_from_direction(double x, double y) noexcept {
  const double r = std::hypot(x, y);
  if (r == 0.0 || x + r == 0.0) return {};
  return {std::sqrt((x + r) / (2.0 * r)), y / std::sqrt(2.0 * r * (x + r))};
}

void rotate_symmetric(Matrix& a, std::size_t p, std::size_t q, PlaneRotation rot) noexcept {
  const double c = rot.c;
  const double s = rot.s;
  const auto ip = static_cast<Eigen::Index>(p);
  const auto iq = static_cast<Eigen::Index>(q);
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    if (k == ip || k == iq) continue;
    const double akp = a(k, ip);
    const double akq = a(k, iq);
    const double nkp = c * akp + s * akq;
    const double nkq = -s * akp + c * akq;
    a(k, ip) = nkp;
    a(ip, k) = nkp;
    a(k, iq) = nkq;
    a(iq, k) = nkq;
  }
  const double app = a(ip, ip);
  const double aqq = a(iq, iq);
  const double apq = a(ip, iq);
  const double cs = c * s;
  a(ip, ip) = c * c * app + 2.0 * cs * apq + s * s * aqq;
  a(iq, iq) = s * s * app - 2.0 * cs * apq + c * c * aqq;
  const double npq = (c * c - s * s) * apq + cs * (aqq - app);
  a(ip, iq) = npq;
  a(iq, ip) = npq;
}

void rotate_columns(Matrix& u, std::size_t p, std::size_t q, PlaneRotation rot) noexcept {
  const auto ip = static_cast<Eigen::Index>(p);
  const auto iq = static_cast<Eigen::Index>(q);
  for (Eigen::Index k = 0; k < u.rows(); ++k) {
    const double ukp = u(k, ip);
    const double ukq = u(k, iq);
    u(k, ip) = rot.c * ukp + rot.s * ukq;
    u(k, iq) = -rot.s * ukp + rot.c * ukq;
  }
}

void canonicalize_column_signs(Matrix& u) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < u.rows(); ++k) {
      if (std::abs(u(k, j)) > std::abs(u(best, j))) best = k;
    }
    if (u(best, j) < 0.0) u.col(j) = -u.col(j);
  }
}

EigenDecomposition jacobi_eigen(const SymMatrix& a, double tol, int max_sweeps) {
  if (!(tol > 0.0) || max_sweeps < 1) {
    throw Error(ErrorCategory::invalid_argument, "jacobi_eigen: tol must be > 0 and max_sweeps >= 1");
  }
  const std::size_t d = a.dim();
  Matrix work = a.values();
  Matrix basis = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const double total = work.squaredNorm();
  // Entries this small cannot move any eigenvalue measurably relative to ||A||_F.
  const double negligible = 1e-18 * std::sqrt(total);

  int sweeps = 0;
  double ratio = total > 0.0 ? off_value(work) / total : 0.0;
  while (ratio > 0.0 && sweeps < max_sweeps) {
    ++sweeps;
    int rotations = 0;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = work(p, q);
        if (std::abs(apq) <= negligible) continue;
        double x = work(p, p) - work(q, q);
        double y = 2.0 * apq;
        if (x < 0.0) {
          x = -x;
          y = -y;
        }
        const PlaneRotation rot = rotation_from_direction(x, y);
        if (rot.is_identity()) continue;
        rotate_symmetric(work, p, q, rot);
        work(p, q) = 0.0;
        work(q, p) = 0.0;
        rotate_columns(basis, p, q, rot);
        ++rotations;
      }
    }
    ratio = total > 0.0 ? off_value(work) / total : 0.0;
    if (rotations == 0) break;
  }
  if (ratio > tol) {
    std::ostringstream os;
    os << "jacobi_eigen: off ratio " << ratio << " above " << tol << " after " << sweeps << " sweeps";
    throw NotConverged(os.str(), ratio);
  }

  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return work(i, i) > work(j, j); });
  Vector values(static_cast<Eigen::Index>(d));
  Matrix sorted(basis.rows(), basis.cols());
  for (std::size_t k = 0; k < d; ++k) {
    values(static_cast<Eigen::Index>(k)) = work(order[k], order[k]);
    sorted.col(static_cast<Eigen::Index>(k)) = basis.col(order[k]);
  }
  canonicalize_column_signs(sorted);
  return {std::move(values), OrthoBasis(std::move(sorted)), sweeps, ratio};
}

double commutation_residual(const SymmetricMatrixSet& set) {
  if (set.count() < 2) {
    throw Error(ErrorCategory::invalid_argument, "commutation_residual: need at least two matrices");
  }
  std::vector<double> norms;
  norms.reserve(set.count());
  for (const auto& m : set.matrices()) norms.push_back(m.values().norm());
  double worst = 0.0;
  for (std::size_t i = 0; i < set.count(); ++i) {
    for (std::size_t j = i + 1; j < set.count(); ++j) {
      const Matrix prod = set[i].values() * set[j].values();
      // A_j A_i = (A_i A_j)^T for symmetric inputs.
      const double num = (prod - prod.transpose()).norm();
      const double den = norms[i] * norms[j];
      if (den == 0.0) continue;
      worst = std::max(worst, num / den);
    }
  }
  return worst;
}

}  // namespace simdiag
