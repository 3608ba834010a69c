#include "simdiag/joint_diag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "simdiag/error.hpp"

namespace simdiag {

void JointDiagConfig::validate() const {
  if (!(rotation_tol > 0.0) || !(off_tol > 0.0) || max_sweeps < 1 || reorthogonalize_every < 1) {
    throw Error(ErrorCategory::invalid_argument,
                "joint diagonalization: rotation_tol and off_tol must be > 0, max_sweeps >= 1");
  }
}

std::string_view stop_reason_name(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::off_tolerance: return "off_tolerance";
    case StopReason::no_rotations: return "no_rotations";
    case StopReason::max_sweeps: return "max_sweeps";
  }
  return "unknown";
}

std::string format_sweep_line(const SweepInfo& info) {
  std::ostringstream os;
  os.precision(6);
  os << "sweep=" << info.sweep << " off_ratio=" << std::scientific << info.off_ratio
     << " rotations=" << info.rotations;
  return os.str();
}

double joint_off(std::span<const Matrix> set) {
  double total = 0.0;
  for (const auto& m : set) total += off_value(m);
  return total;
}

PlaneRotation optimal_rotation(std::span<const Matrix> set, std::size_t p, std::size_t q,
                               double rotation_tol) {
  if (set.empty()) {
    throw Error(ErrorCategory::invalid_argument, "optimal_rotation: empty set");
  }
  const auto d = static_cast<std::size_t>(set.front().rows());
  if (p >= q || q >= d) {
    std::ostringstream os;
    os << "optimal_rotation: need 0 <= p < q < " << d << ", got p=" << p << " q=" << q;
    throw Error(ErrorCategory::invalid_argument, os.str());
  }
  const auto ip = static_cast<Eigen::Index>(p);
  const auto iq = static_cast<Eigen::Index>(q);

  // G = sum_i h_i h_i^T with h_i = (a_pp - a_qq, 2 a_pq).
  double g11 = 0.0, g12 = 0.0, g22 = 0.0;
  for (const auto& m : set) {
    const double h1 = m(ip, ip) - m(iq, iq);
    const double h2 = m(ip, iq) + m(iq, ip);
    g11 += h1 * h1;
    g12 += h1 * h2;
    g22 += h2 * h2;
  }
  const double ton = g11 - g22;
  const double toff = 2.0 * g12;
  const double rho = std::hypot(ton, toff);
  if (rho == 0.0) return {};

  // Dominant eigenvector of G, scaled so x >= 0.
  double x = ton + rho;
  double y = toff;
  if (x == 0.0 && y == 0.0) {
    x = 0.0;
    y = 1.0;
  }
  PlaneRotation rot = rotation_from_direction(x, y);
  if (std::abs(rot.s) < rotation_tol) return {};
  return rot;
}

int joint_sweep(std::span<Matrix> set, Matrix& accumulator, const JointDiagConfig& cfg) {
  if (set.empty()) return 0;
  const auto d = static_cast<std::size_t>(set.front().rows());
  int rotations = 0;
  for (std::size_t p = 0; p + 1 < d; ++p) {
    for (std::size_t q = p + 1; q < d; ++q) {
      const PlaneRotation rot = optimal_rotation(set, p, q, cfg.rotation_tol);
      if (rot.is_identity()) continue;
      for (auto& m : set) rotate_symmetric(m, p, q, rot);
      rotate_columns(accumulator, p, q, rot);
      ++rotations;
    }
  }
  return rotations;
}

namespace {

// Modified Gram-Schmidt, applied twice.
void reorthogonalize(Matrix& u) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      for (Eigen::Index k = 0; k < j; ++k) u.col(j) -= u.col(k).dot(u.col(j)) * u.col(k);
      u.col(j) /= u.col(j).norm();
    }
  }
}

void rotate_all(const std::vector<Matrix>& source, const Matrix& u, std::vector<Matrix>& out) {
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Matrix product = u.transpose() * source[i] * u;
    out[i] = 0.5 * (product + product.transpose());
  }
}

}  // namespace

JointDiagResult joint_diagonalize(const SymmetricMatrixSet& set, const JointDiagConfig& cfg,
                                  const SweepObserver& observer) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(set.dim());

  std::vector<Matrix> inputs;
  inputs.reserve(set.count());
  for (const auto& m : set.matrices()) {
    if (cfg.normalize_inputs) {
      const double norm = m.values().norm();
      inputs.push_back(norm > 0.0 ? Matrix(m.values() / norm) : m.values());
    } else {
      inputs.push_back(m.values());
    }
  }
  double total = 0.0;
  for (const auto& m : inputs) total += m.squaredNorm();

  std::vector<Matrix> work = inputs;
  Matrix u = Matrix::Identity(d, d);
  std::vector<double> history{joint_off(work)};
  auto ratio_of = [total](double off) { return total > 0.0 ? off / total : 0.0; };

  StopReason reason = StopReason::max_sweeps;
  int sweeps = 0;
  if (ratio_of(history.back()) <= cfg.off_tol) {
    reason = StopReason::off_tolerance;
  } else {
    while (sweeps < cfg.max_sweeps) {
      ++sweeps;
      const int rotations = joint_sweep(work, u, cfg);
      if (sweeps % cfg.reorthogonalize_every == 0) {
        reorthogonalize(u);
        rotate_all(inputs, u, work);
      }
      history.push_back(joint_off(work));
      if (observer) observer({sweeps, ratio_of(history.back()), rotations});
      if (ratio_of(history.back()) <= cfg.off_tol) {
        reason = StopReason::off_tolerance;
        break;
      }
      if (rotations == 0) {
        reason = StopReason::no_rotations;
        break;
      }
    }
  }
  reorthogonalize(u);

  Matrix diagonals(static_cast<Eigen::Index>(set.count()), d);
  for (std::size_t i = 0; i < set.count(); ++i) {
    diagonals.row(static_cast<Eigen::Index>(i)) = congruence_diagonal(u, set[i].values()).transpose();
  }

  JointDiagResult result{OrthoBasis(std::move(u)), std::move(diagonals), std::move(history), sweeps,
                         reason != StopReason::max_sweeps, reason, total};
  return cfg.canonicalize ? canonicalize(std::move(result)) : result;
}

JointDiagResult canonicalize(JointDiagResult result) {
  const Matrix& diag = result.diagonals;
  const Eigen::Index d = diag.cols();
  const Vector means = diag.colwise().mean().transpose();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (means(a) != means(b)) return means(a) > means(b);
    for (Eigen::Index i = 0; i < diag.rows(); ++i) {
      if (diag(i, a) != diag(i, b)) return diag(i, a) > diag(i, b);
    }
    return a < b;
  });

  Matrix basis(d, d);
  Matrix diagonals(diag.rows(), d);
  for (Eigen::Index k = 0; k < d; ++k) {
    basis.col(k) = result.basis.columns().col(order[static_cast<std::size_t>(k)]);
    diagonals.col(k) = diag.col(order[static_cast<std::size_t>(k)]);
  }
  canonicalize_column_signs(basis);
  result.basis = OrthoBasis(std::move(basis));
  result.diagonals = std::move(diagonals);
  return result;
}

}  // namespace simdiag
