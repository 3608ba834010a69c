#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "simdiag/matrix_core.hpp"
#include "simdiag/rotation.hpp"

namespace simdiag {

struct JointDiagConfig {
  double rotation_tol = 1e-10;  // skip rotations with |sin| below this
  double off_tol = 1e-12;       // relative off ratio F(U) / sum ||A_i||_F^2
  int max_sweeps = 100;
  bool canonicalize = true;
  bool normalize_inputs = false;  // optimize on A_i / ||A_i||_F
  int reorthogonalize_every = 30;

  void validate() const;
};

enum class StopReason { off_tolerance, no_rotations, max_sweeps };

std::string_view stop_reason_name(StopReason reason) noexcept;

struct JointDiagResult {
  OrthoBasis basis;
  Matrix diagonals;  // n x d, row i = diag(U^T A_i U)
  std::vector<double> off_history;  // F(U) before the first sweep, then after each sweep
  int sweeps_used = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::max_sweeps;
  double total_energy = 0.0;  // denominator of the off ratio

  double final_off() const { return off_history.back(); }
  double off_ratio() const { return total_energy > 0.0 ? final_off() / total_energy : 0.0; }
};

struct SweepInfo {
  int sweep = 0;
  double off_ratio = 0.0;
  int rotations = 0;
};

using SweepObserver = std::function<void(const SweepInfo&)>;

/// `sweep=<t> off_ratio=<value> rotations=<count>`
std::string format_sweep_line(const SweepInfo& info);

/// F(U) for already-rotated matrices: sum of off(M_i).
double joint_off(std::span<const Matrix> set);

/// Closed-form rotation of plane (p, q) minimizing the summed off-diagonal
/// energy of that plane across the set. Returns the identity when |s| falls
/// below `rotation_tol`.
PlaneRotation optimal_rotation(std::span<const Matrix> set, std::size_t p, std::size_t q,
                               double rotation_tol);

/// One cyclic pass over all pairs p < q. Rotates every matrix in `set` and
/// right-multiplies `accumulator`. Returns the number of rotations applied.
int joint_sweep(std::span<Matrix> set, Matrix& accumulator, const JointDiagConfig& cfg);

/// Approximate simultaneous diagonalization by plane rotations. Never throws
/// on non-convergence; see JointDiagResult::converged and stop_reason.
JointDiagResult joint_diagonalize(const SymmetricMatrixSet& set, const JointDiagConfig& cfg = {},
                                  const SweepObserver& observer = {});

/// Orders columns by descending mean diagonal value (ties: first differing
/// per-matrix diagonal, then original index) and fixes column signs.
JointDiagResult canonicalize(JointDiagResult result);

}  // namespace simdiag
