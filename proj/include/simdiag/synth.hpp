#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "simdiag/eval.hpp"
#include "simdiag/matrix_core.hpp"

namespace simdiag {

struct SynthSpec {
  std::size_t dim = 0;
  std::vector<std::size_t> class_counts;  // one entry per class
  std::vector<Vector> class_means;        // diagonal mean vector per class
  double spread = 1.0;                    // diagonal entries ~ mean + U(-spread, spread)
  double sigma = 0.0;                     // relative Frobenius noise level
  double basis_jitter = 0.0;              // per-sample perturbation of the common basis
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two classes, `per_class` samples each. Class-0 means descend in steps of
/// `base_gap`; class 1 adds `separation * spread` to the first `signal_coords`.
SynthSpec two_class_spec(std::size_t dim, std::size_t per_class, std::size_t signal_coords,
                         double separation, double base_gap, double spread, double sigma,
                         double basis_jitter, std::uint64_t seed);

struct SynthTruth {
  OrthoBasis basis;  // generating U0
  Matrix diagonals;  // n x d, row i = D_i
};

struct SynthOutput {
  LabeledDataset dataset;  // labels are class indices
  SynthTruth truth;
};

/// Gaussian matrix orthonormalized by Householder QR, columns signed so R has
/// a positive diagonal.
OrthoBasis random_orthogonal(std::size_t dim, std::uint64_t seed);

/// A_i = V_i D_i V_i^T + sigma ||V_i D_i V_i^T||_F E_i / ||E_i||_F with V_i = U0
/// unless basis_jitter > 0. Exactly symmetric; deterministic per seed.
SynthOutput generate(const SynthSpec& spec);

/// Label text used when a synthetic class is written to disk.
std::string synth_label_name(int class_index);

}  // namespace simdiag
