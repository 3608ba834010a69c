#pragma once

#include <cstddef>

#include "simdiag/matrix_core.hpp"

namespace simdiag {

/// Plane rotation G = [[c, -s], [s, c]] acting on coordinates (p, q).
struct PlaneRotation {
  double c = 1.0;
  double s = 0.0;

  bool is_identity() const noexcept { return s == 0.0; }
};

/// Half-angle rotation for a direction (x, y) with x >= 0:
/// r = |(x, y)|, c = sqrt((x + r) / 2r), s = y / sqrt(2r (x + r)).
/// Returns the identity when r == 0 or x + r == 0.
PlaneRotation rotation_from_direction(double x, double y) noexcept;

/// a <- G^T a G in plane (p, q). Keeps `a` exactly symmetric.
void rotate_symmetric(Matrix& a, std::size_t p, std::size_t q, PlaneRotation rot) noexcept;

/// u <- u G (columns p and q).
void rotate_columns(Matrix& u, std::size_t p, std::size_t q, PlaneRotation rot) noexcept;

}  // namespace simdiag
