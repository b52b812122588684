#pragma once

// Weighted scatter matrices of unit vectors and a cyclic Jacobi
// eigensolver for the resulting symmetric PSD matrices.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "watsonmle/matrix.hpp"

namespace watsonmle {

/// S = sum_i w_i x_i x_i^T / sum_i w_i for unit rows x_i; trace(S) = 1.
struct ScatterMatrix {
  Matrix values;

  std::size_t dim() const noexcept { return values.rows(); }
};

struct EigDecomposition {
  /// Descending.
  std::vector<double> values;
  /// vectors[i] pairs with values[i]; largest-magnitude entry is positive.
  std::vector<Vector> vectors;
};

/// Tolerance on | ||x_i|| - 1 | accepted for observations.
inline constexpr double kUnitNormTolerance = 1e-8;

/// Indices of rows whose norm differs from 1 by more than kUnitNormTolerance.
std::vector<std::size_t> non_unit_rows(const Matrix& X);

/// Throws DomainError listing the offending rows if any row is not unit-norm.
void require_unit_rows(const Matrix& X);

/// Unweighted when `weights` is empty. Summation runs in row order.
ScatterMatrix scatter(const Matrix& X, std::span<const double> weights = {});

struct JacobiControls {
  double relative_off_tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
EigDecomposition sym_eig(const Matrix& S, const JacobiControls& ctl = {});
inline EigDecomposition sym_eig(const ScatterMatrix& S, const JacobiControls& ctl = {}) {
  return sym_eig(S.values, ctl);
}

}  // namespace watsonmle
