#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"

namespace cramer {

/// C_d = ln Γ_d((d+1)/2), the log multivariate gamma at (d+1)/2.
/// With dX Lebesgue measure on the d(d+1)/2 upper-triangle entries,
/// ∫_{S^d_+} e^{-<Z,X>} dX = e^{C_d} det(Z)^{-(d+1)/2}.
inline double multivariate_gamma_constant(Index d) {
  if (d < 1) fail(Errc::invalid_argument, "dimension must be >= 1");
  const double a = 0.5 * static_cast<double>(d + 1);
  double acc = 0.25 * static_cast<double>(d * (d - 1)) * std::log(std::numbers::pi);
  for (Index j = 1; j <= d; ++j) acc += std::lgamma(a + 0.5 * static_cast<double>(1 - j));
  return acc;
}

/// φ(Z) = C_d − ((d+1)/2) ln det Z on the interior of the PSD cone.
inline double psd_log_barrier(const Matrix& Z) {
  if (Z.rows() != Z.cols() || Z.rows() == 0) fail(Errc::invalid_argument, "barrier argument must be square");
  const auto L = cholesky_lower(Z);
  if (!L) fail(Errc::not_positive_definite, "matrix is not positive definite");
  const double k = 0.5 * static_cast<double>(Z.rows() + 1);
  return multivariate_gamma_constant(Z.rows()) - k * log_det_from_cholesky(*L);
}

/// ∇φ(Z) = −((d+1)/2) Z⁻¹ under the trace inner product.
inline Matrix psd_log_barrier_gradient(const Matrix& Z) {
  const auto L = cholesky_lower(Z);
  if (!L) fail(Errc::not_positive_definite, "matrix is not positive definite");
  return -0.5 * static_cast<double>(Z.rows() + 1) * inverse_from_cholesky(*L);
}

/// Gram matrix G_ik = tr(A_i A_k).
inline Matrix constraint_gram(const std::vector<Matrix>& As) {
  const auto m = static_cast<Index>(As.size());
  Matrix G(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k <= i; ++k) {
      const double g = (As[static_cast<std::size_t>(i)] * As[static_cast<std::size_t>(k)]).trace();
      G(i, k) = g;
      G(k, i) = g;
    }
  return G;
}

/// j_h = sqrt(det G) for the linear map X ↦ (<A_j, X>)_j; constant in X.
inline double gram_j_h(const std::vector<Matrix>& As) {
  if (As.empty()) fail(Errc::invalid_argument, "at least one constraint matrix is required");
  const double det = constraint_gram(As).determinant();
  if (!(det > 1e-12)) fail(Errc::dependent_constraints, "constraint matrices are linearly dependent (det G <= 1e-12)");
  return std::sqrt(det);
}

}  // namespace cramer
