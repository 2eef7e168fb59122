#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cramer/errors.hpp"

namespace cramer {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative pivot tolerance used for every positive-definiteness decision.
inline constexpr double kPivotTolerance = 1e-12;

/// Cholesky factor of a symmetric matrix (lower triangle is read).
/// Returns nullopt when a pivot falls below kPivotTolerance times the
/// largest diagonal magnitude, i.e. the matrix is not numerically PD.
inline std::optional<Matrix> cholesky_lower(const Matrix& S, double rel_tol = kPivotTolerance) {
  const Index n = S.rows();
  if (n == 0 || S.cols() != n) return std::nullopt;
  double scale = 0.0;
  for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(S(i, i)));
  if (!(scale > 0.0) || !std::isfinite(scale)) return std::nullopt;
  Matrix L = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = S(j, j);
    for (Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
    if (!(pivot > rel_tol * scale)) return std::nullopt;
    L(j, j) = std::sqrt(pivot);
    for (Index i = j + 1; i < n; ++i) {
      double v = S(i, j);
      for (Index k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / L(j, j);
    }
  }
  return L;
}

inline bool is_positive_definite(const Matrix& S) { return cholesky_lower(S).has_value(); }

/// ln det of a PD matrix from its Cholesky factor.
inline double log_det_from_cholesky(const Matrix& L) {
  double acc = 0.0;
  for (Index i = 0; i < L.rows(); ++i) acc += std::log(L(i, i));
  return 2.0 * acc;
}

inline Matrix inverse_from_cholesky(const Matrix& L) {
  const Matrix Linv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(L.rows(), L.cols()));
  return Linv.transpose() * Linv;
}

inline bool is_symmetric(const Matrix& S, double tol = 1e-12) {
  if (S.rows() != S.cols()) return false;
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  return (S - S.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Numerical row rank via SVD with a relative singular-value threshold.
inline Index row_rank(const Matrix& A, double rel_tol = 1e-10) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, sv(0));
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

/// Symmetric d×d matrix <-> packed lower triangle, row-major:
/// (0,0), (1,0), (1,1), (2,0), (2,1), (2,2), ...
inline Index packed_size(Index d) { return d * (d + 1) / 2; }

inline Vector pack_lower(const Matrix& S) {
  const Index d = S.rows();
  Vector out(packed_size(d));
  Index k = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j <= i; ++j) out(k++) = S(i, j);
  return out;
}

inline Matrix unpack_lower(const Vector& packed) {
  const double n = static_cast<double>(packed.size());
  const auto d = static_cast<Index>(std::llround((std::sqrt(8.0 * n + 1.0) - 1.0) / 2.0));
  if (packed_size(d) != packed.size())
    fail(Errc::invalid_argument, "packed lower triangle has invalid length");
  Matrix S(d, d);
  Index k = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j <= i; ++j) {
      S(i, j) = packed(k);
      S(j, i) = packed(k);
      ++k;
    }
  return S;
}

/// Frobenius inner product tr(AᵀB).
inline double trace_inner(const Matrix& A, const Matrix& B) { return (A.array() * B.array()).sum(); }

/// Number of m-subsets of {0..d-1}, saturating at UINT64_MAX.
inline std::uint64_t binomial(Index d, Index m) {
  if (m < 0 || m > d) return 0;
  m = std::min(m, d - m);
  unsigned __int128 acc = 1;
  for (Index i = 1; i <= m; ++i) {
    acc = acc * static_cast<unsigned __int128>(d - m + i) / static_cast<unsigned __int128>(i);
    if (acc > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(acc);
}

/// Visits all m-subsets of {0..d-1} in lexicographic order.
inline void for_each_combination(Index d, Index m, const std::function<void(const std::vector<Index>&)>& visit) {
  if (m < 0 || m > d) return;
  std::vector<Index> idx(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    Index i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - m + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace cramer
