#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"

namespace cramer {

/// Canonical LP  τ(y) = min { <c,x> : A x = y, x >= 0 }  after dual-interior
/// normalization (c > 0). s = Π c_j normalizes the reference density.
struct LPInstance {
  Matrix A;
  Vector c;                  // normalized cost, strictly positive
  Vector y;
  double s = 1.0;
  Vector lambda0;            // shift used by normalization (zero if none)
  double objective_shift = 0.0;  // <lambda0, y>: τ_original(y) = τ(y) + objective_shift
  Vector original_c;

  Index m() const { return A.rows(); }
  Index d() const { return A.cols(); }
  double log_s() const { return c.array().log().sum(); }
};

inline constexpr int kDualSearchIterations = 500;
inline constexpr std::uint64_t kBasisBudget = 1'000'000;

namespace detail {

inline double max_violation(const Matrix& A, const Vector& c, const Vector& lambda) {
  return (A.transpose() * lambda - c).maxCoeff();
}

/// Subgradient descent on f(λ) = max_j (Aᵀλ − c)_j with normalized steps 1/k.
/// Returns the best iterate found.
inline Vector search_dual_interior(const Matrix& A, const Vector& c) {
  Vector lambda = Vector::Zero(A.rows());
  Vector best = lambda;
  double best_f = max_violation(A, c, lambda);
  for (int k = 1; k <= kDualSearchIterations; ++k) {
    const Vector slack = A.transpose() * lambda - c;
    Index j = 0;
    slack.maxCoeff(&j);
    const Vector g = A.col(j);
    const double gn = g.norm();
    if (gn == 0.0) break;
    lambda -= (1.0 / k) * g / gn;
    const double f = max_violation(A, c, lambda);
    if (f < best_f) {
      best_f = f;
      best = lambda;
    }
  }
  return best;
}

}  // namespace detail

/// Shifts c to c − Aᵀλ0 > 0 when needed. Uses the supplied λ0 if any,
/// otherwise a fixed-budget subgradient search for a strictly dual-feasible point.
inline LPInstance normalize_instance(const Matrix& A, const Vector& c, const Vector& y,
                                     const std::optional<Vector>& lambda0 = std::nullopt) {
  if (A.cols() != c.size() || A.rows() != y.size()) fail(Errc::invalid_argument, "A, c, y dimensions disagree");
  if (A.rows() < 1 || A.rows() > A.cols()) fail(Errc::invalid_argument, "LP requires 1 <= m <= d");
  if (row_rank(A) < A.rows()) fail(Errc::rank_deficient, "A must have full row rank");

  LPInstance inst;
  inst.A = A;
  inst.y = y;
  inst.original_c = c;
  inst.lambda0 = Vector::Zero(A.rows());
  if ((c.array() > 0.0).all()) {
    inst.c = c;
  } else {
    Vector l0;
    if (lambda0) {
      if (lambda0->size() != A.rows()) fail(Errc::invalid_argument, "lambda0 has wrong dimension");
      l0 = *lambda0;
    } else {
      l0 = detail::search_dual_interior(A, c);
    }
    if (!(detail::max_violation(A, c, l0) < 0.0))
      fail(Errc::no_interior_dual, "no lambda0 with A^T lambda0 < c was found");
    inst.c = c - A.transpose() * l0;
    inst.lambda0 = l0;
    inst.objective_shift = l0.dot(y);
  }
  inst.s = inst.c.prod();
  return inst;
}

/// A feasible basis σ: A_σ x_σ = y with x_σ >= 0, and π_σ A_σ = c_σ.
struct FeasibleBasis {
  std::vector<Index> sigma;
  Matrix A_sigma;
  Vector x_sigma;
  Vector pi_sigma;
  std::map<Index, double> reduced_costs;  // j ∉ σ → c_j − π_σ·A_j
  double det_abs = 0.0;
  double det = 0.0;  // signed determinant of A_σ
};

struct BasisCatalog {
  std::vector<FeasibleBasis> bases;
  bool degenerate = false;
};

inline constexpr double kFeasibilityTol = 1e-12;
inline constexpr double kDegeneracyTol = 1e-9;

namespace detail {

inline Matrix select_columns(const Matrix& A, const std::vector<Index>& sigma) {
  Matrix out(A.rows(), static_cast<Index>(sigma.size()));
  for (std::size_t k = 0; k < sigma.size(); ++k) out.col(static_cast<Index>(k)) = A.col(sigma[k]);
  return out;
}

inline void check_budget(const LPInstance& inst) {
  if (binomial(inst.d(), inst.m()) > kBasisBudget)
    fail(Errc::too_large, "C(d, m) exceeds the basis enumeration budget");
}

/// Visits every invertible basis with x_σ = A_σ⁻¹ y >= −kFeasibilityTol, in lexicographic σ order.
template <class Visit>
void for_each_feasible_basis(const LPInstance& inst, Visit&& visit) {
  check_budget(inst);
  const double scale = std::max(1.0, inst.A.cwiseAbs().maxCoeff());
  for_each_combination(inst.d(), inst.m(), [&](const std::vector<Index>& sigma) {
    const Matrix As = select_columns(inst.A, sigma);
    Eigen::FullPivLU<Matrix> lu(As);
    const double det = lu.determinant();
    if (!(std::abs(det) > 1e-12 * std::pow(scale, static_cast<double>(inst.m())))) return;
    const Vector x = lu.solve(inst.y);
    if ((x.array() < -kFeasibilityTol).any()) return;
    visit(sigma, As, lu, x, det);
  });
}

}  // namespace detail

struct VertexSolution {
  double tau = 0.0;
  Vector x_star;
  std::size_t feasible_vertices = 0;
};

/// Brute-force LP oracle: minimum of <c,x> over all basic feasible solutions.
inline VertexSolution lp_vertex_oracle(const LPInstance& inst) {
  VertexSolution best;
  best.tau = std::numeric_limits<double>::infinity();
  detail::for_each_feasible_basis(inst, [&](const std::vector<Index>& sigma, const Matrix&,
                                            const Eigen::FullPivLU<Matrix>&, const Vector& x, double) {
    ++best.feasible_vertices;
    Vector full = Vector::Zero(inst.d());
    for (std::size_t k = 0; k < sigma.size(); ++k) full(sigma[k]) = std::max(0.0, x(static_cast<Index>(k)));
    const double cost = inst.c.dot(full);
    if (cost < best.tau) {
      best.tau = cost;
      best.x_star = full;
    }
  });
  if (best.feasible_vertices == 0) fail(Errc::infeasible, "no feasible basis: y is outside A R^d_+");
  return best;
}

/// All feasible bases with dual vectors, reduced costs and |det A_σ|.
inline BasisCatalog enumerate_feasible_bases(const LPInstance& inst) {
  BasisCatalog catalog;
  detail::for_each_feasible_basis(inst, [&](const std::vector<Index>& sigma, const Matrix& As,
                                            const Eigen::FullPivLU<Matrix>&, const Vector& x, double det) {
    FeasibleBasis b;
    b.sigma = sigma;
    b.A_sigma = As;
    b.x_sigma = x;
    Vector c_sigma(inst.m());
    for (std::size_t k = 0; k < sigma.size(); ++k) c_sigma(static_cast<Index>(k)) = inst.c(sigma[k]);
    b.pi_sigma = As.transpose().fullPivLu().solve(c_sigma);
    std::vector<bool> basic(static_cast<std::size_t>(inst.d()), false);
    for (Index j : sigma) basic[static_cast<std::size_t>(j)] = true;
    for (Index j = 0; j < inst.d(); ++j)
      if (!basic[static_cast<std::size_t>(j)]) b.reduced_costs[j] = inst.c(j) - b.pi_sigma.dot(inst.A.col(j));
    b.det = det;
    b.det_abs = std::abs(det);
    if ((x.array() <= kDegeneracyTol).any()) catalog.degenerate = true;
    catalog.bases.push_back(std::move(b));
  });
  return catalog;
}

}  // namespace cramer
