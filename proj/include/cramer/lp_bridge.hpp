#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"
#include "cramer/maxent_core.hpp"
#include "cramer/polytope.hpp"
#include "cramer/problem.hpp"

namespace cramer {

/// Maximizer of the LP log-barrier dual ⟨λ,y⟩ + ε Σ_j ln(c − Aᵀλ)_j and the
/// central-path primal point x_j = ε/(c − Aᵀλ)_j.
struct BarrierSolution {
  Vector lambda;
  double value = 0.0;
  Vector x;
  int iterations = 0;
};

namespace detail {

inline double lp_barrier_value(const LPInstance& inst, double eps, const Vector& lambda) {
  const Vector slack = inst.c - inst.A.transpose() * lambda;
  if (!((slack.array() > 0.0).all())) return -std::numeric_limits<double>::infinity();
  return lambda.dot(inst.y) + eps * slack.array().log().sum();
}

}  // namespace detail

/// Damped Newton from λ = 0 with a fraction-to-boundary rule on the slacks.
inline BarrierSolution barrier_dual_solve(const LPInstance& inst, double eps, const SolverOptions& opts = {}) {
  opts.validate();
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(Errc::invalid_argument, "epsilon must be > 0");
  if (!((inst.c.array() > 0.0).all())) fail(Errc::invalid_argument, "instance must be normalized (c > 0)");
  const Matrix& A = inst.A;
  BarrierSolution out;
  Vector lambda = Vector::Zero(inst.m());
  double f = detail::lp_barrier_value(inst, eps, lambda);
  for (int it = 0; it < opts.max_iters; ++it) {
    const Vector slack = inst.c - A.transpose() * lambda;
    const Vector inv = slack.cwiseInverse();
    const Vector grad = inst.y - eps * (A * inv);
    out.iterations = it;
    // Same tolerance as the perspective solve: grad/ε is the maxent gradient at y/ε, checked against grad_tol/ε.
    if (grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      out.lambda = lambda;
      out.value = f;
      out.x = eps * inv;
      return out;
    }
    const Matrix H = eps * A * inv.cwiseAbs2().asDiagonal() * A.transpose();
    const Vector dir = H.ldlt().solve(grad);
    const Vector dslack = A.transpose() * dir;  // slack decreases by t·dslack
    double t = 1.0;
    for (Index j = 0; j < dslack.size(); ++j)
      if (dslack(j) > 0.0) t = std::min(t, opts.fraction_to_boundary * slack(j) / dslack(j));
    const double slope = grad.dot(dir);
    double f_new = detail::lp_barrier_value(inst, eps, lambda + t * dir);
    while (f_new < f + opts.armijo_c * t * slope - 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(f) + 1.0) &&
           t > 1e-20) {
      t *= 0.5;
      f_new = detail::lp_barrier_value(inst, eps, lambda + t * dir);
    }
    lambda += t * dir;
    f = f_new;
    if (lambda.norm() > opts.divergence_norm_bound) fail(Errc::unbounded, "barrier dual is unbounded: y outside the cone interior");
  }
  fail(Errc::not_converged, "barrier Newton exceeded the iteration budget");
}

/// The maxent problem with reference density s·e^{−⟨c,x⟩} on the orthant and h(x) = A x.
inline MaxentProblem lp_maxent_problem(const LPInstance& inst) { return make_lp_problem(inst.A, inst.c, inst.y); }

inline constexpr double kNearPoleTol = 1e-9;

/// v(y) = s Σ_σ e^{−⟨π_σ,y⟩} / (|det A_σ| Π_{j∉σ} (c_j − π_σ A_j)) for a simple fiber polytope.
inline double brion_vergne_density(const BasisCatalog& catalog, const LPInstance& inst) {
  if (catalog.degenerate) fail(Errc::degenerate_vertex, "fiber polytope is not simple at this y");
  double total = 0.0;
  for (const auto& b : catalog.bases) {
    double denom = b.det_abs;
    for (const auto& [j, rc] : b.reduced_costs) {
      if (std::abs(rc) <= kNearPoleTol) fail(Errc::near_pole, "reduced cost within 1e-9 of zero");
      denom *= rc;
    }
    total += std::exp(-b.pi_sigma.dot(inst.y)) / denom;
  }
  return inst.s * total;
}

/// Z(λ) = s Σ_σ 1/(det A_σ Π rc · (π_σ − λ)) for m = 1, with A of one sign so
/// that the catalog at y covers the whole chamber. The signed determinant makes
/// one formula serve both the positive and the negative half-line.
inline double partial_fraction_Z(const BasisCatalog& catalog, const LPInstance& inst, const Vector& lambda) {
  if (inst.m() != 1) fail(Errc::unsupported_dimension, "partial-fraction form is implemented for m = 1");
  if (lambda.size() != 1) fail(Errc::invalid_argument, "lambda has wrong dimension");
  if ((inst.A.array() > 0.0).any() && (inst.A.array() < 0.0).any())
    fail(Errc::mixed_chamber, "A has entries of both signs: v is piecewise on two half-lines");
  double total = 0.0;
  for (const auto& b : catalog.bases) {
    const double pole = b.pi_sigma(0) - lambda(0);
    if (!(b.det * pole > 0.0)) fail(Errc::pole_violation, "lambda is on the wrong side of a pole pi_sigma");
    if (std::abs(pole) <= kNearPoleTol) fail(Errc::near_pole, "lambda within 1e-9 of a pole");
    double denom = b.det * pole;
    for (const auto& [j, rc] : b.reduced_costs) {
      if (std::abs(rc) <= kNearPoleTol) fail(Errc::near_pole, "reduced cost within 1e-9 of zero");
      denom *= rc;
    }
    total += 1.0 / denom;
  }
  return inst.s * total;
}

inline constexpr double kDegeneracyPerturbation = 1e-7;

struct PerturbedInstance {
  LPInstance instance;
  BasisCatalog catalog;
  bool perturbed = false;
};

/// Moves y to y + 1e-7·A·1 when the fiber polytope is not simple; the caller reports the move.
inline PerturbedInstance perturb_if_degenerate(const LPInstance& inst) {
  PerturbedInstance out{inst, enumerate_feasible_bases(inst), false};
  if (!out.catalog.degenerate) return out;
  out.instance.y = inst.y + kDegeneracyPerturbation * (inst.A * Vector::Ones(inst.d()));
  out.catalog = enumerate_feasible_bases(out.instance);
  out.perturbed = true;
  if (out.catalog.degenerate) fail(Errc::degenerate_vertex, "fiber polytope still degenerate after perturbation");
  return out;
}

/// One row of an identity report. For ε > 0, tau_eps is the barrier value and
/// eps_theta is ε·Θ(y/ε). The ε = 0 row holds τ(y) and the dual bound ⟨λ_ε,y⟩
/// at the smallest ε, with the residual measured beyond the gap ε·d.
struct IdentityRow {
  double epsilon = 0.0;
  double tau_eps = 0.0;
  double eps_theta = 0.0;
  double residual = 0.0;
};

inline std::vector<IdentityRow> theorem_lp_identity_report(const LPInstance& inst, const std::vector<double>& eps_list,
                                                           const SolverOptions& opts = {}) {
  const MaxentProblem problem = lp_maxent_problem(inst);
  const double log_s = inst.log_s();
  std::vector<IdentityRow> rows;
  double eps_min = std::numeric_limits<double>::infinity();
  Vector lambda_min;
  for (double eps : eps_list) {
    const BarrierSolution barrier = barrier_dual_solve(inst, eps, opts);
    IdentityRow row;
    row.epsilon = eps;
    row.tau_eps = barrier.value;
    row.eps_theta = theta_and_perspective(problem, inst.y, eps, opts);
    row.residual = std::abs(row.eps_theta + eps * log_s - row.tau_eps);
    rows.push_back(row);
    if (eps < eps_min) {
      eps_min = eps;
      lambda_min = barrier.lambda;
    }
  }
  if (!rows.empty()) {
    IdentityRow limit;
    limit.epsilon = 0.0;
    limit.tau_eps = lp_vertex_oracle(inst).tau;
    limit.eps_theta = lambda_min.dot(inst.y);
    limit.residual = std::max(0.0, std::abs(limit.tau_eps - limit.eps_theta) - eps_min * static_cast<double>(inst.d()));
    rows.push_back(limit);
  }
  return rows;
}

}  // namespace cramer
