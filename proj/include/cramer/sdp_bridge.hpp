#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"
#include "cramer/lp_bridge.hpp"
#include "cramer/maxent_core.hpp"
#include "cramer/oracles.hpp"
#include "cramer/problem.hpp"
#include "cramer/psd_cone.hpp"
#include "cramer/rng.hpp"

namespace cramer {

/// Reference density s·e^{−⟨A0,X⟩} on the PSD cone with h(X) = (⟨A_j,X⟩)_j; log_s = −φ(A0).
struct SDPInstance {
  Matrix A0;
  std::vector<Matrix> As;
  Vector y;
  double log_s = 0.0;
  Vector lambda0;  // shift applied to A0, zero if none

  Index m() const { return static_cast<Index>(As.size()); }
  Index d() const { return A0.rows(); }
};

inline Matrix sdp_slack_matrix(const Matrix& A0, const std::vector<Matrix>& As, const Vector& lambda) {
  Matrix S = A0;
  for (std::size_t j = 0; j < As.size(); ++j) S -= lambda(static_cast<Index>(j)) * As[j];
  return S;
}

/// Validates the data and, given λ0, replaces A0 by A0 − Σλ0_j A_j (which must be PD).
inline SDPInstance make_sdp_instance(const Matrix& A0, const std::vector<Matrix>& As, const Vector& y,
                                     const std::optional<Vector>& lambda0 = std::nullopt) {
  if (static_cast<Index>(As.size()) != y.size()) fail(Errc::invalid_argument, "y must have one entry per constraint matrix");
  SDPInstance inst;
  inst.As = As;
  inst.y = y;
  inst.lambda0 = Vector::Zero(y.size());
  inst.A0 = A0;
  if (lambda0) {
    if (lambda0->size() != y.size()) fail(Errc::invalid_argument, "lambda0 has wrong dimension");
    inst.A0 = sdp_slack_matrix(A0, As, *lambda0);
    inst.lambda0 = *lambda0;
  }
  const MaxentProblem check = make_sdp_problem(inst.A0, inst.As, inst.y);
  inst.log_s = std::get<SdpCone>(check.backend).log_s;
  return inst;
}

inline MaxentProblem sdp_maxent_problem(const SDPInstance& inst) { return make_sdp_problem(inst.A0, inst.As, inst.y); }

/// ln Z(λ) = ln s + φ(A0 − Σλ_j A_j).
inline double sdp_log_Z(const SDPInstance& inst, const Vector& lambda) {
  if (lambda.size() != inst.m()) fail(Errc::invalid_argument, "lambda has wrong dimension");
  const Matrix S = sdp_slack_matrix(inst.A0, inst.As, lambda);
  if (!is_positive_definite(S)) fail(Errc::domain_violation, "A0 - sum lambda_j A_j is not positive definite");
  return inst.log_s + psd_log_barrier(S);
}

namespace detail {

inline double sdp_barrier_value(const SDPInstance& inst, double eps, const Vector& lambda) {
  const auto L = cholesky_lower(sdp_slack_matrix(inst.A0, inst.As, lambda));
  if (!L) return -std::numeric_limits<double>::infinity();
  const double k = 0.5 * static_cast<double>(inst.d() + 1);
  return lambda.dot(inst.y) - eps * (multivariate_gamma_constant(inst.d()) - k * log_det_from_cholesky(*L));
}

}  // namespace detail

/// Maximizer of ⟨λ,y⟩ − ε φ(A0 − Σλ_j A_j): damped Newton from λ = 0 that halves
/// the step until the slack matrix factors, then applies Armijo backtracking.
inline BarrierSolution sdp_barrier_dual_solve(const SDPInstance& inst, double eps, const SolverOptions& opts = {}) {
  opts.validate();
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(Errc::invalid_argument, "epsilon must be > 0");
  const Index m = inst.m();
  const double k = 0.5 * static_cast<double>(inst.d() + 1);
  BarrierSolution out;
  Vector lambda = Vector::Zero(m);
  double f = detail::sdp_barrier_value(inst, eps, lambda);
  if (!std::isfinite(f)) fail(Errc::not_positive_definite, "A0 must be positive definite");
  for (int it = 0; it < opts.max_iters; ++it) {
    const Matrix S = sdp_slack_matrix(inst.A0, inst.As, lambda);
    const Matrix Sinv = inverse_from_cholesky(*cholesky_lower(S));
    std::vector<Matrix> SA(static_cast<std::size_t>(m));
    Vector grad(m);
    for (Index i = 0; i < m; ++i) {
      SA[static_cast<std::size_t>(i)] = Sinv * inst.As[static_cast<std::size_t>(i)];
      grad(i) = inst.y(i) - eps * k * SA[static_cast<std::size_t>(i)].trace();
    }
    out.iterations = it;
    if (grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      out.lambda = lambda;
      out.value = f;
      out.x = Vector();
      return out;
    }
    Matrix H(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index l = i; l < m; ++l)
        H(i, l) = H(l, i) = eps * k * trace_inner(SA[static_cast<std::size_t>(i)], SA[static_cast<std::size_t>(l)].transpose());
    const Vector dir = H.ldlt().solve(grad);
    const double slope = grad.dot(dir);
    double t = 1.0;
    double f_new = detail::sdp_barrier_value(inst, eps, lambda + t * dir);
    while (!std::isfinite(f_new) && t > 1e-20) {
      t *= 0.5;
      f_new = detail::sdp_barrier_value(inst, eps, lambda + t * dir);
    }
    while (f_new < f + opts.armijo_c * t * slope - 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(f) + 1.0) &&
           t > 1e-20) {
      t *= 0.5;
      f_new = detail::sdp_barrier_value(inst, eps, lambda + t * dir);
    }
    lambda += t * dir;
    f = f_new;
    if (lambda.norm() > opts.divergence_norm_bound) fail(Errc::unbounded, "SDP barrier dual is unbounded");
  }
  fail(Errc::not_converged, "SDP barrier Newton exceeded the iteration budget");
}

/// Rows (ε, τ*_ε, ε·Θ(y/ε), |ε·Θ(y/ε) + ε·ln s − τ*_ε|).
inline std::vector<IdentityRow> theorem_sdp_identity_report(const SDPInstance& inst, const std::vector<double>& eps_list,
                                                            const SolverOptions& opts = {}) {
  const MaxentProblem problem = sdp_maxent_problem(inst);
  std::vector<IdentityRow> rows;
  for (double eps : eps_list) {
    IdentityRow row;
    row.epsilon = eps;
    row.tau_eps = sdp_barrier_dual_solve(inst, eps, opts).value;
    row.eps_theta = theta_and_perspective(problem, inst.y, eps, opts);
    row.residual = std::abs(row.eps_theta + eps * inst.log_s - row.tau_eps);
    rows.push_back(row);
  }
  return rows;
}

inline constexpr Index kMaxPsdIntegralDim = 3;

namespace detail {

/// PSD test for d ≤ 3 by principal minors.
inline bool small_psd(const std::array<std::array<double, 3>, 3>& X, Index d) {
  if (d == 1) return X[0][0] >= 0.0;
  const double m2 = X[0][0] * X[1][1] - X[0][1] * X[0][1];
  if (d == 2) return m2 >= 0.0;
  const double m2b = X[0][0] * X[2][2] - X[0][2] * X[0][2];
  const double m2c = X[1][1] * X[2][2] - X[1][2] * X[1][2];
  const double det = X[0][0] * (X[1][1] * X[2][2] - X[1][2] * X[1][2]) -
                     X[0][1] * (X[0][1] * X[2][2] - X[1][2] * X[0][2]) +
                     X[0][2] * (X[0][1] * X[1][2] - X[1][1] * X[0][2]);
  return m2 >= 0.0 && m2b >= 0.0 && m2c >= 0.0 && det >= 0.0;
}

}  // namespace detail

inline constexpr double kOffDiagonalScale = 0.6;
inline constexpr double kDiagonalRateFraction = 0.6;

/// Importance-sampling estimate of ∫_{X ⪰ 0} e^{−⟨Z,X⟩} dX (Lebesgue on the upper
/// triangle). X_ii ~ Exp(r_i) with r_i a fraction of Z_ii·λ_min(corr Z), and
/// X_ij | diagonal ~ N(0, κ² X_ii X_jj); draws outside the cone get weight 0.
/// Sample i reads counters 16i .. 16i + 8 of stream 0.
inline McEstimate mc_psd_integral(const Matrix& Z, std::size_t n_samples, std::uint64_t seed) {
  const Index d = Z.rows();
  if (d < 1 || Z.cols() != d || !is_symmetric(Z)) fail(Errc::invalid_argument, "Z must be symmetric square");
  if (d > kMaxPsdIntegralDim) fail(Errc::dimension_unsupported, "mc_psd_integral supports d <= 3");
  if (!is_positive_definite(Z)) fail(Errc::not_positive_definite, "Z must be positive definite");
  const Vector dsqrt = Z.diagonal().cwiseSqrt();
  const Matrix corr = dsqrt.cwiseInverse().asDiagonal() * Z * dsqrt.cwiseInverse().asDiagonal();
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(corr).eigenvalues()(0);
  std::array<double, 3> rate{};
  double log_rate_sum = 0.0;
  for (Index i = 0; i < d; ++i) {
    rate[static_cast<std::size_t>(i)] = kDiagonalRateFraction * min_eig * Z(i, i);
    log_rate_sum += std::log(rate[static_cast<std::size_t>(i)]);
  }
  const double kappa2 = kOffDiagonalScale * kOffDiagonalScale;
  const double log_norm_const = 0.5 * std::log(2.0 * std::numbers::pi * kappa2);
  const CounterRng rng(seed, 0);
  MeanAccumulator acc;
  std::array<std::array<double, 3>, 3> X{};
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::uint64_t base = 16 * static_cast<std::uint64_t>(s);
    double log_w = -log_rate_sum;
    double quad = 0.0;
    for (Index i = 0; i < d; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      X[ii][ii] = rng.exponential(base + ii, rate[ii]);
      log_w += rate[ii] * X[ii][ii];
      quad += Z(i, i) * X[ii][ii];
    }
    std::uint64_t ctr = base + 3;
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j, ctr += 2) {
        const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
        const double var = kappa2 * X[ii][ii] * X[jj][jj];
        const double v = std::sqrt(var) * rng.normal(ctr);
        X[ii][jj] = X[jj][ii] = v;
        log_w += log_norm_const + 0.5 * std::log(X[ii][ii] * X[jj][jj]) + 0.5 * v * v / var;
        quad += 2.0 * Z(i, j) * v;
      }
    acc.push(detail::small_psd(X, d) ? std::exp(log_w - quad) : 0.0);
  }
  return acc.result();
}

}  // namespace cramer
