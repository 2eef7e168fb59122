#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <variant>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"
#include "cramer/polytope.hpp"
#include "cramer/problem.hpp"
#include "cramer/psd_cone.hpp"

namespace cramer {

/// ln Z(λ), its gradient E_{q_λ}[h] and Hessian Cov_{q_λ}[h].
struct PartitionDerivatives {
  double log_z = 0.0;
  Vector gradient;
  Matrix hessian;
};

namespace detail {

inline Vector lp_slack(const LpOrthant& lp, const Vector& lambda) {
  if (lambda.size() != lp.A.rows()) fail(Errc::invalid_argument, "lambda has wrong dimension");
  Vector slack = lp.c - lp.A.transpose() * lambda;
  if (!((slack.array() > 0.0).all())) fail(Errc::domain_violation, "lambda outside {A^T lambda < c}");
  return slack;
}

inline Matrix sdp_slack(const SdpCone& sdp, const Vector& lambda) {
  if (lambda.size() != static_cast<Index>(sdp.As.size())) fail(Errc::invalid_argument, "lambda has wrong dimension");
  Matrix S = sdp.A0;
  for (std::size_t j = 0; j < sdp.As.size(); ++j) S -= lambda(static_cast<Index>(j)) * sdp.As[j];
  return S;
}

inline const BoxGrid& box_grid(const BoxQuadrature& box) {
  if (!box.grid) fail(Errc::quadrature_unsupported, "box quadrature supports d <= 3");
  return *box.grid;
}

/// Per-node log weights ln(w_i p(x_i)) + <λ, h(x_i)> and their log-sum-exp.
inline double box_tilted_log_weights(const BoxQuadrature& box, const Vector& lambda, Vector& out) {
  const BoxGrid& g = box_grid(box);
  if (lambda.size() != g.moments.cols()) fail(Errc::invalid_argument, "lambda has wrong dimension");
  out = g.log_weight_p + g.moments * lambda;
  const double top = out.maxCoeff();
  return top + std::log((out.array() - top).exp().sum());
}

}  // namespace detail

/// ln Z(λ) with Z(λ) = E_P[e^{<λ, h(X)>}].
inline double log_partition(const MaxentProblem& problem, const Vector& lambda) {
  return std::visit(
      [&](const auto& b) -> double {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, LpOrthant>) {
          return b.log_s - detail::lp_slack(b, lambda).array().log().sum();
        } else if constexpr (std::is_same_v<B, SdpCone>) {
          const auto L = cholesky_lower(detail::sdp_slack(b, lambda));
          if (!L) fail(Errc::domain_violation, "A0 - sum lambda_j A_j is not positive definite");
          const double k = 0.5 * static_cast<double>(b.A0.rows() + 1);
          return b.log_s + multivariate_gamma_constant(b.A0.rows()) - k * log_det_from_cholesky(*L);
        } else {
          Vector w;
          return detail::box_tilted_log_weights(b, lambda, w);
        }
      },
      problem.backend);
}

inline PartitionDerivatives log_partition_derivatives(const MaxentProblem& problem, const Vector& lambda) {
  return std::visit(
      [&](const auto& b) -> PartitionDerivatives {
        using B = std::decay_t<decltype(b)>;
        PartitionDerivatives out;
        if constexpr (std::is_same_v<B, LpOrthant>) {
          const Vector slack = detail::lp_slack(b, lambda);
          const Vector inv = slack.cwiseInverse();
          out.log_z = b.log_s - slack.array().log().sum();
          out.gradient = b.A * inv;
          out.hessian = b.A * inv.cwiseAbs2().asDiagonal() * b.A.transpose();
        } else if constexpr (std::is_same_v<B, SdpCone>) {
          const auto L = cholesky_lower(detail::sdp_slack(b, lambda));
          if (!L) fail(Errc::domain_violation, "A0 - sum lambda_j A_j is not positive definite");
          const Index d = b.A0.rows();
          const double k = 0.5 * static_cast<double>(d + 1);
          const Matrix S_inv = inverse_from_cholesky(*L);
          const auto m = static_cast<Index>(b.As.size());
          std::vector<Matrix> SA(static_cast<std::size_t>(m));
          for (Index i = 0; i < m; ++i) SA[static_cast<std::size_t>(i)] = S_inv * b.As[static_cast<std::size_t>(i)];
          out.log_z = b.log_s + multivariate_gamma_constant(d) - k * log_det_from_cholesky(*L);
          out.gradient.resize(m);
          out.hessian.resize(m, m);
          for (Index i = 0; i < m; ++i) {
            out.gradient(i) = k * SA[static_cast<std::size_t>(i)].trace();
            for (Index l = 0; l <= i; ++l) {
              const double h = k * trace_inner(SA[static_cast<std::size_t>(i)], SA[static_cast<std::size_t>(l)].transpose());
              out.hessian(i, l) = h;
              out.hessian(l, i) = h;
            }
          }
        } else {
          Vector w;
          out.log_z = detail::box_tilted_log_weights(b, lambda, w);
          const Vector prob = (w.array() - out.log_z).exp();
          const Matrix& H = b.grid->moments;
          out.gradient = H.transpose() * prob;
          const Matrix centered = H.rowwise() - out.gradient.transpose();
          out.hessian = centered.transpose() * prob.asDiagonal() * centered;
        }
        return out;
      },
      problem.backend);
}

namespace detail {

/// Largest t with λ + tΔ still strictly inside the domain of Z (∞ if unbounded).
inline double max_step_to_boundary(const MaxentProblem& problem, const Vector& lambda, const Vector& dir) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& b) -> double {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, LpOrthant>) {
          const Vector slack = lp_slack(b, lambda);
          const Vector rate = b.A.transpose() * dir;
          double t = inf;
          for (Index j = 0; j < rate.size(); ++j)
            if (rate(j) > 0.0) t = std::min(t, slack(j) / rate(j));
          return t;
        } else if constexpr (std::is_same_v<B, SdpCone>) {
          const auto L = cholesky_lower(sdp_slack(b, lambda));
          if (!L) fail(Errc::domain_violation, "iterate left the PD cone");
          Matrix D = Matrix::Zero(b.A0.rows(), b.A0.cols());
          for (std::size_t j = 0; j < b.As.size(); ++j) D += dir(static_cast<Index>(j)) * b.As[j];
          const auto Ltri = L->template triangularView<Eigen::Lower>();
          const Matrix M = Ltri.solve(Ltri.solve(D).transpose());
          Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
          const double top = eig.eigenvalues().maxCoeff();
          return top > 0.0 ? 1.0 / top : inf;
        } else {
          return inf;
        }
      },
      problem.backend);
}

inline double dual_objective(const MaxentProblem& problem, const Vector& lambda) {
  return lambda.dot(problem.y) - log_partition(problem, lambda);
}

}  // namespace detail

/// Maximizes the concave dual g(λ) = <λ, y> − ln Z(λ) by damped Newton from
/// λ = 0 with fraction-to-boundary clipping and Armijo backtracking.
/// Non-attainment (y outside the interior of the moment cone) shows up as
/// ‖λ‖ exceeding divergence_norm_bound and is reported through status.
inline DualResult solve_dual(const MaxentProblem& problem, const SolverOptions& opts = {}) {
  opts.validate();
  const Index m = problem.moment_dim();
  if (problem.y.size() != m || !problem.y.allFinite()) fail(Errc::invalid_argument, "target y must be finite with dimension m");

  DualResult result;
  Vector lambda = Vector::Zero(m);
  for (int it = 0;; ++it) {
    const PartitionDerivatives der = log_partition_derivatives(problem, lambda);
    const Vector residual = problem.y - der.gradient;
    result.lambda_star = lambda;
    result.log_Z_at_star = der.log_z;
    result.theta = lambda.dot(problem.y) - der.log_z;
    result.grad_residual = residual.cwiseAbs().maxCoeff();
    result.iterations = it;
    if (result.grad_residual <= opts.grad_tol) {
      result.status = DualStatus::converged;
      return result;
    }
    if (it >= opts.max_iters) {
      result.status = DualStatus::max_iter;
      return result;
    }

    Vector dir = der.hessian.ldlt().solve(residual);
    if (!dir.allFinite() || !(residual.dot(dir) > 0.0)) dir = residual;

    double t = 1.0;
    const double t_max = detail::max_step_to_boundary(problem, lambda, dir);
    if (std::isfinite(t_max)) t = std::min(1.0, opts.fraction_to_boundary * t_max);

    const double slope = residual.dot(dir);
    const double f0 = result.theta;
    const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(f0) + 1.0);
    Vector next = lambda + t * dir;
    for (int bt = 0; bt < 60; ++bt) {
      next = lambda + t * dir;
      double f1 = -std::numeric_limits<double>::infinity();
      try {
        f1 = detail::dual_objective(problem, next);
      } catch (const Error& e) {
        if (e.code() != Errc::domain_violation) throw;
      }
      if (f1 >= f0 + opts.armijo_c * t * slope - roundoff) break;
      t *= 0.5;
    }
    lambda = next;
    if (lambda.norm() > opts.divergence_norm_bound) {
      result.lambda_star = lambda;
      result.iterations = it + 1;
      result.status = DualStatus::diverging_unbounded;
      try {
        result.log_Z_at_star = log_partition(problem, lambda);
        result.theta = lambda.dot(problem.y) - result.log_Z_at_star;
      } catch (const Error&) {
      }
      return result;
    }
  }
}

/// Gap tolerance for the ε → 0 limit of the SDP perspective.
inline constexpr double kSdpLimitGapTol = 1e-9;
/// Relative gradient tolerance for the limit solve: near the boundary the slack
/// A0 − Σλ_j A_j carries only about ten significant digits.
inline constexpr double kSdpLimitRelGrad = 1e-4;

/// ε Θ(y/ε) for ε > 0; for ε = 0 the exact limit: the LP value τ(y) by vertex
/// enumeration, or the SDP dual value bracketed by the central-path gap.
/// The solve at y/ε uses a tolerance of grad_tol/ε so that the residual is
/// measured in units of y.
inline double theta_and_perspective(const MaxentProblem& problem, const Vector& y, double epsilon,
                                    const SolverOptions& opts = {}) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail(Errc::invalid_argument, "epsilon must be >= 0");
  if (epsilon > 0.0) {
    SolverOptions scaled = opts;
    scaled.grad_tol = opts.grad_tol / epsilon;
    const DualResult r = solve_dual(problem.with_target(y / epsilon), scaled);
    if (r.status != DualStatus::converged)
      fail(Errc::not_converged, std::string("dual solve ended with status ") + std::string(to_string(r.status)));
    return epsilon * r.theta;
  }
  if (const auto* lp = std::get_if<LpOrthant>(&problem.backend)) {
    LPInstance inst;
    inst.A = lp->A;
    inst.c = lp->c;
    inst.y = y;
    inst.s = lp->c.prod();
    inst.lambda0 = Vector::Zero(lp->A.rows());
    inst.original_c = lp->c;
    return lp_vertex_oracle(inst).tau;
  }
  if (const auto* sdp = std::get_if<SdpCone>(&problem.backend)) {
    const Index d = sdp->A0.rows();
    const double gap_per_eps = 0.5 * static_cast<double>(d * (d + 1));
    double eps = 1.0;
    for (int k = 0; k <= 15; ++k, eps *= 0.1) {
      const double gap = eps * gap_per_eps;
      if (gap > kSdpLimitGapTol) continue;
      SolverOptions scaled = opts;
      scaled.grad_tol = std::max(opts.grad_tol, kSdpLimitRelGrad * y.lpNorm<Eigen::Infinity>()) / eps;
      const DualResult r = solve_dual(problem.with_target(y / eps), scaled);
      if (r.status != DualStatus::converged)
        fail(Errc::not_converged, std::string("dual solve ended with status ") + std::string(to_string(r.status)));
      // τ* lies in [<λ_ε, y>, <λ_ε, y> + gap].
      return r.lambda_star.dot(y) + 0.5 * gap;
    }
    fail(Errc::not_converged, "SDP limit did not reach the gap tolerance");
  }
  fail(Errc::limit_unsupported, "the epsilon = 0 limit needs the LP or SDP backend");
}

/// ln p(x) for the reference density (−∞ outside Ω). SDP points are packed lower triangles.
inline double reference_log_density(const MaxentProblem& problem, const Vector& x) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (x.size() != problem.domain_dim()) fail(Errc::invalid_argument, "point has wrong dimension");
  return std::visit(
      [&](const auto& b) -> double {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, LpOrthant>) {
          if ((x.array() < 0.0).any()) return neg_inf;
          return b.log_s - b.c.dot(x);
        } else if constexpr (std::is_same_v<B, SdpCone>) {
          const Matrix X = unpack_lower(x);
          Eigen::SelfAdjointEigenSolver<Matrix> eig(X, Eigen::EigenvaluesOnly);
          if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff())) return neg_inf;
          return b.log_s - trace_inner(b.A0, X);
        } else {
          for (std::size_t i = 0; i < b.bounds.size(); ++i) {
            const double xi = x(static_cast<Index>(i));
            if (xi < b.bounds[i].lo || xi > b.bounds[i].hi) return neg_inf;
          }
          return box_log_density_unnormalized(b.density, b.bounds, x) - b.log_normalizer;
        }
      },
      problem.backend);
}

/// h(x) for a point of Ω.
inline Vector moment_map(const MaxentProblem& problem, const Vector& x) {
  if (x.size() != problem.domain_dim()) fail(Errc::invalid_argument, "point has wrong dimension");
  return std::visit(
      [&](const auto& b) -> Vector {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, LpOrthant>) {
          return b.A * x;
        } else if constexpr (std::is_same_v<B, SdpCone>) {
          const Matrix X = unpack_lower(x);
          Vector h(static_cast<Index>(b.As.size()));
          for (std::size_t j = 0; j < b.As.size(); ++j) h(static_cast<Index>(j)) = trace_inner(b.As[j], X);
          return h;
        } else {
          return box_map_eval(b.map, x);
        }
      },
      problem.backend);
}

/// q*(x) = p(x) e^{<λ*, h(x)>} / Z(λ*).
inline double optimal_density_at(const MaxentProblem& problem, const DualResult& result, const Vector& x) {
  if (result.status != DualStatus::converged) fail(Errc::not_converged, "dual result has not converged");
  const double log_p = reference_log_density(problem, x);
  if (!std::isfinite(log_p)) return 0.0;
  return std::exp(log_p + result.lambda_star.dot(moment_map(problem, x)) - result.log_Z_at_star);
}

}  // namespace cramer
