#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"
#include "cramer/psd_cone.hpp"
#include "cramer/quadrature.hpp"

namespace cramer {

struct SolverOptions {
  double grad_tol = 1e-10;
  int max_iters = 100;
  double fraction_to_boundary = 0.95;
  double armijo_c = 1e-4;
  double divergence_norm_bound = 1e8;

  void validate() const {
    if (!(grad_tol > 0.0) || max_iters <= 0 || !(armijo_c > 0.0) || !(divergence_norm_bound > 0.0))
      fail(Errc::invalid_argument, "solver options must be positive");
    if (!(fraction_to_boundary > 0.0 && fraction_to_boundary < 1.0))
      fail(Errc::invalid_argument, "fraction_to_boundary must lie in (0, 1)");
  }
};

enum class DualStatus { converged, max_iter, diverging_unbounded };

inline std::string_view to_string(DualStatus s) {
  switch (s) {
    case DualStatus::converged: return "converged";
    case DualStatus::max_iter: return "max-iter";
    case DualStatus::diverging_unbounded: return "diverging-unbounded";
  }
  return "unknown";
}

/// Output of the dual solve. theta is <lambda_star, y> − log_Z_at_star.
struct DualResult {
  Vector lambda_star;
  double theta = std::numeric_limits<double>::quiet_NaN();
  double log_Z_at_star = std::numeric_limits<double>::quiet_NaN();
  double grad_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  DualStatus status = DualStatus::max_iter;
};

// ---------------------------------------------------------------------------
// Backends

/// Ω = R^d_+, P(dx) = s e^{-<c,x>} dx with s = Π c_j, h(x) = A x.
struct LpOrthant {
  Matrix A;
  Vector c;
  double log_s = 0.0;
};

/// Ω = S^d_+, P(dX) = s e^{-<A0,X>} dX with ln s = −φ(A0), h(X) = (<A_j,X>)_j.
struct SdpCone {
  Matrix A0;
  std::vector<Matrix> As;
  double log_s = 0.0;
};

enum class BoxDensity { uniform, ramp, gaussian };
enum class BoxMap { identity, sum, sum_squares, sum_and_sum_squares };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Tensor Gauss-Legendre grid over the box with ln(weight · p) and h at each node.
struct BoxGrid {
  Matrix nodes;           // n × d
  Vector log_weight_p;    // n
  Matrix moments;         // n × m
};

/// Ω = a box, p a catalogued density normalized to a probability, h a catalogued map.
struct BoxQuadrature {
  std::vector<Interval> bounds;
  BoxDensity density = BoxDensity::uniform;
  BoxMap map = BoxMap::identity;
  double log_normalizer = 0.0;        // ln ∫ p_unnormalized over the box
  std::shared_ptr<const BoxGrid> grid;  // null when d > kMaxBoxQuadratureDim
};

inline constexpr Index kMaxBoxQuadratureDim = 3;
inline constexpr int kBoxNodesPerAxis = 64;

inline std::string_view to_string(BoxDensity d) {
  switch (d) {
    case BoxDensity::uniform: return "uniform";
    case BoxDensity::ramp: return "ramp";
    case BoxDensity::gaussian: return "gaussian";
  }
  return "unknown";
}

inline std::string_view to_string(BoxMap m) {
  switch (m) {
    case BoxMap::identity: return "identity";
    case BoxMap::sum: return "sum";
    case BoxMap::sum_squares: return "sum-squares";
    case BoxMap::sum_and_sum_squares: return "sum-and-sum-squares";
  }
  return "unknown";
}

inline BoxDensity parse_box_density(std::string_view id) {
  for (auto d : {BoxDensity::uniform, BoxDensity::ramp, BoxDensity::gaussian})
    if (to_string(d) == id) return d;
  fail(Errc::invalid_argument, "unknown density id '" + std::string(id) + "'");
}

inline BoxMap parse_box_map(std::string_view id) {
  for (auto m : {BoxMap::identity, BoxMap::sum, BoxMap::sum_squares, BoxMap::sum_and_sum_squares})
    if (to_string(m) == id) return m;
  fail(Errc::invalid_argument, "unknown map id '" + std::string(id) + "'");
}

inline Index box_moment_dim(BoxMap map, Index d) {
  switch (map) {
    case BoxMap::identity: return d;
    case BoxMap::sum:
    case BoxMap::sum_squares: return 1;
    case BoxMap::sum_and_sum_squares: return 2;
  }
  return 0;
}

inline Vector box_map_eval(BoxMap map, const Vector& x) {
  switch (map) {
    case BoxMap::identity: return x;
    case BoxMap::sum: return Vector::Constant(1, x.sum());
    case BoxMap::sum_squares: return Vector::Constant(1, x.squaredNorm());
    case BoxMap::sum_and_sum_squares: {
      Vector h(2);
      h << x.sum(), x.squaredNorm();
      return h;
    }
  }
  return {};
}

/// ln of the unnormalized catalogued density at x (x assumed inside the box).
inline double box_log_density_unnormalized(BoxDensity density, const std::vector<Interval>& bounds, const Vector& x) {
  switch (density) {
    case BoxDensity::uniform: return 0.0;
    case BoxDensity::ramp: {
      double r = 1.0;
      for (std::size_t i = 0; i < bounds.size(); ++i)
        r += (x(static_cast<Index>(i)) - bounds[i].lo) / (bounds[i].hi - bounds[i].lo);
      return std::log(r);
    }
    case BoxDensity::gaussian: return -0.5 * x.squaredNorm();
  }
  return 0.0;
}

/// Upper bound of the unnormalized density on the box (for rejection sampling).
inline double box_density_upper_bound(BoxDensity density, Index d) {
  switch (density) {
    case BoxDensity::uniform: return 1.0;
    case BoxDensity::ramp: return 1.0 + static_cast<double>(d);
    case BoxDensity::gaussian: return 1.0;
  }
  return 1.0;
}

inline double box_log_normalizer(BoxDensity density, const std::vector<Interval>& bounds) {
  double log_vol = 0.0;
  for (const auto& b : bounds) log_vol += std::log(b.hi - b.lo);
  switch (density) {
    case BoxDensity::uniform: return log_vol;
    case BoxDensity::ramp: return log_vol + std::log(1.0 + 0.5 * static_cast<double>(bounds.size()));
    case BoxDensity::gaussian: {
      double acc = 0.0;
      for (const auto& b : bounds)
        acc += std::log(std::sqrt(std::numbers::pi / 2.0) *
                        (std::erf(b.hi / std::numbers::sqrt2) - std::erf(b.lo / std::numbers::sqrt2)));
      return acc;
    }
  }
  return log_vol;
}

// ---------------------------------------------------------------------------

/// KL-maxent problem data: a backend (domain, reference density, moment map)
/// and target moments y.
struct MaxentProblem {
  using Backend = std::variant<LpOrthant, SdpCone, BoxQuadrature>;
  Backend backend;
  Vector y;

  Index moment_dim() const {
    return std::visit(
        [](const auto& b) -> Index {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, LpOrthant>) return b.A.rows();
          else if constexpr (std::is_same_v<B, SdpCone>) return static_cast<Index>(b.As.size());
          else return box_moment_dim(b.map, static_cast<Index>(b.bounds.size()));
        },
        backend);
  }

  /// Dimension of a point of Ω (packed lower triangle for the SDP cone).
  Index domain_dim() const {
    return std::visit(
        [](const auto& b) -> Index {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, LpOrthant>) return b.A.cols();
          else if constexpr (std::is_same_v<B, SdpCone>) return packed_size(b.A0.rows());
          else return static_cast<Index>(b.bounds.size());
        },
        backend);
  }

  MaxentProblem with_target(Vector target) const {
    MaxentProblem p = *this;
    p.y = std::move(target);
    return p;
  }

  bool is_lp() const { return std::holds_alternative<LpOrthant>(backend); }
  bool is_sdp() const { return std::holds_alternative<SdpCone>(backend); }
  bool is_box() const { return std::holds_alternative<BoxQuadrature>(backend); }
};

inline void check_target(const Vector& y, Index m) {
  if (y.size() != m) fail(Errc::invalid_argument, "target y has wrong dimension");
  if (!y.allFinite()) fail(Errc::invalid_argument, "target y must be finite");
}

/// LP-orthant problem; c must already be normalized (strictly positive).
inline MaxentProblem make_lp_problem(const Matrix& A, const Vector& c, const Vector& y) {
  if (A.cols() != c.size()) fail(Errc::invalid_argument, "A and c dimensions disagree");
  if (A.rows() < 1 || A.rows() > A.cols()) fail(Errc::invalid_argument, "LP backend requires 1 <= m <= d");
  if (row_rank(A) < A.rows()) fail(Errc::rank_deficient, "A must have full row rank");
  if (!((c.array() > 0.0).all())) fail(Errc::invalid_argument, "c must be strictly positive (normalize first)");
  check_target(y, A.rows());
  return {LpOrthant{A, c, c.array().log().sum()}, y};
}

inline MaxentProblem make_sdp_problem(const Matrix& A0, const std::vector<Matrix>& As, const Vector& y) {
  const Index d = A0.rows();
  if (d < 1 || !is_symmetric(A0)) fail(Errc::invalid_argument, "A0 must be a symmetric square matrix");
  if (As.empty()) fail(Errc::invalid_argument, "at least one constraint matrix is required");
  for (const auto& Aj : As)
    if (Aj.rows() != d || !is_symmetric(Aj)) fail(Errc::invalid_argument, "constraint matrices must be symmetric d×d");
  if (static_cast<Index>(As.size()) >= packed_size(d))
    fail(Errc::invalid_argument, "SDP backend requires m < d(d+1)/2");
  if (!is_positive_definite(A0)) fail(Errc::not_positive_definite, "A0 must be positive definite (normalize first)");
  gram_j_h(As);
  check_target(y, static_cast<Index>(As.size()));
  return {SdpCone{A0, As, -psd_log_barrier(A0)}, y};
}

inline std::shared_ptr<const BoxGrid> build_box_grid(const BoxQuadrature& box) {
  const auto d = static_cast<Index>(box.bounds.size());
  if (d > kMaxBoxQuadratureDim) return nullptr;
  const GaussRule rule = gauss_legendre(kBoxNodesPerAxis);
  Index n = 1;
  for (Index i = 0; i < d; ++i) n *= kBoxNodesPerAxis;
  auto grid = std::make_shared<BoxGrid>();
  grid->nodes.resize(n, d);
  grid->log_weight_p.resize(n);
  grid->moments.resize(n, box_moment_dim(box.map, d));
  Vector x(d);
  for (Index k = 0; k < n; ++k) {
    Index rem = k;
    double log_w = 0.0;
    for (Index i = 0; i < d; ++i) {
      const auto q = static_cast<std::size_t>(rem % kBoxNodesPerAxis);
      rem /= kBoxNodesPerAxis;
      const auto& b = box.bounds[static_cast<std::size_t>(i)];
      const double half = 0.5 * (b.hi - b.lo);
      x(i) = b.lo + half * (rule.nodes[q] + 1.0);
      log_w += std::log(half * rule.weights[q]);
    }
    grid->nodes.row(k) = x.transpose();
    grid->log_weight_p(k) = log_w + box_log_density_unnormalized(box.density, box.bounds, x) - box.log_normalizer;
    grid->moments.row(k) = box_map_eval(box.map, x).transpose();
  }
  return grid;
}

inline MaxentProblem make_box_problem(std::vector<Interval> bounds, BoxDensity density, BoxMap map, const Vector& y) {
  if (bounds.empty()) fail(Errc::invalid_argument, "box needs at least one interval");
  for (const auto& b : bounds)
    if (!(b.hi > b.lo) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
      fail(Errc::invalid_argument, "box intervals must be finite with lo < hi");
  BoxQuadrature box{std::move(bounds), density, map, 0.0, nullptr};
  box.log_normalizer = box_log_normalizer(density, box.bounds);
  box.grid = build_box_grid(box);
  check_target(y, box_moment_dim(map, static_cast<Index>(box.bounds.size())));
  return {std::move(box), y};
}

}  // namespace cramer
