#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"
#include "cramer/maxent_core.hpp"
#include "cramer/oracles.hpp"
#include "cramer/problem.hpp"
#include "cramer/quadrature.hpp"

namespace cramer {

/// Parametrization x = base_point + frame·t of the affine fiber {A x = y}.
/// Orthonormal frame columns make H^{d−m} on the fiber equal to Lebesgue measure in t.
struct FiberFrame {
  Vector base_point;
  Matrix frame;
};

inline FiberFrame null_space_frame(const Matrix& A, const Vector& y) {
  const Index m = A.rows(), d = A.cols();
  if (y.size() != m) fail(Errc::invalid_argument, "y has wrong dimension");
  if (m < 1 || m > d) fail(Errc::rank_deficient, "A must have 1 <= m <= d rows");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(m - 1) > 1e-10 * std::max(1.0, sv(0)))) fail(Errc::rank_deficient, "A does not have full row rank");
  FiberFrame out;
  out.frame = svd.matrixV().rightCols(d - m);
  out.base_point = svd.solve(y);
  return out;
}

/// Divided difference exp[a_0, ..., a_k]. Uses the power series
/// e^{a_min} Σ_n h_n(a − a_min)/(n+k)! (h_n complete homogeneous symmetric
/// polynomials) when the spread max a − min a is at most kSeriesSpread, and
/// the recursive quotient otherwise.
inline constexpr double kSeriesSpread = 1.0;

inline double exp_divided_difference(std::vector<double> a) {
  if (a.empty()) fail(Errc::invalid_argument, "divided difference needs at least one node");
  std::sort(a.begin(), a.end());
  const std::size_t k = a.size() - 1;
  const double spread = a.back() - a.front();
  if (k == 0) return std::exp(a.front());
  if (spread <= kSeriesSpread) {
    std::vector<double> delta(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) delta[i] = a[i] - a.front();
    // h[j] holds h_n over the first j+1 variables; updated in place per degree.
    std::vector<double> h(a.size(), 1.0);
    double factorial = 1.0;
    for (std::size_t i = 2; i <= k; ++i) factorial *= static_cast<double>(i);
    double sum = 1.0 / factorial;  // n = 0
    for (int n = 1; n < 80; ++n) {
      h[0] *= delta[0];
      for (std::size_t j = 1; j < a.size(); ++j) h[j] = h[j - 1] + delta[j] * h[j];
      factorial *= static_cast<double>(static_cast<std::size_t>(n) + k);
      const double term = h.back() / factorial;
      sum += term;
      if (term <= 1e-18 * sum) break;
    }
    return std::exp(a.front()) * sum;
  }
  std::vector<double> head(a.begin(), a.end() - 1), tail(a.begin() + 1, a.end());
  return (exp_divided_difference(tail) - exp_divided_difference(head)) / spread;
}

/// ∫ e^{<g,t>} over the simplex conv(vertices) in R^k: k!·vol·exp[a_0..a_k] with
/// a_i = offset + <g, v_i>.
inline double exp_over_simplex(const std::vector<Vector>& vertices, const Vector& g, double offset) {
  const std::size_t k = vertices.size() - 1;
  Matrix edges(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t i = 1; i <= k; ++i) edges.col(static_cast<Index>(i - 1)) = vertices[i] - vertices[0];
  double kfact = 1.0;
  for (std::size_t i = 2; i <= k; ++i) kfact *= static_cast<double>(i);
  const double volume = std::abs(edges.determinant()) / kfact;
  std::vector<double> a(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) a[i] = offset + g.dot(vertices[i]);
  return kfact * volume * exp_divided_difference(std::move(a));
}

namespace detail {

/// Vertices of the 2-D polygon {t : x0 + F t >= 0}; empty when infeasible.
inline std::vector<Vector> polygon_vertices(const Vector& x0, const Matrix& F, double tol) {
  std::vector<Index> active;
  for (Index j = 0; j < F.rows(); ++j)
    if (F.row(j).norm() > 1e-14) active.push_back(j);
  std::vector<Vector> verts;
  for (std::size_t p = 0; p < active.size(); ++p)
    for (std::size_t q = p + 1; q < active.size(); ++q) {
      Eigen::Matrix2d M;
      M.row(0) = F.row(active[p]);
      M.row(1) = F.row(active[q]);
      const double det = M.determinant();
      if (std::abs(det) <= 1e-14 * M.row(0).norm() * M.row(1).norm()) continue;
      const Eigen::Vector2d t = M.inverse() * Eigen::Vector2d(-x0(active[p]), -x0(active[q]));
      const Vector tv = t;
      if (((x0 + F * tv).array() < -tol).any()) continue;
      const bool duplicate = std::any_of(verts.begin(), verts.end(), [&](const Vector& v) { return (v - tv).norm() <= tol; });
      if (!duplicate) verts.push_back(tv);
    }
  return verts;
}

inline bool polygon_has_recession(const Matrix& F) {
  for (Index j = 0; j < F.rows(); ++j) {
    const double n = F.row(j).norm();
    if (n <= 1e-14) continue;
    for (double sign : {1.0, -1.0}) {
      Vector u(2);
      u << -F(j, 1) / n * sign, F(j, 0) / n * sign;
      if (((F * u).array() >= -1e-12).all()) return true;
    }
  }
  return false;
}

}  // namespace detail

/// v(y) = s/√det(AAᵀ) ∫_{x>=0, Ax=y} e^{−<c,x>} dH^{d−m} for fiber dimension
/// d − m ∈ {0, 1, 2}, integrated exactly on a triangulation of the fiber.
/// Returns 0 for an empty fiber.
inline double fiber_density_quadrature(const Matrix& A, const Vector& c, const Vector& y) {
  const Index m = A.rows(), d = A.cols();
  if (c.size() != d) fail(Errc::invalid_argument, "A and c dimensions disagree");
  if (!((c.array() > 0.0).all())) fail(Errc::invalid_argument, "c must be strictly positive");
  if (d - m > 2) fail(Errc::codim_unsupported, "fiber dimension d - m must be at most 2");
  const FiberFrame fr = null_space_frame(A, y);
  const Vector& x0 = fr.base_point;
  const Matrix& F = fr.frame;
  const double scale = std::max(1.0, x0.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  const double log_pref = c.array().log().sum() - 0.5 * std::log((A * A.transpose()).determinant());
  const double offset = log_pref - c.dot(x0);
  const Vector g = -(F.transpose() * c);

  if (d == m) return (x0.array() >= -tol).all() ? std::exp(offset) : 0.0;

  if (d - m == 1) {
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < d; ++j) {
      const double f = F(j, 0);
      if (std::abs(f) <= 1e-14) {
        if (x0(j) < -tol) return 0.0;
      } else if (f > 0.0) {
        lo = std::max(lo, -x0(j) / f);
      } else {
        hi = std::min(hi, -x0(j) / f);
      }
    }
    if (lo > hi + tol) return 0.0;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      if (hi - lo <= 1e-12 * scale) fail(Errc::degenerate_fiber, "fiber is a single point");
      std::vector<Vector> seg{Vector::Constant(1, lo), Vector::Constant(1, hi)};
      return exp_over_simplex(seg, g, offset);
    }
    // half-line fiber: ∫ e^{offset + g t} over the ray
    const double slope = g(0);
    if (std::isfinite(lo) && slope < 0.0) return std::exp(offset + slope * lo) / (-slope);
    if (std::isfinite(hi) && slope > 0.0) return std::exp(offset + slope * hi) / slope;
    fail(Errc::unbounded_fiber, "fiber integral diverges");
  }

  const std::vector<Vector> verts = detail::polygon_vertices(x0, F, tol);
  if (verts.empty()) return 0.0;
  if (detail::polygon_has_recession(F)) fail(Errc::unbounded_fiber, "unbounded two-dimensional fiber");
  if (verts.size() < 3) fail(Errc::degenerate_fiber, "fiber polygon is lower-dimensional");
  Vector centroid = Vector::Zero(2);
  for (const auto& v : verts) centroid += v;
  centroid /= static_cast<double>(verts.size());
  std::vector<Vector> ring = verts;
  std::sort(ring.begin(), ring.end(), [&](const Vector& a, const Vector& b) {
    return std::atan2(a(1) - centroid(1), a(0) - centroid(0)) < std::atan2(b(1) - centroid(1), b(0) - centroid(0));
  });
  double area = 0.0, total = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vector& p = ring[i];
    const Vector& q = ring[(i + 1) % ring.size()];
    area += 0.5 * std::abs((p(0) - centroid(0)) * (q(1) - centroid(1)) - (p(1) - centroid(1)) * (q(0) - centroid(0)));
    total += exp_over_simplex({centroid, p, q}, g, offset);
  }
  if (area <= 1e-12 * scale * scale) fail(Errc::degenerate_fiber, "fiber polygon has zero area");
  return total;
}

// ---------------------------------------------------------------------------
// Density estimates on grids

enum class DensityMethod { quadrature, brion_vergne, mc_histogram };

inline std::string_view to_string(DensityMethod m) {
  switch (m) {
    case DensityMethod::quadrature: return "quadrature";
    case DensityMethod::brion_vergne: return "brion-vergne";
    case DensityMethod::mc_histogram: return "mc-histogram";
  }
  return "unknown";
}

/// Values of v on a grid of y points; std_errors only for Monte-Carlo estimates.
struct DensityEstimate {
  std::vector<Vector> grid;
  std::vector<double> values;
  DensityMethod method = DensityMethod::quadrature;
  std::optional<std::vector<double>> std_errors;
};

struct HistogramAxis {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 1;
  double width() const { return (hi - lo) / bins; }
};

/// Tensor grid of half-open bins; bins are enumerated with the first axis slowest.
struct HistogramGrid {
  std::vector<HistogramAxis> axes;

  std::size_t bin_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.bins);
    return n;
  }

  double bin_volume() const {
    double v = 1.0;
    for (const auto& a : axes) v *= a.width();
    return v;
  }

  /// Lower corner of a bin by flat index.
  Vector bin_lower(std::size_t flat) const {
    Vector lo(static_cast<Index>(axes.size()));
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto b = flat % static_cast<std::size_t>(axes[k].bins);
      flat /= static_cast<std::size_t>(axes[k].bins);
      lo(static_cast<Index>(k)) = axes[k].lo + static_cast<double>(b) * axes[k].width();
    }
    return lo;
  }

  Vector bin_center(std::size_t flat) const {
    Vector c = bin_lower(flat);
    for (std::size_t k = 0; k < axes.size(); ++k) c(static_cast<Index>(k)) += 0.5 * axes[k].width();
    return c;
  }

  std::optional<std::size_t> locate(const Vector& y) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const double u = (y(static_cast<Index>(k)) - axes[k].lo) / axes[k].width();
      if (!(u >= 0.0) || u >= axes[k].bins) return std::nullopt;
      flat = flat * static_cast<std::size_t>(axes[k].bins) + static_cast<std::size_t>(u);
    }
    return flat;
  }

  void validate() const {
    if (axes.empty()) fail(Errc::invalid_argument, "grid needs at least one axis");
    for (const auto& a : axes)
      if (!(a.hi > a.lo) || a.bins < 1) fail(Errc::invalid_argument, "grid axis needs lo < hi and bins >= 1");
  }
};

inline constexpr std::size_t kMinHistogramSamples = 10'000;

/// Histogram of h(X), X ~ P, normalized to a density; per-bin binomial standard errors.
inline DensityEstimate pushforward_histogram(const MaxentProblem& problem, std::size_t n_samples,
                                             const HistogramGrid& grid, std::uint64_t seed) {
  if (problem.is_sdp()) fail(Errc::sampling_unsupported, "use mc_psd_integral for the PSD cone");
  if (n_samples < kMinHistogramSamples) fail(Errc::invalid_argument, "pushforward_histogram needs at least 1e4 samples");
  grid.validate();
  if (static_cast<Index>(grid.axes.size()) != problem.moment_dim()) fail(Errc::invalid_argument, "grid dimension must equal m");
  const SampleBatch batch = sample_reference(problem, n_samples, seed);
  std::vector<std::size_t> counts(grid.bin_count(), 0);
  for (Index i = 0; i < batch.points.rows(); ++i)
    if (auto b = grid.locate(moment_map(problem, batch.points.row(i).transpose()))) ++counts[*b];
  DensityEstimate out;
  out.method = DensityMethod::mc_histogram;
  out.std_errors.emplace();
  const double n = static_cast<double>(n_samples), vol = grid.bin_volume();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double p = static_cast<double>(counts[b]) / n;
    out.grid.push_back(grid.bin_center(b));
    out.values.push_back(p / vol);
    out.std_errors->push_back(std::sqrt(p * (1.0 - p) / n) / vol);
  }
  return out;
}

/// Bin averages (1/|bin|)∫_bin v of a point-density evaluator, by tensor
/// Gauss-Legendre inside each bin. Degenerate fibers occur on a null set and count as 0.
inline DensityEstimate bin_averaged_density(const HistogramGrid& grid, const std::function<double(const Vector&)>& v,
                                            DensityMethod method, int nodes_per_axis = 16) {
  grid.validate();
  const GaussRule rule = gauss_legendre(nodes_per_axis);
  const std::size_t dim = grid.axes.size();
  std::size_t per_bin = 1;
  for (std::size_t k = 0; k < dim; ++k) per_bin *= static_cast<std::size_t>(nodes_per_axis);
  DensityEstimate out;
  out.method = method;
  for (std::size_t b = 0; b < grid.bin_count(); ++b) {
    const Vector lo = grid.bin_lower(b);
    double acc = 0.0;
    Vector y(static_cast<Index>(dim));
    for (std::size_t q = 0; q < per_bin; ++q) {
      std::size_t rem = q;
      double w = 1.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const auto node = rem % static_cast<std::size_t>(nodes_per_axis);
        rem /= static_cast<std::size_t>(nodes_per_axis);
        const double width = grid.axes[k].width();
        y(static_cast<Index>(k)) = lo(static_cast<Index>(k)) + 0.5 * width * (rule.nodes[node] + 1.0);
        w *= 0.5 * rule.weights[node];
      }
      double value = 0.0;
      try {
        value = v(y);
      } catch (const Error& e) {
        if (e.code() != Errc::degenerate_fiber) throw;
      }
      acc += w * value;
    }
    out.grid.push_back(grid.bin_center(b));
    out.values.push_back(acc);
  }
  return out;
}

/// Point values of v by fiber quadrature.
inline DensityEstimate quadrature_density_at(const Matrix& A, const Vector& c, const std::vector<Vector>& points) {
  DensityEstimate out;
  out.method = DensityMethod::quadrature;
  out.grid = points;
  for (const auto& y : points) out.values.push_back(fiber_density_quadrature(A, c, y));
  return out;
}

// ---------------------------------------------------------------------------
// Integrals over moment space

/// ∫_{R^m} g(y) v(y) dy for m ∈ {1, 2}, in polar form: radial Gauss-Legendre
/// panels of geometrically growing width, truncated once successive panels
/// contribute less than rel_tol of the running total; for m = 2 the angle is
/// split at the directions of the columns of A, where v may have kinks.
inline double moment_space_integral(const Matrix& A, const Vector& c, const std::function<double(const Vector&)>& g,
                                    double rel_tol = 1e-13) {
  const Index m = A.rows();
  if (m < 1 || m > 2) fail(Errc::unsupported_dimension, "moment-space quadrature supports m in {1, 2}");
  const GaussRule radial = gauss_legendre(20);
  const double scale = std::max(1e-3, (A * c.cwiseInverse()).norm());

  auto integrand = [&](const Vector& y) {
    double v = 0.0;
    try {
      v = fiber_density_quadrature(A, c, y);
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_fiber) throw;
    }
    return v == 0.0 ? 0.0 : g(y) * v;
  };

  // ∫_0^∞ f(r u) r^{m-1} dr
  auto radial_integral = [&](const Vector& u) {
    double total = 0.0, r = 0.0, width = 0.05 * scale;
    int quiet = 0;
    for (int panel = 0; panel < 400 && r < 1e4 * scale; ++panel) {
      const double part = integrate(radial, r, r + width, [&](double rr) {
        return integrand(rr * u) * std::pow(rr, static_cast<double>(m - 1));
      });
      total += part;
      quiet = std::abs(part) <= rel_tol * std::abs(total) ? quiet + 1 : 0;
      if (quiet >= 3) break;
      r += width;
      width *= 1.15;
    }
    return total;
  };

  if (m == 1) {
    double total = 0.0;
    if ((A.array() > 0.0).any()) total += radial_integral(Vector::Constant(1, 1.0));
    if ((A.array() < 0.0).any()) total += radial_integral(Vector::Constant(1, -1.0));
    return total;
  }

  std::vector<double> cuts;
  for (Index j = 0; j < A.cols(); ++j) cuts.push_back(std::atan2(A(1, j), A(0, j)));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), cuts.end());
  cuts.push_back(cuts.front() + 2.0 * std::numbers::pi);
  const GaussRule angular = gauss_legendre(24);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (b - a < 1e-12) continue;
    const double mid = 0.5 * (a + b);
    Vector probe(2);
    probe << std::cos(mid), std::sin(mid);
    if (fiber_density_quadrature(A, c, scale * probe) == 0.0) continue;  // sector outside the cone A R^d_+
    total += integrate(angular, a, b, [&](double theta) {
      Vector u(2);
      u << std::cos(theta), std::sin(theta);
      return radial_integral(u);
    });
  }
  return total;
}

enum class TestFunctionKind { constant_one, linear, exponential };

/// Catalogued g: 1, y ↦ <w,y>, or y ↦ e^{<w,y>}.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::constant_one;
  Vector w;

  double operator()(const Vector& y) const {
    switch (kind) {
      case TestFunctionKind::constant_one: return 1.0;
      case TestFunctionKind::linear: return w.dot(y);
      case TestFunctionKind::exponential: return std::exp(w.dot(y));
    }
    return 0.0;
  }
};

struct CoareaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// Both sides of ∫_Ω g(h(x)) p(x) dx = ∫ g(y) v(y) dy on an LP-orthant problem:
/// lhs in closed form (total mass, mean of h, or Z(w)), rhs by moment-space
/// quadrature of the fiber density.
inline CoareaCheck coarea_residual(const MaxentProblem& problem, const TestFunction& g, double rel_tol = 1e-13) {
  const auto* lp = std::get_if<LpOrthant>(&problem.backend);
  if (!lp) fail(Errc::invalid_argument, "coarea_residual needs the LP-orthant backend");
  const Index codim = lp->A.cols() - lp->A.rows();
  if (codim < 1 || codim > 2) fail(Errc::codim_unsupported, "fiber dimension d - m must be 1 or 2");
  if (g.kind != TestFunctionKind::constant_one && g.w.size() != lp->A.rows())
    fail(Errc::invalid_argument, "test function weight has wrong dimension");
  CoareaCheck out;
  switch (g.kind) {
    case TestFunctionKind::constant_one: out.lhs = 1.0; break;
    case TestFunctionKind::linear: out.lhs = g.w.dot(lp->A * lp->c.cwiseInverse()); break;
    case TestFunctionKind::exponential: out.lhs = std::exp(log_partition(problem, g.w)); break;
  }
  out.rhs = moment_space_integral(lp->A, lp->c, g, rel_tol);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace cramer
