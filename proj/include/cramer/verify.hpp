#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cramer/errors.hpp"
#include "cramer/fiber_geometry.hpp"
#include "cramer/fixtures.hpp"
#include "cramer/lp_bridge.hpp"
#include "cramer/maxent_core.hpp"
#include "cramer/oracles.hpp"
#include "cramer/polytope.hpp"
#include "cramer/psd_cone.hpp"
#include "cramer/sdp_bridge.hpp"

namespace cramer::verify {

struct Check {
  std::string suite;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
};

/// Sample sizes for the Monte-Carlo checks; everything else is fixed.
struct Config {
  std::uint64_t seed = 42;
  std::size_t histogram_samples = 1'000'000;
  std::size_t psd_samples = 1'000'000;
  std::size_t mc_samples = 1'000'000;
  std::size_t coverage_samples = 10'000;
};

class Recorder {
 public:
  explicit Recorder(std::string suite) : suite_(std::move(suite)) {}

  /// measured ≤ threshold
  void le(const std::string& name, double measured, double threshold) {
    add(name, measured <= threshold, measured, threshold);
  }
  /// measured ≥ threshold
  void ge(const std::string& name, double measured, double threshold) {
    add(name, measured >= threshold, measured, threshold);
  }
  void add(const std::string& name, bool pass, double measured, double threshold) {
    checks_.push_back({suite_, name, pass, measured, threshold});
  }

  /// Passes when fn throws an Error with the expected code; measured is 1 on pass.
  void raises(const std::string& name, Errc code, const std::function<void()>& fn) {
    bool ok = false;
    try {
      fn();
    } catch (const Error& e) {
      ok = e.code() == code;
    }
    add(name, ok, ok ? 1.0 : 0.0, 1.0);
  }

  /// Records a failing check instead of propagating an unexpected error.
  void guarded(const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      add(name + " [error: " + e.what() + "]", false, std::nan(""), 0.0);
    }
  }

  std::vector<Check>& checks() { return checks_; }

 private:
  std::string suite_;
  std::vector<Check> checks_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

inline Vector vec1(double v) { return Vector::Constant(1, v); }

/// (1 − √5)/2: root of λ² − λ − 1 = 0, the E1 dual optimum at y = 1.
inline double e1_lambda_star() { return 0.5 * (1.0 - std::sqrt(5.0)); }

inline double e1_log_Z(double lambda) { return std::log(2.0) - std::log(1.0 - lambda) - std::log(2.0 - lambda); }

/// Random λ with λ/0.5 interior: a fraction in (0, 0.5) of the distance to the boundary, capped at 3.
inline Vector random_interior_lambda(const MaxentProblem& p, fixtures::Draws& r) {
  const Index m = p.moment_dim();
  Vector dir(m);
  for (Index i = 0; i < m; ++i) dir(i) = r.normal();
  dir /= dir.norm();
  const double t_max = std::min(3.0, detail::max_step_to_boundary(p, Vector::Zero(m), dir));
  return r.uniform(0.0, 0.5) * t_max * dir;
}

/// Backends exercised by the derivative and duality properties.
inline std::vector<std::pair<std::string, MaxentProblem>> property_backends() {
  const LPInstance lp = fixtures::random_lp(11, 4, 2);
  const SDPInstance sdp = fixtures::random_sdp(12, 3, 2);
  return {{"lp", lp_maxent_problem(lp)},
          {"sdp", sdp_maxent_problem(sdp)},
          {"box", fixtures::box_uniform_2d(Vector::Zero(2))}};
}

/// Random target in the interior of the moment cone: h of a random point.
inline Vector random_target(const MaxentProblem& p, fixtures::Draws& r) {
  if (const auto* lp = std::get_if<LpOrthant>(&p.backend)) {
    Vector x(lp->A.cols());
    for (Index j = 0; j < x.size(); ++j) x(j) = r.uniform(0.2, 2.0);
    return lp->A * x;
  }
  if (const auto* sdp = std::get_if<SdpCone>(&p.backend)) {
    const Index d = sdp->A0.rows();
    Matrix B(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) B(i, j) = r.uniform(-1.0, 1.0);
    const Matrix X = 0.3 * Matrix::Identity(d, d) + B * B.transpose();
    Vector y(static_cast<Index>(sdp->As.size()));
    for (Index i = 0; i < y.size(); ++i) y(i) = trace_inner(sdp->As[static_cast<std::size_t>(i)], X);
    return y;
  }
  // box: average of h over four random points keeps y inside the convex hull of h(Ω)
  const auto& box = std::get<BoxQuadrature>(p.backend);
  Vector acc = Vector::Zero(p.moment_dim());
  for (int k = 0; k < 4; ++k) {
    Vector x(static_cast<Index>(box.bounds.size()));
    for (Index j = 0; j < x.size(); ++j)
      x(j) = r.uniform(box.bounds[static_cast<std::size_t>(j)].lo, box.bounds[static_cast<std::size_t>(j)].hi);
    acc += box_map_eval(box.map, x);
  }
  return acc / 4.0;
}

// ---------------------------------------------------------------------------

inline std::vector<Check> core_suite(const Config& cfg) {
  Recorder rec("core");
  const LPInstance e1 = fixtures::e1(1.0);
  const MaxentProblem p1 = lp_maxent_problem(e1);
  const MaxentProblem p2 = sdp_maxent_problem(fixtures::e2(2.0));

  rec.guarded("log_partition", [&] {
    rec.le("log_partition.e1.lambda=0", std::abs(log_partition(p1, vec1(0.0))), 1e-14);
    rec.le("log_partition.e1.lambda=0.5", std::abs(log_partition(p1, vec1(0.5)) - std::log(8.0 / 3.0)), 1e-14);
    rec.raises("log_partition.e1.lambda=1.5.domain_violation", Errc::domain_violation, [&] { log_partition(p1, vec1(1.5)); });
    const auto d1 = log_partition_derivatives(p1, vec1(0.0));
    rec.le("derivatives.e1.grad", std::abs(d1.gradient(0) - 1.5), 1e-14);
    rec.le("derivatives.e1.hess", std::abs(d1.hessian(0, 0) - 1.25), 1e-14);
    const auto d2 = log_partition_derivatives(p2, vec1(0.0));
    rec.le("derivatives.e2.grad", std::abs(d2.gradient(0) - 3.0), 1e-14);
    rec.le("derivatives.e2.hess", std::abs(d2.hessian(0, 0) - 3.0), 1e-14);
  });

  rec.guarded("solve_dual", [&] {
    const DualResult mean = solve_dual(p1.with_target(vec1(1.5)));
    rec.le("solve_dual.e1.y=1.5.theta", std::abs(mean.theta), 1e-12);
    const DualResult r1 = solve_dual(p1);
    const double ls = e1_lambda_star();
    rec.le("solve_dual.e1.y=1.lambda", std::abs(r1.lambda_star(0) - ls), 1e-10);
    rec.le("solve_dual.e1.y=1.theta", std::abs(r1.theta - (ls - e1_log_Z(ls))), 1e-10);
    const DualResult r2 = solve_dual(p2);
    rec.le("solve_dual.e2.y=2.lambda", std::abs(r2.lambda_star(0) + 0.5), 1e-10);
    rec.le("solve_dual.e2.y=2.theta", std::abs(r2.theta - (-1.0 + 3.0 * std::log(1.5))), 1e-10);
    const DualResult out = solve_dual(p1.with_target(vec1(-1.0)));
    rec.add("solve_dual.e1.y=-1.diverging_unbounded", out.status == DualStatus::diverging_unbounded,
            out.status == DualStatus::diverging_unbounded ? 1.0 : 0.0, 1.0);
  });

  rec.guarded("perspective", [&] {
    const double theta1 = solve_dual(p1).theta;
    rec.le("perspective.e1.eps=1", std::abs(theta_and_perspective(p1, vec1(1.0), 1.0) - theta1), 1e-12);
    rec.le("perspective.e1.eps=0", std::abs(theta_and_perspective(p1, vec1(1.0), 0.0) - 1.0), 1e-12);
    const MaxentProblem box = fixtures::box_uniform_2d(Vector::Constant(2, 0.5));
    rec.raises("perspective.box.eps=0.limit_unsupported", Errc::limit_unsupported,
               [&] { theta_and_perspective(box, Vector::Constant(2, 0.5), 0.0); });
  });

  rec.guarded("optimal_density", [&] {
    const DualResult mean = solve_dual(p1.with_target(vec1(1.5)));
    rec.le("optimal_density.e1.y=1.5.x=0", std::abs(optimal_density_at(p1, mean, Vector::Zero(2)) - 2.0), 1e-12);
    const DualResult r1 = solve_dual(p1);
    const double ls = e1_lambda_star();
    rec.le("optimal_density.e1.y=1.x=0",
           std::abs(optimal_density_at(p1, r1, Vector::Zero(2)) - (1.0 - ls) * (2.0 - ls)), 1e-9);
    DualResult bad = r1;
    bad.status = DualStatus::max_iter;
    rec.raises("optimal_density.not_converged", Errc::not_converged,
               [&] { optimal_density_at(p1, bad, Vector::Zero(2)); });
  });

  // Derivative and duality properties on each backend.
  for (const auto& [tag, base] : property_backends()) {
    rec.guarded("properties." + tag, [&, tag = tag, base = base] {
      fixtures::Draws r(7, 20);
      double min_eig = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 100; ++k) {
        const Vector lam = random_interior_lambda(base, r);
        const Matrix H = log_partition_derivatives(base, lam).hessian;
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().minCoeff());
      }
      rec.ge("hessian_psd." + tag + ".min_eigenvalue", min_eig, -1e-10);

      double grad_err = 0.0, hess_err = 0.0;
      for (int k = 0; k < 20; ++k) {
        const Vector lam = random_interior_lambda(base, r);
        const Vector g = log_partition_derivatives(base, lam).gradient;
        const double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
        grad_err = std::max(grad_err, finite_diff_check([&](const Vector& l) { return log_partition(base, l); },
                                                        [&](const Vector& l) { return log_partition_derivatives(base, l).gradient; },
                                                        lam, 1e-5) / scale);
        const Matrix H = log_partition_derivatives(base, lam).hessian;
        for (Index i = 0; i < lam.size(); ++i) {
          const double hs = std::max(1.0, H.row(i).lpNorm<Eigen::Infinity>());
          hess_err = std::max(hess_err, finite_diff_check([&](const Vector& l) { return log_partition_derivatives(base, l).gradient(i); },
                                                          [&](const Vector& l) { return Vector(log_partition_derivatives(base, l).hessian.row(i).transpose()); },
                                                          lam, 1e-5) / hs);
        }
      }
      rec.le("gradient_fd." + tag + ".relative", grad_err, 1e-6);
      rec.le("hessian_fd." + tag + ".relative", hess_err, 1e-6);

      const SolverOptions opts;
      const Vector mean = log_partition_derivatives(base, Vector::Zero(base.moment_dim())).gradient;
      const DualResult at_mean = solve_dual(base.with_target(mean), opts);
      rec.le("theta_at_mean." + tag, std::abs(at_mean.theta), 1e-8);

      double min_theta = std::numeric_limits<double>::infinity(), worst_stationarity = 0.0, worst_convexity = -1.0;
      int unconverged = 0;
      for (int k = 0; k < 10; ++k) {
        const Vector y1 = random_target(base, r), y2 = random_target(base, r);
        const DualResult a = solve_dual(base.with_target(y1), opts);
        const DualResult b = solve_dual(base.with_target(y2), opts);
        const DualResult c = solve_dual(base.with_target(0.5 * (y1 + y2)), opts);
        for (const DualResult* res : {&a, &b, &c}) {
          if (res->status != DualStatus::converged) {
            ++unconverged;
            continue;
          }
          min_theta = std::min(min_theta, res->theta);
          worst_stationarity = std::max(worst_stationarity, res->grad_residual);
        }
        worst_convexity = std::max(worst_convexity, c.theta - 0.5 * (a.theta + b.theta));
      }
      rec.le("converged." + tag + ".failures", unconverged, 0.0);
      rec.ge("kl_nonnegative." + tag + ".min_theta", min_theta, -1e-10);
      rec.le("stationarity." + tag + ".max_grad_residual", worst_stationarity, opts.grad_tol);
      rec.le("midpoint_convexity." + tag + ".max_excess", worst_convexity, 1e-8);
    });
  }

  rec.guarded("monte_carlo", [&] {
    // E_P[q*/p] = 1 and E_P[(q*/p)·h] = y over P-samples.
    const DualResult r1 = solve_dual(p1);
    const SampleBatch batch = sample_reference(p1, cfg.mc_samples, cfg.seed);
    MeanAccumulator norm, moment;
    for (Index i = 0; i < batch.points.rows(); ++i) {
      const Vector x = batch.points.row(i).transpose();
      const double w = optimal_density_at(p1, r1, x) / std::exp(reference_log_density(p1, x));
      norm.push(w);
      moment.push(w * moment_map(p1, x)(0));
    }
    const McEstimate n = norm.result(), mo = moment.result();
    rec.le("mc_normalization.e1.sigmas", std::abs(n.estimate - 1.0) / n.std_error, 3.0);
    rec.le("moment_recovery.e1.sigmas", std::abs(mo.estimate - 1.0) / mo.std_error, 3.0);

    const Vector yb(Vector::Constant(2, 0.0));
    const MaxentProblem box = fixtures::box_uniform_2d(yb);
    Vector target(2);
    target << 0.8, 0.5;
    const DualResult rb = solve_dual(box.with_target(target));
    const SampleBatch bb = sample_reference(box, cfg.mc_samples / 4, cfg.seed + 1);
    MeanAccumulator m0, m1;
    for (Index i = 0; i < bb.points.rows(); ++i) {
      const Vector x = bb.points.row(i).transpose();
      const Vector h = moment_map(box, x);
      const double w = std::exp(rb.lambda_star.dot(h) - rb.log_Z_at_star);
      m0.push(w * h(0));
      m1.push(w * h(1));
    }
    const McEstimate e0 = m0.result(), e1b = m1.result();
    rec.le("moment_recovery.box.sigmas",
           std::max(std::abs(e0.estimate - target(0)) / e0.std_error, std::abs(e1b.estimate - target(1)) / e1b.std_error), 3.0);
  });
  return std::move(rec.checks());
}

// ---------------------------------------------------------------------------

inline std::vector<Check> fiber_suite(const Config& cfg) {
  Recorder rec("fiber");
  const LPInstance e1 = fixtures::e1(1.0);
  const MaxentProblem p1 = lp_maxent_problem(e1);
  auto v_e1 = [](double y) { return 2.0 * (std::exp(-y) - std::exp(-2.0 * y)); };

  rec.guarded("quadrature", [&] {
    rec.le("quadrature.e1.y=1.relative", rel_err(fiber_density_quadrature(e1.A, e1.c, vec1(1.0)), v_e1(1.0)), 1e-12);
    rec.le("quadrature.e1.y=3.relative", rel_err(fiber_density_quadrature(e1.A, e1.c, vec1(3.0)), v_e1(3.0)), 1e-12);
    double outside = 0.0;
    for (double y : {-0.5, -1.0, -3.0}) outside = std::max(outside, fiber_density_quadrature(e1.A, e1.c, vec1(y)));
    const LPInstance pos = fixtures::random_lp_positive(5, 4, 2);
    for (const Vector& y : {Vector(Vector::Constant(2, -1.0)), Vector((Vector(2) << 1.0, -0.2).finished())})
      outside = std::max(outside, fiber_density_quadrature(pos.A, pos.c, y));
    rec.le("quadrature.outside_cone.max", outside, 0.0);
    rec.raises("quadrature.codim3.codim_unsupported", Errc::codim_unsupported,
               [&] { fiber_density_quadrature(Matrix::Ones(1, 4), Vector::Ones(4), vec1(1.0)); });
    Matrix dup(2, 2);
    dup << 1, 1, 2, 2;
    rec.raises("frame.duplicated_row.rank_deficient", Errc::rank_deficient,
               [&] { null_space_frame(dup, Vector::Ones(2)); });

    double frame_err = 0.0, base_err = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
      const LPInstance inst = fixtures::random_lp(seed, 4, 2);
      const FiberFrame fr = null_space_frame(inst.A, inst.y);
      frame_err = std::max({frame_err, (inst.A * fr.frame).cwiseAbs().maxCoeff(),
                            (fr.frame.transpose() * fr.frame - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff()});
      base_err = std::max(base_err, (inst.A * fr.base_point - inst.y).cwiseAbs().maxCoeff());
    }
    rec.le("frame.orthonormal_null_space.max_error", frame_err, 1e-12);
    rec.le("frame.base_point.max_error", base_err, 1e-10);

    // Column permutation changes the frame but not v.
    double perm_err = 0.0;
    const LPInstance pos2 = fixtures::random_lp_positive(6, 4, 2);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
    perm.indices() << 2, 0, 3, 1;
    for (double t : {0.7, 1.0, 1.4}) {
      const Vector y = t * pos2.y;
      perm_err = std::max(perm_err, rel_err(fiber_density_quadrature(pos2.A * perm, perm.transpose() * pos2.c, y),
                                            fiber_density_quadrature(pos2.A, pos2.c, y)));
    }
    rec.le("frame_invariance.relative", perm_err, 1e-10);

    // nearly coincident exponents
    const double a = 0.3, b = 0.3 + 1e-8;
    rec.le("divided_difference.close_nodes.relative",
           rel_err(exp_divided_difference({a, b}), std::exp(a) * std::expm1(b - a) / (b - a)), 1e-14);
  });

  rec.guarded("coarea", [&] {
    const CoareaCheck one = coarea_residual(p1, {TestFunctionKind::constant_one, {}});
    rec.le("coarea.e1.g=1", one.residual, 1e-6);
    const CoareaCheck lin = coarea_residual(p1, {TestFunctionKind::linear, vec1(1.0)});
    rec.le("coarea.e1.g=y", lin.residual, 1e-6);
    const CoareaCheck ex = coarea_residual(p1, {TestFunctionKind::exponential, vec1(0.5)});
    rec.le("coarea.e1.g=exp(0.5y)", ex.residual, 1e-5);
    const LPInstance pos = fixtures::random_lp_positive(5, 4, 2);
    const CoareaCheck two = coarea_residual(lp_maxent_problem(pos), {TestFunctionKind::constant_one, {}});
    rec.le("coarea.random_4x2.g=1", two.residual, 1e-6);
  });

  rec.guarded("laplace", [&] {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double lam = -1.0 + 1.9 * (k + 0.5) / 20.0;
      const TestFunction g{TestFunctionKind::exponential, vec1(lam)};
      const double quad = moment_space_integral(e1.A, e1.c, g);
      worst = std::max(worst, rel_err(quad, std::exp(log_partition(p1, vec1(lam)))));
    }
    rec.le("laplace_transform.e1.grid20.relative", worst, 1e-6);
  });

  rec.guarded("pushforward", [&] {
    HistogramGrid grid{{{0.0, 6.0, 60}}};
    const DensityEstimate hist = pushforward_histogram(p1, cfg.histogram_samples, grid, cfg.seed);
    const DensityEstimate quad = bin_averaged_density(
        grid, [&](const Vector& y) { return fiber_density_quadrature(e1.A, e1.c, y); }, DensityMethod::quadrature);
    std::size_t within = 0;
    for (std::size_t b = 0; b < hist.values.size(); ++b)
      if (std::abs(hist.values[b] - quad.values[b]) <= 3.0 * (*hist.std_errors)[b]) ++within;
    rec.ge("pushforward.e1.fraction_within_3se", static_cast<double>(within) / static_cast<double>(hist.values.size()), 0.95);

    HistogramGrid neg{{{-1.0, 0.0, 1}}};
    rec.le("pushforward.e1.negative_bin", pushforward_histogram(p1, 10'000, neg, cfg.seed).values[0], 0.0);

    HistogramGrid wide{{{0.0, 10.0, 100}}};
    const DensityEstimate w = pushforward_histogram(p1, cfg.histogram_samples, wide, cfg.seed + 1);
    double mass = 0.0;
    for (double v : w.values) mass += v * 0.1;
    const double n = static_cast<double>(cfg.histogram_samples);
    const double se = std::sqrt(std::max(mass * (1.0 - mass), 1.0 / n) / n);
    const double tail = 2.0 * std::exp(-10.0) - std::exp(-20.0);  // P(h > 10)
    rec.le("pushforward.e1.total_mass.sigmas", std::abs(mass - (1.0 - tail)) / se, 3.0);
    rec.raises("pushforward.sdp.sampling_unsupported", Errc::sampling_unsupported,
               [&] { pushforward_histogram(sdp_maxent_problem(fixtures::e2()), 10'000, grid, 1); });
  });
  return std::move(rec.checks());
}

// ---------------------------------------------------------------------------

inline const std::vector<double>& identity_eps() {
  static const std::vector<double> eps{1.0, 0.3, 0.1, 0.03, 0.01};
  return eps;
}

/// The five random LP instances of the identity checks: (seed, d, m).
inline std::vector<LPInstance> identity_lp_instances() {
  return {fixtures::random_lp(1, 3, 1), fixtures::random_lp(2, 4, 2), fixtures::random_lp(3, 5, 3),
          fixtures::random_lp(4, 5, 2), fixtures::random_lp(5, 4, 3)};
}

inline std::vector<LPInstance> partial_fraction_instances() {
  return {fixtures::random_lp_m1(21, 3), fixtures::random_lp_m1(22, 5), fixtures::random_lp_m1(23, 6)};
}

/// Max relative error of partial_fraction_Z against closed-form Z on 50 λ below the first pole.
inline double partial_fraction_error(const LPInstance& inst) {
  const BasisCatalog cat = enumerate_feasible_bases(inst);
  double pole = std::numeric_limits<double>::infinity();
  for (const auto& b : cat.bases) pole = std::min(pole, b.pi_sigma(0));
  const MaxentProblem p = lp_maxent_problem(inst);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double lam = -3.0 + (pole - 0.01 + 3.0) * k / 49.0;
    worst = std::max(worst, rel_err(partial_fraction_Z(cat, inst, vec1(lam)), std::exp(log_partition(p, vec1(lam)))));
  }
  return worst;
}

/// Three-way agreement on one instance: max relative BV-vs-quadrature error on
/// points, and the fraction of histogram bins within 3 standard errors of the BV bin average.
struct ThreeWay {
  double point_rel_err = 0.0;
  double hist_fraction = 0.0;
};

inline ThreeWay three_way_e1(const Config& cfg) {
  ThreeWay out;
  const LPInstance e1 = fixtures::e1(1.0);
  for (int k = 1; k <= 24; ++k) {
    LPInstance at = e1;
    at.y = vec1(0.25 * k);
    out.point_rel_err = std::max(out.point_rel_err, rel_err(brion_vergne_density(enumerate_feasible_bases(at), at),
                                                            fiber_density_quadrature(at.A, at.c, at.y)));
  }
  HistogramGrid grid{{{0.0, 6.0, 60}}};
  const DensityEstimate hist = pushforward_histogram(lp_maxent_problem(e1), cfg.histogram_samples, grid, cfg.seed + 7);
  const DensityEstimate bv = bin_averaged_density(
      grid,
      [&](const Vector& y) {
        LPInstance at = e1;
        at.y = y;
        if (y(0) <= 0.0) return 0.0;
        return brion_vergne_density(enumerate_feasible_bases(at), at);
      },
      DensityMethod::brion_vergne);
  std::size_t within = 0;
  for (std::size_t b = 0; b < hist.values.size(); ++b)
    if (std::abs(hist.values[b] - bv.values[b]) <= 3.0 * (*hist.std_errors)[b]) ++within;
  out.hist_fraction = static_cast<double>(within) / static_cast<double>(hist.values.size());
  return out;
}

inline std::vector<Check> lp_suite(const Config& cfg) {
  Recorder rec("lp");
  const LPInstance e1 = fixtures::e1(1.0);

  rec.guarded("normalize", [&] {
    rec.le("normalize.e1.s", std::abs(e1.s - 2.0), 0.0);
    Matrix A(1, 2);
    A << 1.0, 1.0;
    const LPInstance shifted = normalize_instance(A, Vector((Vector(2) << -1.0, 2.0).finished()), vec1(3.0), vec1(-2.0));
    rec.le("normalize.lambda0.c_tilde", (shifted.c - Vector((Vector(2) << 1.0, 4.0).finished())).cwiseAbs().maxCoeff(), 0.0);
    rec.le("normalize.lambda0.s", std::abs(shifted.s - 4.0), 0.0);
    rec.le("normalize.lambda0.shift", std::abs(shifted.objective_shift + 6.0), 0.0);
    const LPInstance searched = normalize_instance(A, Vector((Vector(2) << -1.0, 2.0).finished()), vec1(3.0));
    rec.add("normalize.search.c_positive", (searched.c.array() > 0.0).all(), searched.c.minCoeff(), 0.0);
    Matrix B(1, 2);
    B << 1.0, -1.0;
    rec.raises("normalize.no_interior_dual", Errc::no_interior_dual,
               [&] { normalize_instance(B, Vector::Constant(2, -1.0), vec1(0.0)); });
  });

  rec.guarded("barrier", [&] {
    const BarrierSolution b1 = barrier_dual_solve(e1, 1.0);
    const double l1 = e1_lambda_star();
    rec.le("barrier.e1.eps=1.lambda", std::abs(b1.lambda(0) - l1), 1e-10);
    rec.le("barrier.e1.eps=1.value", std::abs(b1.value - (l1 + std::log(1.0 - l1) + std::log(2.0 - l1))), 1e-10);
    const BarrierSolution b2 = barrier_dual_solve(e1, 0.1);
    const double l2 = (28.0 - std::sqrt(104.0)) / 20.0;
    rec.le("barrier.e1.eps=0.1.lambda", std::abs(b2.lambda(0) - l2), 1e-10);
    rec.le("barrier.e1.eps=0.1.value", std::abs(b2.value - (l2 + 0.1 * (std::log(1.0 - l2) + std::log(2.0 - l2)))), 1e-10);
    rec.raises("barrier.e1.y=-1.unbounded", Errc::unbounded, [&] { barrier_dual_solve(fixtures::e1(-1.0), 1.0); });
  });

  rec.guarded("vertex_oracle", [&] {
    const VertexSolution v = lp_vertex_oracle(e1);
    rec.le("vertex_oracle.e1.tau", std::abs(v.tau - 1.0), 1e-14);
    rec.le("vertex_oracle.e1.x", (v.x_star - Vector((Vector(2) << 1.0, 0.0).finished())).cwiseAbs().maxCoeff(), 1e-14);
    rec.raises("vertex_oracle.e1.y=-1.infeasible", Errc::infeasible, [&] { lp_vertex_oracle(fixtures::e1(-1.0)); });
    const LPInstance r7 = fixtures::random_lp(7, 4, 2);
    const VertexSolution v7 = lp_vertex_oracle(r7);
    rec.le("vertex_oracle.random7.vs_barrier_1e-6", std::abs(v7.tau - barrier_dual_solve(r7, 1e-6).value), 1e-4);
    rec.add("enumerate.random7.count_matches", enumerate_feasible_bases(r7).bases.size() == v7.feasible_vertices,
            static_cast<double>(enumerate_feasible_bases(r7).bases.size()), static_cast<double>(v7.feasible_vertices));
  });

  rec.guarded("bases", [&] {
    const BasisCatalog cat = enumerate_feasible_bases(e1);
    bool ok = cat.bases.size() == 2 && !cat.degenerate;
    if (ok) {
      ok = std::abs(cat.bases[0].pi_sigma(0) - 1.0) < 1e-15 && std::abs(cat.bases[0].reduced_costs.at(1) - 1.0) < 1e-15 &&
           std::abs(cat.bases[1].pi_sigma(0) - 2.0) < 1e-15 && std::abs(cat.bases[1].reduced_costs.at(0) + 1.0) < 1e-15;
    }
    rec.add("enumerate.e1.bases", ok, static_cast<double>(cat.bases.size()), 2.0);
    const LPInstance ident = normalize_instance(Matrix::Identity(2, 2), Vector::Ones(2), Vector((Vector(2) << 1.0, 0.0).finished()));
    rec.add("enumerate.identity.degenerate", enumerate_feasible_bases(ident).degenerate, 1.0, 1.0);
    rec.raises("brion_vergne.identity.degenerate_vertex", Errc::degenerate_vertex,
               [&] { brion_vergne_density(enumerate_feasible_bases(ident), ident); });
    const PerturbedInstance moved = perturb_if_degenerate(ident);
    rec.add("perturb.identity", moved.perturbed && !moved.catalog.degenerate, moved.perturbed ? 1.0 : 0.0, 1.0);
    rec.le("brion_vergne.e1.y=1", std::abs(brion_vergne_density(cat, e1) - 2.0 * (std::exp(-1.0) - std::exp(-2.0))), 1e-14);
    const LPInstance e13 = fixtures::e1(3.0);
    rec.le("brion_vergne.e1.y=3",
           std::abs(brion_vergne_density(enumerate_feasible_bases(e13), e13) - 2.0 * (std::exp(-3.0) - std::exp(-6.0))), 1e-14);
  });

  rec.guarded("three_way", [&] {
    const ThreeWay t = three_way_e1(cfg);
    rec.le("three_way.e1.bv_vs_quadrature.relative", t.point_rel_err, 1e-8);
    rec.ge("three_way.e1.histogram.fraction_within_3se", t.hist_fraction, 0.95);
    double worst = 0.0;
    for (std::uint64_t seed : {5, 6, 8}) {
      const LPInstance pos = fixtures::random_lp_positive(seed, 4, 2);
      for (double t2 : {0.6, 1.0, 1.5}) {
        LPInstance at = pos;
        at.y = t2 * pos.y;
        const BasisCatalog cat = enumerate_feasible_bases(at);
        if (cat.degenerate) continue;
        worst = std::max(worst, rel_err(brion_vergne_density(cat, at), fiber_density_quadrature(at.A, at.c, at.y)));
      }
    }
    rec.le("three_way.random_4x2.bv_vs_quadrature.relative", worst, 1e-8);
  });

  rec.guarded("identity", [&] {
    std::vector<LPInstance> instances{e1};
    for (auto& inst : identity_lp_instances()) instances.push_back(inst);
    double worst = 0.0, cert = 0.0, feas = 0.0, gap_low = std::numeric_limits<double>::infinity(), gap_excess = -1.0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const LPInstance& inst = instances[k];
      const auto rows = theorem_lp_identity_report(inst, identity_eps());
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) worst = std::max(worst, rows[i].residual);
      const double tau = lp_vertex_oracle(inst).tau;
      for (double eps : identity_eps()) {
        const BarrierSolution b = barrier_dual_solve(inst, eps);
        const double dual = b.lambda.dot(inst.y);
        cert = std::max(cert, std::abs(inst.c.dot(b.x) - dual - eps * static_cast<double>(inst.d())));
        feas = std::max(feas, (inst.A * b.x - inst.y).cwiseAbs().maxCoeff());
        gap_low = std::min(gap_low, tau - dual);
        gap_excess = std::max(gap_excess, tau - dual - eps * static_cast<double>(inst.d()));
      }
    }
    rec.le("identity.e1+5random.max_residual", worst, 1e-8);
    rec.le("central_path.certificate.max_error", cert, 1e-8);
    rec.le("central_path.primal_feasibility.max_error", feas, 1e-8);
    rec.ge("barrier_to_lp.min_gap", gap_low, 0.0);
    rec.le("barrier_to_lp.max_gap_minus_eps_d", gap_excess, 1e-8);
    const auto e1_rows = theorem_lp_identity_report(e1, {1.0, 1e-4});
    rec.le("identity.e1.limit_row.tau", std::abs(e1_rows.back().tau_eps - 1.0), 1e-14);
    rec.le("identity.e1.limit_row.dual_gap_beyond_eps_d", e1_rows.back().residual, 1e-6);
  });

  rec.guarded("partial_fraction", [&] {
    const BasisCatalog cat = enumerate_feasible_bases(e1);
    rec.le("partial_fraction.e1.lambda=0", std::abs(partial_fraction_Z(cat, e1, vec1(0.0)) - 1.0), 1e-14);
    rec.le("partial_fraction.e1.lambda=0.5", std::abs(partial_fraction_Z(cat, e1, vec1(0.5)) - 8.0 / 3.0), 1e-14);
    double worst = partial_fraction_error(e1);
    for (const auto& inst : partial_fraction_instances()) worst = std::max(worst, partial_fraction_error(inst));
    rec.le("partial_fraction.e1+3random.grid50.relative", worst, 1e-10);
    rec.raises("partial_fraction.m=2.unsupported_dimension", Errc::unsupported_dimension, [&] {
      const LPInstance padded = normalize_instance(Matrix::Identity(2, 2), Vector((Vector(2) << 1.0, 2.0).finished()), Vector::Ones(2));
      partial_fraction_Z(enumerate_feasible_bases(padded), padded, Vector::Zero(2));
    });
    rec.raises("partial_fraction.e1.lambda=1.5.pole_violation", Errc::pole_violation,
               [&] { partial_fraction_Z(cat, e1, vec1(1.5)); });
  });
  return std::move(rec.checks());
}

// ---------------------------------------------------------------------------

/// The closed-form ε-rate bound on E2 at y = 3. The central path attains it with
/// equality (1 − λ_ε = ε), so the check allows rounding-level excess.
inline double e2_rate_bound(double eps) {
  return 3.0 * eps + eps * multivariate_gamma_constant(2) + 3.0 * eps * std::abs(std::log(eps));
}

inline std::vector<Check> sdp_suite(const Config& cfg) {
  Recorder rec("sdp");
  const SDPInstance e2 = fixtures::e2(3.0);
  const double c2 = std::log(std::numbers::pi / 2.0);

  rec.guarded("constants", [&] {
    rec.le("multivariate_gamma.d=1", std::abs(multivariate_gamma_constant(1)), 1e-14);
    rec.le("multivariate_gamma.d=2", std::abs(multivariate_gamma_constant(2) - c2), 1e-14);
    rec.le("multivariate_gamma.d=3",
           std::abs(multivariate_gamma_constant(3) - std::log(std::numbers::pi * std::numbers::pi / 2.0)), 1e-14);
    rec.le("psd_log_barrier.d=1.Z=2", std::abs(psd_log_barrier(Matrix::Constant(1, 1, 2.0)) + std::log(2.0)), 1e-14);
    rec.le("psd_log_barrier.d=2.Z=I", std::abs(psd_log_barrier(Matrix::Identity(2, 2)) - c2), 1e-14);
    rec.raises("psd_log_barrier.not_positive_definite", Errc::not_positive_definite, [&] {
      Matrix Z = Matrix::Identity(2, 2);
      Z(1, 1) = -1.0;
      psd_log_barrier(Z);
    });
    rec.le("gram_j_h.I", std::abs(gram_j_h({Matrix::Identity(2, 2)}) - std::sqrt(2.0)), 1e-14);
    Matrix E11 = Matrix::Zero(2, 2), E22 = Matrix::Zero(2, 2);
    E11(0, 0) = 1.0;
    E22(1, 1) = 1.0;
    rec.le("gram_j_h.E11,E22", std::abs(gram_j_h({E11, E22}) - 1.0), 1e-14);
    rec.raises("gram_j_h.dependent_constraints", Errc::dependent_constraints, [&] { gram_j_h({E11, Matrix(2.0 * E11)}); });
  });

  rec.guarded("log_Z", [&] {
    rec.le("sdp_log_Z.e2.lambda=0", std::abs(sdp_log_Z(e2, vec1(0.0))), 1e-14);
    rec.le("sdp_log_Z.e2.lambda=-0.5", std::abs(sdp_log_Z(e2, vec1(-0.5)) + 3.0 * std::log(1.5)), 1e-14);
    rec.raises("sdp_log_Z.e2.lambda=2.domain_violation", Errc::domain_violation, [&] { sdp_log_Z(e2, vec1(2.0)); });
  });

  rec.guarded("barrier", [&] {
    const BarrierSolution a = sdp_barrier_dual_solve(e2, 1.0);
    rec.le("barrier.e2.y=3.eps=1", std::max(std::abs(a.lambda(0)), std::abs(a.value + c2)), 1e-10);
    const BarrierSolution b = sdp_barrier_dual_solve(e2, 0.01);
    rec.le("barrier.e2.y=3.eps=0.01",
           std::max(std::abs(b.lambda(0) - 0.99), std::abs(b.value - (2.97 - 0.01 * c2 + 0.015 * std::log(1e-4)))), 1e-10);
    const BarrierSolution c = sdp_barrier_dual_solve(fixtures::e2(2.0), 1.0);
    rec.le("barrier.e2.y=2.eps=1",
           std::max(std::abs(c.lambda(0) + 0.5), std::abs(c.value - (-1.0 - c2 + 3.0 * std::log(1.5)))), 1e-10);
    rec.raises("barrier.e2.y=-1.unbounded", Errc::unbounded, [&] { sdp_barrier_dual_solve(fixtures::e2(-1.0), 1.0); });
  });

  rec.guarded("identity", [&] {
    double worst = 0.0;
    for (const SDPInstance& inst : {e2, fixtures::e2(2.0), fixtures::random_sdp(31, 3, 2)})
      for (const auto& row : theorem_sdp_identity_report(inst, {1.0, 0.1, 0.01})) worst = std::max(worst, row.residual);
    rec.le("identity.e2+random_d3m2.max_residual", worst, 1e-8);
    double excess = -1.0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
      excess = std::max(excess, std::abs(sdp_barrier_dual_solve(e2, eps).value - 3.0) - e2_rate_bound(eps));
    rec.le("eps_rate.e2.max_excess", excess, 1e-12);
    rec.le("limit.e2.eps=0", std::abs(theta_and_perspective(sdp_maxent_problem(e2), vec1(3.0), 0.0) - 3.0), 1e-9);
  });

  rec.guarded("mean_consistency", [&] {
    double worst = 0.0;
    for (const SDPInstance& inst : {e2, fixtures::random_sdp(32, 3, 2)}) {
      const Matrix A0inv = inst.A0.inverse();
      Vector mean(inst.m());
      for (Index i = 0; i < inst.m(); ++i)
        mean(i) = 0.5 * static_cast<double>(inst.d() + 1) * (A0inv * inst.As[static_cast<std::size_t>(i)]).trace();
      worst = std::max(worst, std::abs(solve_dual(sdp_maxent_problem(inst).with_target(mean)).theta));
    }
    rec.le("mean_consistency.theta", worst, 1e-8);
  });

  rec.guarded("phi_gradient", [&] {
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Index d = k < 5 ? 2 : 3;
      const Matrix Z = fixtures::random_pd(100 + static_cast<std::uint64_t>(k), d);
      const Matrix G = psd_log_barrier_gradient(Z);
      const double h = 1e-5;
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j <= i; ++j) {
          Matrix E = Matrix::Zero(d, d);
          E(i, j) = E(j, i) = h;
          const double fd = (psd_log_barrier(Z + E) - psd_log_barrier(Z - E)) / (2.0 * h);
          worst = std::max(worst, std::abs(fd - (i == j ? G(i, j) : 2.0 * G(i, j))));
        }
    }
    rec.le("phi_gradient_fd.max_entry_error", worst, 1e-6);
  });

  rec.guarded("mc_psd_integral", [&] {
    const McEstimate one = mc_psd_integral(Matrix::Identity(1, 1), cfg.psd_samples, cfg.seed);
    rec.le("mc_psd_integral.d=1.Z=1.sigmas", std::abs(one.estimate - 1.0) / one.std_error, 3.0);
    const McEstimate two = mc_psd_integral(Matrix::Identity(2, 2), cfg.psd_samples, cfg.seed + 1);
    rec.le("mc_psd_integral.d=2.Z=I.sigmas", std::abs(two.estimate - std::numbers::pi / 2.0) / two.std_error, 3.0);
    Matrix Z = Matrix::Identity(2, 2);
    Z(0, 0) = 2.0;
    const McEstimate diag = mc_psd_integral(Z, cfg.psd_samples, cfg.seed + 2);
    rec.le("mc_psd_integral.d=2.Z=diag(2,1).sigmas",
           std::abs(diag.estimate - std::exp(c2) * std::pow(2.0, -1.5)) / diag.std_error, 3.0);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Index d = k < 2 ? 1 : 2;
      const Matrix R = fixtures::random_pd(200 + static_cast<std::uint64_t>(k), d);
      const McEstimate e = mc_psd_integral(R, cfg.psd_samples / 4, cfg.seed + 10 + static_cast<std::uint64_t>(k));
      worst = std::max(worst, std::abs(e.estimate - std::exp(psd_log_barrier(R))) / e.std_error);
    }
    rec.le("mc_psd_integral.random5.max_sigmas", worst, 3.0);
    rec.raises("mc_psd_integral.d=4.dimension_unsupported", Errc::dimension_unsupported,
               [&] { mc_psd_integral(Matrix::Identity(4, 4), 10, 1); });
  });
  return std::move(rec.checks());
}

// ---------------------------------------------------------------------------

inline std::vector<Check> oracles_suite(const Config& cfg) {
  Recorder rec("oracles");
  const LPInstance e1 = fixtures::e1(1.0);
  const MaxentProblem p1 = lp_maxent_problem(e1);

  rec.guarded("sampling", [&] {
    Vector c(2);
    c << 1.0, 2.0;
    const SampleBatch batch = sample_orthant_exponential(c, cfg.mc_samples, cfg.seed);
    double worst = 0.0;
    for (Index j = 0; j < 2; ++j) {
      MeanAccumulator acc;
      for (Index i = 0; i < batch.points.rows(); ++i) acc.push(batch.points(i, j));
      const McEstimate e = acc.result();
      worst = std::max(worst, std::abs(e.estimate - 1.0 / c(j)) / e.std_error);
    }
    rec.le("sample_orthant_exponential.mean.sigmas", worst, 3.0);
    rec.le("sample_orthant_exponential.n=0.rows", static_cast<double>(sample_orthant_exponential(c, 0, 1).points.rows()), 0.0);
    rec.raises("sample_orthant_exponential.invalid_rate", Errc::invalid_rate,
               [&] { sample_orthant_exponential(Vector((Vector(2) << 0.0, 1.0).finished()), 10, 1); });

    const SampleBatch again = sample_orthant_exponential(c, 1000, cfg.seed);
    const SampleBatch first = sample_orthant_exponential(c, 1000, cfg.seed);
    const bool identical = first.points == again.points && first.generator_id == again.generator_id;
    rec.add("reproducibility.batch_bit_identical", identical, identical ? 1.0 : 0.0, 1.0);
    const McEstimate m1 = mc_mgf(first, p1, vec1(0.5)), m2 = mc_mgf(again, p1, vec1(0.5));
    const bool same = m1.estimate == m2.estimate && m1.std_error == m2.std_error;
    rec.add("reproducibility.mc_estimate_identical", same, same ? 1.0 : 0.0, 1.0);
  });

  rec.guarded("mgf", [&] {
    const SampleBatch batch = sample_reference(p1, cfg.mc_samples, cfg.seed + 3);
    const McEstimate z0 = mc_mgf(batch, p1, vec1(0.0));
    rec.le("mc_mgf.e1.lambda=0.error", std::abs(z0.estimate - 1.0), 1e-12);
    const McEstimate z5 = mc_mgf(batch, p1, vec1(0.5));
    rec.le("mc_mgf.e1.lambda=0.5.sigmas", std::abs(z5.estimate - 8.0 / 3.0) / z5.std_error, 3.0);
    rec.raises("mc_mgf.e1.lambda=1.5.domain_violation", Errc::domain_violation, [&] { mc_mgf(batch, p1, vec1(1.5)); });

    int covered = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      const SampleBatch b = sample_reference(p1, cfg.coverage_samples, cfg.seed * 1000 + k);
      if (mc_mgf(b, p1, vec1(0.5)).within(8.0 / 3.0)) ++covered;
    }
    rec.ge("mc_mgf.coverage.e1.lambda=0.5.of100", covered, 97.0);
  });

  rec.guarded("finite_diff", [&] {
    auto f = [&](const Vector& l) { return log_partition(p1, l); };
    auto g = [&](const Vector& l) { return log_partition_derivatives(p1, l).gradient; };
    rec.le("finite_diff.e1.lambda=0", finite_diff_check(f, g, vec1(0.0), 1e-5), 1e-8);
    rec.raises("finite_diff.e1.lambda=0.999999.step_too_large", Errc::step_too_large,
               [&] { finite_diff_check(f, g, vec1(0.999999), 1e-5); });
    // φ on packed (Z11, Z21, Z22); the off-diagonal coordinate enters twice.
    auto phi = [](const Vector& v) { return psd_log_barrier(unpack_lower(v)); };
    auto dphi = [](const Vector& v) {
      const Matrix G = psd_log_barrier_gradient(unpack_lower(v));
      Vector out(3);
      out << G(0, 0), 2.0 * G(1, 0), G(1, 1);
      return out;
    };
    rec.le("finite_diff.phi.d=2.Z=I", finite_diff_check(phi, dphi, pack_lower(Matrix::Identity(2, 2)), 1e-5), 1e-6);
  });
  return std::move(rec.checks());
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"core", "fiber", "lp", "sdp", "oracles"};
  return names;
}

inline bool is_suite(const std::string& name) {
  return name == "all" || std::find(suite_names().begin(), suite_names().end(), name) != suite_names().end();
}

inline std::vector<Check> run_suite(const std::string& name, const Config& cfg) {
  if (name == "core") return core_suite(cfg);
  if (name == "fiber") return fiber_suite(cfg);
  if (name == "lp") return lp_suite(cfg);
  if (name == "sdp") return sdp_suite(cfg);
  if (name == "oracles") return oracles_suite(cfg);
  if (name == "all") {
    std::vector<Check> all;
    for (const auto& s : suite_names()) {
      auto part = run_suite(s, cfg);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  fail(Errc::invalid_argument, "unknown suite '" + name + "'");
}

inline bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

inline nlohmann::ordered_json report_json(const std::string& suite, const Config& cfg, const std::vector<Check>& checks) {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["seed"] = cfg.seed;
  j["generator"] = std::string(CounterRng::kGeneratorId);
  std::size_t passed = 0;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["suite"] = c.suite;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["measured"] = c.measured;
    e["threshold"] = c.threshold;
    arr.push_back(std::move(e));
    passed += c.pass ? 1 : 0;
  }
  j["passed"] = passed;
  j["failed"] = checks.size() - passed;
  j["checks"] = std::move(arr);
  return j;
}

}  // namespace cramer::verify
