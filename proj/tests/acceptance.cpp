// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "cramer/cramer.hpp"
#include "cramer/fixtures.hpp"
#include "cramer/verify.hpp"

namespace {

using namespace cramer;
using verify::rel_err;
using verify::vec1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1. Barrier/perspective identity on E1 and five random LP instances.
Outcome identity_lp() {
  std::vector<LPInstance> instances{fixtures::e1()};
  for (const auto& inst : verify::identity_lp_instances()) {
    if (inst.d() > 5 || inst.m() > 3) return {false, "random instance exceeds d <= 5, m <= 3"};
    instances.push_back(inst);
  }
  double worst = 0.0;
  for (const auto& inst : instances) {
    const auto rows = theorem_lp_identity_report(inst, verify::identity_eps());
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) worst = std::max(worst, rows[i].residual);
  }
  return {worst <= 1e-8, fmt("max residual %.3g over 6 instances x 5 eps (tol 1e-8)", worst)};
}

// 2. Barrier dual bound against the vertex oracle and the central-path certificate.
Outcome barrier_to_lp() {
  std::vector<LPInstance> instances{fixtures::e1()};
  for (const auto& inst : verify::identity_lp_instances()) instances.push_back(inst);
  double excess = -std::numeric_limits<double>::infinity(), cert = 0.0;
  for (const auto& inst : instances) {
    const double tau = lp_vertex_oracle(inst).tau;
    const double d = static_cast<double>(inst.d());
    for (double eps : verify::identity_eps()) {
      const BarrierSolution b = barrier_dual_solve(inst, eps);
      const double dual = b.lambda.dot(inst.y);
      excess = std::max(excess, std::abs(dual - tau) - eps * d);
      cert = std::max(cert, std::abs(inst.c.dot(b.x) - dual - eps * d));
    }
  }
  return {excess <= 1e-8 && cert <= 1e-8,
          fmt("max(|<l,y> - tau| - eps d) = %.3g, certificate error %.3g (tol 1e-8)", excess, cert)};
}

// 3. Brion-Vergne, quadrature and pushforward histogram on E1.
Outcome three_way() {
  const LPInstance e1 = fixtures::e1();
  const double bv = brion_vergne_density(enumerate_feasible_bases(e1), e1);
  const double quad = fiber_density_quadrature(e1.A, e1.c, e1.y);
  const double exact = 2.0 * (std::exp(-1.0) - std::exp(-2.0));
  const double point = std::max(rel_err(bv, quad), rel_err(quad, exact));

  const HistogramGrid grid{{{0.0, 6.0, 60}}};
  const DensityEstimate hist = pushforward_histogram(lp_maxent_problem(e1), 1'000'000, grid, 42);
  const DensityEstimate avg = bin_averaged_density(
      grid, [&](const Vector& y) { return fiber_density_quadrature(e1.A, e1.c, y); }, DensityMethod::quadrature);
  std::size_t within = 0;
  for (std::size_t b = 0; b < hist.values.size(); ++b)
    if (std::abs(hist.values[b] - avg.values[b]) <= 3.0 * (*hist.std_errors)[b]) ++within;
  const double fraction = static_cast<double>(within) / static_cast<double>(hist.values.size());

  const double mass_err = coarea_residual(lp_maxent_problem(e1), {TestFunctionKind::constant_one, {}}).residual;
  return {point <= 1e-8 && fraction >= 0.95 && mass_err <= 1e-6,
          fmt("BV vs quadrature rel %.3g, histogram bins within 3se %.3f, |int v - 1| = %.3g", point, fraction,
              mass_err)};
}

// 4. Laplace transform of v against Z, and Θ from ln Z against the Cramér transform of v.
Outcome laplace_and_cramer() {
  const LPInstance e1 = fixtures::e1();
  const MaxentProblem p = lp_maxent_problem(e1);
  auto laplace = [&](double lam) {
    return moment_space_integral(e1.A, e1.c, TestFunction{TestFunctionKind::exponential, vec1(lam)});
  };
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double lam = -1.0 + 1.9 * (k + 0.5) / 20.0;
    worst = std::max(worst, rel_err(laplace(lam), std::exp(log_partition(p, vec1(lam)))));
  }
  // second path: golden-section maximization of λy − ln(Laplace transform of v)
  double spot = 0.0;
  for (double y : {0.5, 1.0, 1.5, 3.0}) {
    const double theta_dual = solve_dual(p.with_target(vec1(y))).theta;
    auto objective = [&](double lam) { return lam * y - std::log(laplace(lam)); };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = -10.0, hi = 0.99;
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = objective(a), fb = objective(b);
    while (hi - lo > 1e-9) {
      if (fa < fb) {
        lo = a;
        a = b;
        fa = fb;
        b = lo + phi * (hi - lo);
        fb = objective(b);
      } else {
        hi = b;
        b = a;
        fb = fa;
        a = hi - phi * (hi - lo);
        fa = objective(a);
      }
    }
    spot = std::max(spot, std::abs(objective(0.5 * (lo + hi)) - theta_dual));
  }
  return {worst <= 1e-6 && spot <= 1e-8,
          fmt("Laplace vs Z max rel %.3g on 20 lambdas, Theta two-path max diff %.3g", worst, spot)};
}

// 5. PSD integral constant, SDP identity and the ε-rate on E2.
Outcome sdp() {
  const McEstimate mc = mc_psd_integral(Matrix::Identity(2, 2), 10'000'000, 42);
  const double sigmas = std::abs(mc.estimate - std::numbers::pi / 2.0) / mc.std_error;
  const SDPInstance e2 = fixtures::e2();
  double residual = 0.0;
  for (const auto& r : theorem_sdp_identity_report(e2, {1.0, 0.1, 0.01})) residual = std::max(residual, r.residual);
  double rate_excess = -std::numeric_limits<double>::infinity();
  for (double eps : {1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001}) {
    const double tau_eps = sdp_barrier_dual_solve(e2, eps).value;
    rate_excess = std::max(rate_excess, std::abs(tau_eps - 3.0) - verify::e2_rate_bound(eps));
  }
  // the bound is attained with equality on E2, so only rounding-level excess is allowed
  return {sigmas <= 3.0 && residual <= 1e-8 && rate_excess <= 1e-12,
          fmt("MC(1e7) %.2f se from pi/2, identity residual %.3g, rate excess %.3g", sigmas, residual, rate_excess)};
}

// 6. Finite-difference, KL nonnegativity and Θ(mean) = 0 on all backends.
Outcome solver_health() {
  verify::Config cfg;
  std::size_t total = 0, failed = 0;
  for (const auto& c : verify::run_suite("core", cfg)) {
    const bool relevant = c.name.rfind("gradient_fd.", 0) == 0 || c.name.rfind("hessian_fd.", 0) == 0 ||
                          c.name.rfind("hessian_psd.", 0) == 0 || c.name.rfind("kl_nonnegative.", 0) == 0 ||
                          c.name.rfind("theta_at_mean.", 0) == 0 || c.name.rfind("converged.", 0) == 0;
    if (!relevant) continue;
    ++total;
    if (!c.pass) ++failed;
  }
  for (const auto& c : verify::run_suite("sdp", cfg))
    if (c.name.rfind("phi_gradient_fd", 0) == 0) {
      ++total;
      if (!c.pass) ++failed;
    }
  return {failed == 0 && total >= 19, fmt("%.0f of %.0f property checks pass (lp, sdp, box)", double(total - failed),
                                          double(total))};
}

// 7. Partial-fraction Z on E1 and three random m = 1 instances.
Outcome partial_fractions() {
  double worst = verify::partial_fraction_error(fixtures::e1());
  for (const auto& inst : verify::partial_fraction_instances()) {
    if (inst.d() > 6 || inst.m() != 1) return {false, "random instance exceeds d <= 6, m = 1"};
    worst = std::max(worst, verify::partial_fraction_error(inst));
  }
  return {worst <= 1e-10, fmt("max relative error %.3g on 4 x 50 lambdas (tol 1e-10)", worst)};
}

// 8. Two runs of the full verification report are byte-identical.
Outcome determinism() {
  verify::Config cfg;
  cfg.seed = 42;
  const std::string a = verify::report_json("all", cfg, verify::run_suite("all", cfg)).dump(2);
  const std::string b = verify::report_json("all", cfg, verify::run_suite("all", cfg)).dump(2);
  return {a == b, "two reports of " + std::to_string(a.size()) + " bytes " + (a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 barrier/perspective LP identity", identity_lp},
      {"2 barrier convergence to LP", barrier_to_lp},
      {"3 three-way fiber density", three_way},
      {"4 Laplace transform and Cramer transform", laplace_and_cramer},
      {"5 SDP constant, identity and rate", sdp},
      {"6 solver health", solver_health},
      {"7 partial-fraction Z (m = 1)", partial_fractions},
      {"8 determinism of verify reports", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
