// cramer_bridge: solve, sweep, density and verify front end.
//
// Exit codes: 0 success, 1 input error, 2 numerical non-convergence or a
// residual above tolerance.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cramer/cramer.hpp"
#include "cramer/problem_io.hpp"
#include "cramer/report.hpp"
#include "cramer/verify.hpp"

namespace {

using namespace cramer;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::not_converged:
    case Errc::unbounded:
      return kExitNumeric;
    default:
      return kExitInput;
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) fail(Errc::invalid_argument, "cannot write '" + out_path + "'");
  out << text;
}

int run_solve(const std::string& path, const std::string& out_path) {
  const ProblemFile pf = load_problem(path);
  const DualResult r = solve_dual(pf.problem, pf.solver);
  emit(to_json(r).dump(2) + "\n", out_path);
  return r.status == DualStatus::converged ? kExitOk : kExitNumeric;
}

int run_sweep(const std::string& path, const std::vector<double>& eps, double tol, const std::string& out_path) {
  const ProblemFile pf = load_problem(path);
  if (pf.kind != "lp" && pf.kind != "sdp") {
    std::cerr << "sweep requires lp or sdp\n";
    return kExitInput;
  }
  for (double e : eps)
    if (!(e > 0.0)) fail(Errc::invalid_argument, "--eps values must be > 0");
  const std::vector<IdentityRow> rows =
      pf.lp ? theorem_lp_identity_report(*pf.lp, eps, pf.solver) : theorem_sdp_identity_report(*pf.sdp, eps, pf.solver);
  emit(identity_rows_csv(rows), out_path);
  for (const auto& r : rows)
    if (!(r.residual <= tol)) return kExitNumeric;
  return kExitOk;
}

HistogramAxis parse_axis(const std::string& text) {
  HistogramAxis axis;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> axis.lo >> c1 >> axis.hi >> c2 >> axis.bins) || c1 != ':' || c2 != ':' || !in.eof())
    fail(Errc::invalid_argument, "grid axis must look like lo:hi:bins, got '" + text + "'");
  return axis;
}

int run_density(const std::string& path, const std::vector<std::string>& axes, const std::string& method,
                std::size_t samples, std::uint64_t seed, const std::string& out_path) {
  const ProblemFile pf = load_problem(path);
  HistogramGrid grid;
  for (const auto& a : axes) grid.axes.push_back(parse_axis(a));
  grid.validate();
  DensityEstimate est;
  if (method == "mc-histogram") {
    est = pushforward_histogram(pf.problem, samples, grid, seed);
  } else {
    if (!pf.lp) fail(Errc::invalid_argument, "method '" + method + "' requires an lp problem");
    if (static_cast<std::size_t>(pf.lp->m()) != grid.axes.size()) fail(Errc::invalid_argument, "grid dimension must equal m");
    const LPInstance& inst = *pf.lp;
    if (method == "quadrature") {
      est = bin_averaged_density(
          grid, [&](const Vector& y) { return fiber_density_quadrature(inst.A, inst.c, y); }, DensityMethod::quadrature);
    } else if (method == "brion-vergne") {
      est = bin_averaged_density(
          grid,
          [&](const Vector& y) {
            LPInstance at = inst;
            at.y = y;
            return brion_vergne_density(enumerate_feasible_bases(at), at);  // empty catalog outside the cone
          },
          DensityMethod::brion_vergne);
    } else {
      fail(Errc::invalid_argument, "unknown method '" + method + "'");
    }
  }
  emit(density_csv(est), out_path);
  return kExitOk;
}

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
  if (!verify::is_suite(suite)) {
    std::cerr << "unknown suite '" << suite << "' (expected core, fiber, lp, sdp, oracles or all)\n";
    return kExitInput;
  }
  verify::Config cfg;
  cfg.seed = seed;
  const auto checks = verify::run_suite(suite, cfg);
  emit(verify::report_json(suite, cfg, checks).dump(2) + "\n", out_path);
  return verify::all_pass(checks) ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KL-maxent / LP / SDP barrier bridge"};
  app.require_subcommand(1);

  std::string path, out_path, suite = "all", method = "quadrature";
  std::vector<double> eps;
  std::vector<std::string> axes;
  double tol = 1e-8;
  std::uint64_t seed = 42;
  std::size_t samples = 1'000'000;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "random seed")->envname("CRAMER_BRIDGE_SEED")->capture_default_str();
  };

  auto* solve = app.add_subcommand("solve", "solve the maxent dual and print the result as JSON");
  solve->add_option("problem", path, "problem file")->required();
  solve->add_option("--out", out_path, "output file (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "barrier/perspective identity report as CSV");
  sweep->add_option("problem", path, "problem file")->required();
  sweep->add_option("--eps", eps, "epsilon values")->required()->delimiter(',');
  sweep->add_option("--tol", tol, "residual tolerance")->capture_default_str();
  sweep->add_option("--out", out_path, "output CSV (default stdout)");

  auto* density = app.add_subcommand("density", "fiber density on a grid as CSV");
  density->add_option("problem", path, "problem file")->required();
  density->add_option("--grid", axes, "axis lo:hi:bins, once per moment")->required();
  density->add_option("--method", method, "quadrature | brion-vergne | mc-histogram")->capture_default_str();
  density->add_option("--samples", samples, "samples for mc-histogram")->capture_default_str();
  density->add_option("--out", out_path, "output CSV (default stdout)");
  add_seed(density);

  auto* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  verify_cmd->add_option("--suite", suite, "core | fiber | lp | sdp | oracles | all")->capture_default_str();
  verify_cmd->add_option("--out", out_path, "output JSON (default stdout)");
  add_seed(verify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve) return run_solve(path, out_path);
    if (*sweep) return run_sweep(path, eps, tol, out_path);
    if (*density) return run_density(path, axes, method, samples, seed, out_path);
    if (*verify_cmd) return run_verify(suite, seed, out_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
