#include <gtest/gtest.h>

#include <cmath>

#include "cramer/cramer.hpp"
#include "cramer/fixtures.hpp"

namespace {

using namespace cramer;

Vector v1(double x) { return Vector::Constant(1, x); }

double v_e1(double y) { return 2.0 * (std::exp(-y) - std::exp(-2.0 * y)); }

template <class F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

TEST(NullSpaceFrame, OneDimensionalFiber) {
  Matrix A(1, 2);
  A << 1, 1;
  const FiberFrame fr = null_space_frame(A, v1(1.0));
  ASSERT_EQ(fr.frame.cols(), 1);
  EXPECT_NEAR(std::abs(fr.frame(0, 0)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(fr.frame(0, 0), -fr.frame(1, 0), 1e-15);
  EXPECT_NEAR(fr.base_point.sum(), 1.0, 1e-15);
}

TEST(NullSpaceFrame, PointFiberAndRankDeficiency) {
  Vector y(2);
  y << 1.0, 0.0;
  const FiberFrame fr = null_space_frame(Matrix::Identity(2, 2), y);
  EXPECT_EQ(fr.frame.cols(), 0);
  EXPECT_NEAR((fr.base_point - y).norm(), 0.0, 1e-15);
  Matrix dup(2, 2);
  dup << 1, 1, 2, 2;
  EXPECT_EQ(error_code([&] { null_space_frame(dup, y); }), Errc::rank_deficient);
}

TEST(NullSpaceFrame, Invariants) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LPInstance inst = fixtures::random_lp(seed, 5, 2);
    const FiberFrame fr = null_space_frame(inst.A, inst.y);
    EXPECT_LE((inst.A * fr.frame).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((fr.frame.transpose() * fr.frame - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((inst.A * fr.base_point - inst.y).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(DividedDifference, MatchesClosedForms) {
  EXPECT_NEAR(exp_divided_difference({0.7}), std::exp(0.7), 1e-15);
  for (double gap : {1e-12, 1e-8, 1e-4, 0.3, 0.99, 1.5, 7.0}) {
    const double a = -0.4, b = a + gap;
    EXPECT_NEAR(exp_divided_difference({a, b}) / (std::exp(a) * std::expm1(gap) / gap), 1.0, 2e-15) << gap;
  }
  // exp[0,0,0] = 1/2, exp[a,a,a] = e^a/2
  EXPECT_NEAR(exp_divided_difference({0.0, 0.0, 0.0}), 0.5, 1e-16);
  // three distinct nodes against the explicit formula
  const double a = 0.1, b = 0.9, c = 2.5;
  const double explicit_dd =
      std::exp(a) / ((a - b) * (a - c)) + std::exp(b) / ((b - a) * (b - c)) + std::exp(c) / ((c - a) * (c - b));
  EXPECT_NEAR(exp_divided_difference({c, a, b}), explicit_dd, 1e-14);
}

TEST(ExpOverSimplex, TriangleMatchesQuadrature) {
  const std::vector<Vector> tri{(Vector(2) << 0.0, 0.0).finished(), (Vector(2) << 2.0, 0.0).finished(),
                                (Vector(2) << 0.5, 1.5).finished()};
  Vector g(2);
  g << -0.8, 0.6;
  // Duffy-free check: map the unit triangle and integrate by tensor Gauss-Legendre.
  const GaussRule rule = gauss_legendre(30);
  double ref = 0.0;
  const Matrix J = (Matrix(2, 2) << tri[1] - tri[0], tri[2] - tri[0]).finished();
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double u = 0.5 * (rule.nodes[i] + 1.0), w = 0.5 * (rule.nodes[j] + 1.0);
      const Vector p = tri[0] + J * (Vector(2) << u, (1.0 - u) * w).finished();
      ref += 0.25 * rule.weights[i] * rule.weights[j] * (1.0 - u) * std::exp(g.dot(p));
    }
  ref *= std::abs(J.determinant());
  EXPECT_NEAR(exp_over_simplex(tri, g, 0.0), ref, 1e-13);
}

TEST(FiberDensityQuadrature, E1Examples) {
  const LPInstance e1 = fixtures::e1();
  EXPECT_NEAR(fiber_density_quadrature(e1.A, e1.c, v1(1.0)), 0.4650883158696593, 1e-15);
  EXPECT_NEAR(fiber_density_quadrature(e1.A, e1.c, v1(1.0)) / v_e1(1.0), 1.0, 1e-14);
  EXPECT_EQ(fiber_density_quadrature(e1.A, e1.c, v1(-1.0)), 0.0);
}

TEST(FiberDensityQuadrature, ErrorsAndEdgeCases) {
  EXPECT_EQ(error_code([&] { fiber_density_quadrature(Matrix::Ones(1, 4), Vector::Ones(4), v1(1.0)); }),
            Errc::codim_unsupported);
  const LPInstance e1 = fixtures::e1();
  EXPECT_EQ(error_code([&] { fiber_density_quadrature(e1.A, e1.c, v1(0.0)); }), Errc::degenerate_fiber);
  EXPECT_EQ(error_code([&] { fiber_density_quadrature(e1.A, Vector((Vector(2) << 1.0, 0.0).finished()), v1(1.0)); }),
            Errc::invalid_argument);
  // A = [1, −1]: each fiber is a half-line and v(y) = e^{−|y|}·c1c2/(c1+c2)·(…) integrates to 1
  Matrix A(1, 2);
  A << 1.0, -1.0;
  Vector c(2);
  c << 1.0, 2.0;
  // x1 − x2 = y: v(y) = (2/3) e^{−y} for y ≥ 0 and (2/3) e^{2y} for y < 0
  EXPECT_NEAR(fiber_density_quadrature(A, c, v1(0.5)), 2.0 / 3.0 * std::exp(-0.5), 1e-14);
  EXPECT_NEAR(fiber_density_quadrature(A, c, v1(-0.5)), 2.0 / 3.0 * std::exp(-1.0), 1e-14);
}

TEST(FiberDensityQuadrature, UnboundedTwoDimensionalFiber) {
  Matrix A(1, 3);
  A << 1.0, -1.0, 0.0;
  EXPECT_EQ(error_code([&] { fiber_density_quadrature(A, Vector::Ones(3), v1(1.0)); }), Errc::unbounded_fiber);
}

TEST(FiberDensityQuadrature, TwoDimensionalFiberMatchesIndependentFormula) {
  // A = [1,1,1], c = (1,2,3): v(y) = s Σ_i e^{−c_i y}/Π_{k≠i}(c_k − c_i)
  Matrix A(1, 3);
  A << 1, 1, 1;
  Vector c(3);
  c << 1.0, 2.0, 3.0;
  for (double y : {0.3, 1.0, 2.7}) {
    const double exact = 6.0 * (std::exp(-y) / 2.0 - std::exp(-2.0 * y) + std::exp(-3.0 * y) / 2.0);
    EXPECT_NEAR(fiber_density_quadrature(A, c, v1(y)) / exact, 1.0, 1e-12) << y;
  }
}

TEST(FiberDensityQuadrature, FrameInvariance) {
  const LPInstance pos = fixtures::random_lp_positive(6, 4, 2);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
  perm.indices() << 3, 1, 0, 2;
  const double a = fiber_density_quadrature(pos.A, pos.c, pos.y);
  const double b = fiber_density_quadrature(pos.A * perm, perm.transpose() * pos.c, pos.y);
  EXPECT_NEAR(a / b, 1.0, 1e-10);
}

TEST(PushforwardHistogram, MatchesQuadratureNearOne) {
  const MaxentProblem p = lp_maxent_problem(fixtures::e1());
  HistogramGrid grid{{{0.95, 1.05, 1}}};
  const DensityEstimate h = pushforward_histogram(p, 1'000'000, grid, 42);
  ASSERT_TRUE(h.std_errors.has_value());
  EXPECT_NEAR(h.values[0], v_e1(1.0), 3.0 * (*h.std_errors)[0]);
  EXPECT_EQ(h.method, DensityMethod::mc_histogram);
}

TEST(PushforwardHistogram, NegativeBinIsExactlyZeroAndMassIsOne) {
  const MaxentProblem p = lp_maxent_problem(fixtures::e1());
  EXPECT_EQ(pushforward_histogram(p, 1'000'000, HistogramGrid{{{-1.0, 0.0, 1}}}, 42).values[0], 0.0);
  const DensityEstimate w = pushforward_histogram(p, 1'000'000, HistogramGrid{{{0.0, 10.0, 100}}}, 43);
  double mass = 0.0;
  for (double v : w.values) mass += 0.1 * v;
  EXPECT_NEAR(mass, 1.0, 3.0 * std::sqrt(1e-6) + 5e-4);
}

TEST(PushforwardHistogram, Preconditions) {
  const MaxentProblem p = lp_maxent_problem(fixtures::e1());
  HistogramGrid grid{{{0.0, 1.0, 4}}};
  EXPECT_EQ(error_code([&] { pushforward_histogram(p, 100, grid, 1); }), Errc::invalid_argument);
  EXPECT_EQ(error_code([&] { pushforward_histogram(sdp_maxent_problem(fixtures::e2()), 10'000, grid, 1); }),
            Errc::sampling_unsupported);
}

TEST(PushforwardHistogram, BoxBackendAgreesWithClosedForm) {
  // uniform on [0,1]^2, h = x1 + x2: triangular density
  const MaxentProblem p = make_box_problem({{0.0, 1.0}, {0.0, 1.0}}, BoxDensity::uniform, BoxMap::sum, v1(1.0));
  HistogramGrid grid{{{0.0, 2.0, 20}}};
  const DensityEstimate h = pushforward_histogram(p, 200'000, grid, 9);
  const DensityEstimate exact = bin_averaged_density(grid, [](const Vector& y) { return 1.0 - std::abs(y(0) - 1.0); },
                                                     DensityMethod::quadrature);
  int within = 0;
  for (std::size_t b = 0; b < h.values.size(); ++b)
    if (std::abs(h.values[b] - exact.values[b]) <= 3.0 * (*h.std_errors)[b]) ++within;
  EXPECT_GE(within, 19);
}

TEST(Coarea, E1TestFunctions) {
  const MaxentProblem p = lp_maxent_problem(fixtures::e1());
  const CoareaCheck one = coarea_residual(p, {TestFunctionKind::constant_one, {}});
  EXPECT_NEAR(one.lhs, 1.0, 0.0);
  EXPECT_LE(one.residual, 1e-6);
  const CoareaCheck lin = coarea_residual(p, {TestFunctionKind::linear, v1(1.0)});
  EXPECT_NEAR(lin.lhs, 1.5, 1e-15);
  EXPECT_LE(lin.residual, 1e-6);
  const CoareaCheck ex = coarea_residual(p, {TestFunctionKind::exponential, v1(0.5)});
  EXPECT_NEAR(ex.lhs, 8.0 / 3.0, 1e-14);
  EXPECT_LE(ex.residual, 1e-5);
}

TEST(Coarea, TwoDimensionalMomentSpace) {
  const LPInstance pos = fixtures::random_lp_positive(5, 4, 2);
  const MaxentProblem p = lp_maxent_problem(pos);
  EXPECT_LE(coarea_residual(p, {TestFunctionKind::constant_one, {}}).residual, 1e-6);
  Vector w(2);
  w << 0.3, -0.2;
  EXPECT_LE(coarea_residual(p, {TestFunctionKind::linear, w}).residual, 1e-6);
}

TEST(Coarea, RejectsUnsupportedCodimension) {
  const MaxentProblem p = lp_maxent_problem(fixtures::random_lp(3, 5, 2));
  EXPECT_EQ(error_code([&] { coarea_residual(p, {TestFunctionKind::constant_one, {}}); }), Errc::codim_unsupported);
}

TEST(LaplaceTransform, MatchesPartitionFunctionOnGrid) {
  const LPInstance e1 = fixtures::e1();
  const MaxentProblem p = lp_maxent_problem(e1);
  for (int k = 0; k < 20; ++k) {
    const double lam = -1.0 + 1.9 * (k + 0.5) / 20.0;
    const double quad = moment_space_integral(e1.A, e1.c, TestFunction{TestFunctionKind::exponential, v1(lam)});
    EXPECT_NEAR(quad / std::exp(log_partition(p, v1(lam))), 1.0, 1e-6) << lam;
  }
}

}  // namespace
