#include <gtest/gtest.h>

#include <cmath>

#include "cramer/cramer.hpp"
#include "cramer/fixtures.hpp"
#include "cramer/verify.hpp"

namespace {

using namespace cramer;

Vector v1(double x) { return Vector::Constant(1, x); }

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

TEST(Normalization, ShiftRecoversOriginalObjective) {
  Matrix A(1, 2);
  A << 1, 1;
  Vector c(2);
  c << -1.0, 2.0;
  const LPInstance inst = normalize_instance(A, c, v1(3.0), v1(-2.0));
  EXPECT_NEAR(inst.c(0), 1.0, 0.0);
  EXPECT_NEAR(inst.c(1), 4.0, 0.0);
  EXPECT_DOUBLE_EQ(inst.s, 4.0);
  EXPECT_NEAR(lp_vertex_oracle(inst).tau + inst.objective_shift, -3.0, 1e-14);
}

TEST(Normalization, SearchFindsInteriorOrReportsNone) {
  Matrix A(1, 2);
  A << 1, 1;
  Vector c(2);
  c << -1.0, 2.0;
  const LPInstance inst = normalize_instance(A, c, v1(3.0));
  EXPECT_TRUE((inst.c.array() > 0.0).all());
  Matrix B(1, 2);
  B << 1, -1;
  Vector bad(2);
  bad << -1.0, -1.0;  // λ < −1 and −λ < −1 cannot both hold
  EXPECT_EQ(error_code([&] { normalize_instance(B, bad, v1(0.0)); }), Errc::no_interior_dual);
}

TEST(VertexOracle, E1AndInfeasible) {
  const VertexSolution v = lp_vertex_oracle(fixtures::e1());
  EXPECT_DOUBLE_EQ(v.tau, 1.0);
  EXPECT_DOUBLE_EQ(v.x_star(0), 1.0);
  EXPECT_EQ(v.feasible_vertices, 2u);
  EXPECT_EQ(error_code([&] { lp_vertex_oracle(fixtures::e1(-1.0)); }), Errc::infeasible);
}

TEST(BarrierDual, E1CentralPathAndStrongDuality) {
  const LPInstance e1 = fixtures::e1();
  const double d = static_cast<double>(e1.d());
  for (double eps : {1.0, 0.1, 0.01}) {
    const BarrierSolution b = barrier_dual_solve(e1, eps);
    EXPECT_NEAR((e1.A * b.x - e1.y).cwiseAbs().maxCoeff(), 0.0, 1e-8) << eps;
    // primal barrier min <c,x> − ε Σ ln x_j over the fiber; its Lagrange dual is the barrier value + εd − εd ln ε
    const double primal = e1.c.dot(b.x) - eps * b.x.array().log().sum();
    EXPECT_NEAR(b.value, primal - eps * d + eps * d * std::log(eps), 1e-7) << eps;
  }
}

TEST(BarrierDual, UnboundedOutsideCone) {
  EXPECT_EQ(error_code([&] { barrier_dual_solve(fixtures::e1(-1.0), 0.1); }), Errc::unbounded);
  EXPECT_EQ(error_code([&] { barrier_dual_solve(fixtures::e1(), 0.0); }), Errc::invalid_argument);
}

TEST(IdentityReport, E1Rows) {
  const std::vector<IdentityRow> rows = theorem_lp_identity_report(fixtures::e1(), {1.0, 0.1, 1e-4});
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(rows[i].residual, 1e-8) << rows[i].epsilon;
  EXPECT_NEAR(rows[1].tau_eps, 0.6797085503762411, 1e-13);
  const IdentityRow& limit = rows.back();
  EXPECT_EQ(limit.epsilon, 0.0);
  EXPECT_DOUBLE_EQ(limit.tau_eps, 1.0);
  EXPECT_LE(std::abs(rows[2].tau_eps - 1.0), 1e-3 * 2.0);
  EXPECT_LE(std::abs(limit.eps_theta - 1.0), 1e-4 * 2.0 + 1e-6);
  EXPECT_EQ(limit.residual, 0.0);
}

TEST(IdentityReport, RandomInstances) {
  for (const LPInstance& inst : verify::identity_lp_instances()) {
    const auto rows = theorem_lp_identity_report(inst, verify::identity_eps());
    for (const auto& r : rows) EXPECT_LE(r.residual, 1e-8) << "d=" << inst.d() << " eps=" << r.epsilon;
  }
}

TEST(BrionVergne, MatchesQuadratureInOneAndTwoDimensions) {
  const LPInstance e1 = fixtures::e1();
  const double bv = brion_vergne_density(enumerate_feasible_bases(e1), e1);
  EXPECT_NEAR(bv, 2.0 * (std::exp(-1.0) - std::exp(-2.0)), 1e-14);
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    const LPInstance inst = fixtures::random_lp_positive(seed, 4, 2);
    const PerturbedInstance p = perturb_if_degenerate(inst);
    const double q = fiber_density_quadrature(p.instance.A, p.instance.c, p.instance.y);
    EXPECT_NEAR(brion_vergne_density(p.catalog, p.instance) / q, 1.0, 1e-10) << seed;
  }
}

TEST(BrionVergne, DegenerateFiberIsPerturbed) {
  Matrix A(2, 3);
  A << 1, 0, 1, 0, 1, 1;
  Vector y(2);
  y << 0.0, 1.0;  // y is column 2 alone, so basis {1, 2} has x_1 = 0
  const LPInstance inst = normalize_instance(A, Vector::Ones(3), y);
  EXPECT_TRUE(enumerate_feasible_bases(inst).degenerate);
  EXPECT_EQ(error_code([&] { brion_vergne_density(enumerate_feasible_bases(inst), inst); }), Errc::degenerate_vertex);
  const PerturbedInstance p = perturb_if_degenerate(inst);
  EXPECT_TRUE(p.perturbed);
  EXPECT_FALSE(p.catalog.degenerate);
  EXPECT_NEAR((p.instance.y - y).cwiseAbs().maxCoeff(), 2e-7, 1e-20);
  const double q = fiber_density_quadrature(p.instance.A, p.instance.c, p.instance.y);
  EXPECT_NEAR(brion_vergne_density(p.catalog, p.instance) / q, 1.0, 1e-6);
}

TEST(BrionVergne, PerturbationAlongTheSameRayStaysDegenerate) {
  // y = (1,1) is parallel to A·1, so y + δ·A·1 keeps the degenerate vertex
  Matrix A(2, 3);
  A << 1, 0, 1, 0, 1, 1;
  const LPInstance inst = normalize_instance(A, Vector::Ones(3), Vector::Ones(2));
  EXPECT_EQ(error_code([&] { perturb_if_degenerate(inst); }), Errc::degenerate_vertex);
}

TEST(BrionVergne, NearPoleWhenReducedCostVanishes) {
  Matrix A(1, 2);
  A << 1, 1;
  const LPInstance inst = normalize_instance(A, Vector::Ones(2), v1(1.0));
  EXPECT_EQ(error_code([&] { brion_vergne_density(enumerate_feasible_bases(inst), inst); }), Errc::near_pole);
}

TEST(PartialFraction, E1ClosedForm) {
  const LPInstance e1 = fixtures::e1();
  const BasisCatalog cat = enumerate_feasible_bases(e1);
  for (double lam : {-3.0, -0.5, 0.0, 0.5, 0.9})
    EXPECT_NEAR(partial_fraction_Z(cat, e1, v1(lam)), 2.0 / ((1.0 - lam) * (2.0 - lam)), 1e-13) << lam;
}

TEST(PartialFraction, RandomInstancesMatchPartitionFunction) {
  for (const LPInstance& inst : verify::partial_fraction_instances())
    EXPECT_LE(verify::partial_fraction_error(inst), 1e-10) << "d=" << inst.d();
}

TEST(PartialFraction, NegativeHalfLine) {
  Matrix A(1, 2);
  A << -1, -2;
  const LPInstance inst = normalize_instance(A, Vector::Ones(2), v1(-1.0));
  const BasisCatalog cat = enumerate_feasible_bases(inst);
  // Z(λ) = 1/((1 + λ)(1 + 2λ)) for λ > −1/2
  for (double lam : {-0.3, 0.0, 2.0})
    EXPECT_NEAR(partial_fraction_Z(cat, inst, v1(lam)), 1.0 / ((1.0 + lam) * (1.0 + 2.0 * lam)), 1e-13) << lam;
}

TEST(PartialFraction, Errors) {
  const LPInstance e1 = fixtures::e1();
  const BasisCatalog cat = enumerate_feasible_bases(e1);
  EXPECT_EQ(error_code([&] { partial_fraction_Z(cat, e1, v1(1.5)); }), Errc::pole_violation);
  Matrix mixed(1, 2);
  mixed << 1, -1;
  const LPInstance m = normalize_instance(mixed, Vector::Ones(2), v1(0.5));
  EXPECT_EQ(error_code([&] { partial_fraction_Z(enumerate_feasible_bases(m), m, v1(0.0)); }), Errc::mixed_chamber);
  const LPInstance two = fixtures::random_lp_positive(4, 4, 2);
  EXPECT_EQ(error_code([&] { partial_fraction_Z(enumerate_feasible_bases(two), two, Vector::Zero(2)); }),
            Errc::unsupported_dimension);
}

}  // namespace
