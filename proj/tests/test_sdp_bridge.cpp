#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cramer/cramer.hpp"
#include "cramer/fixtures.hpp"

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

TEST(PsdBarrier, GammaConstants) {
  EXPECT_NEAR(multivariate_gamma_constant(1), 0.0, 1e-15);
  // Γ_2(3/2) = π^{1/2} Γ(3/2) Γ(1) = π/2
  EXPECT_NEAR(multivariate_gamma_constant(2), std::log(std::numbers::pi / 2.0), 1e-14);
  EXPECT_NEAR(psd_log_barrier(2.0 * Matrix::Identity(2, 2)), std::log(std::numbers::pi / 2.0) - 1.5 * std::log(4.0), 1e-14);
}

TEST(PsdBarrier, GradientMatchesFiniteDifference) {
  const Matrix Z = fixtures::random_pd(3, 3);
  const Matrix G = psd_log_barrier_gradient(Z);
  const double h = 1e-6;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j <= i; ++j) {
      Matrix E = Matrix::Zero(3, 3);
      E(i, j) = E(j, i) = 1.0;
      const double fd = (psd_log_barrier(Z + h * E) - psd_log_barrier(Z - h * E)) / (2.0 * h);
      EXPECT_NEAR(fd, trace_inner(G, E), 1e-7) << i << "," << j;
    }
}

TEST(SdpLogZ, E2ClosedForm) {
  const SDPInstance e2 = fixtures::e2();
  EXPECT_NEAR(e2.log_s, -std::log(std::numbers::pi / 2.0), 1e-14);
  for (double lam : {-2.0, 0.0, 0.5, 0.9}) EXPECT_NEAR(sdp_log_Z(e2, v1(lam)), -3.0 * std::log(1.0 - lam), 1e-13) << lam;
  EXPECT_NEAR(sdp_log_Z(e2, v1(0.5)), 2.0794415, 1e-7);
  EXPECT_EQ(error_code([&] { sdp_log_Z(e2, v1(1.0)); }), Errc::domain_violation);
}

TEST(SdpInstance, Validation) {
  EXPECT_EQ(error_code([&] {
              make_sdp_instance(Matrix::Identity(2, 2), {Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2)},
                                Vector::Ones(2));
            }),
            Errc::dependent_constraints);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_EQ(error_code([&] { make_sdp_instance(Matrix::Identity(2, 2), {asym}, v1(1.0)); }), Errc::invalid_argument);
  // shift: A0 = 0 is not PD, λ0 = −1 makes it I
  const SDPInstance shifted = make_sdp_instance(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)}, v1(3.0), v1(-1.0));
  EXPECT_NEAR((shifted.A0 - Matrix::Identity(2, 2)).norm(), 0.0, 0.0);
  EXPECT_EQ(error_code([&] { make_sdp_instance(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)}, v1(3.0)); }),
            Errc::not_positive_definite);
}

TEST(SdpBarrier, E2ClosedForm) {
  // ⟨λ,3⟩ − ε φ((1 − λ) I) is maximized at 1 − λ = ε; value 3 − 3ε + 3ε ln ε − ε C_2
  const SDPInstance e2 = fixtures::e2();
  const double c2 = multivariate_gamma_constant(2);
  for (double eps : {1.0, 0.1, 0.01}) {
    const BarrierSolution b = sdp_barrier_dual_solve(e2, eps);
    EXPECT_NEAR(b.lambda(0), 1.0 - eps, 1e-9) << eps;
    EXPECT_NEAR(b.value, 3.0 - 3.0 * eps + 3.0 * eps * std::log(eps) - eps * c2, 1e-9) << eps;
  }
  EXPECT_EQ(error_code([&] { sdp_barrier_dual_solve(fixtures::e2(-1.0), 0.1); }), Errc::unbounded);
}

TEST(SdpIdentity, ResidualsSmallOnE2AndRandom) {
  for (const auto& r : theorem_sdp_identity_report(fixtures::e2(), {1.0, 0.3, 0.1, 0.03, 0.01}))
    EXPECT_LE(r.residual, 1e-8) << r.epsilon;
  for (std::uint64_t seed : {31u, 32u}) {
    const SDPInstance inst = fixtures::random_sdp(seed, 3, 2);
    for (const auto& r : theorem_sdp_identity_report(inst, {1.0, 0.1, 0.01}))
      EXPECT_LE(r.residual, 1e-8) << seed << " " << r.epsilon;
  }
}

TEST(SdpIdentity, PerspectiveRateTowardsSdpValue) {
  // ε Θ(y/ε) + ε ln s → τ(3) = 3 for E2
  const MaxentProblem p = sdp_maxent_problem(fixtures::e2());
  double prev = 1e300;
  for (double eps : {0.1, 0.01, 0.001}) {
    const double gap = std::abs(theta_and_perspective(p, v1(3.0), eps) + eps * fixtures::e2().log_s - 3.0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LE(prev, 0.03);
}

TEST(McPsdIntegral, MatchesClosedFormInLowDimensions) {
  for (Index d = 1; d <= 3; ++d) {
    const Matrix Z = fixtures::random_pd(40 + static_cast<std::uint64_t>(d), d);
    const double exact = std::exp(psd_log_barrier(Z));
    const McEstimate est = mc_psd_integral(Z, 200'000, 7);
    EXPECT_TRUE(est.within(exact)) << "d=" << d << " est=" << est.estimate << " exact=" << exact
                                   << " se=" << est.std_error;
    EXPECT_LT(est.std_error / exact, 0.02) << d;
  }
}

TEST(McPsdIntegral, DeterministicForSeed) {
  const Matrix Z = fixtures::random_pd(9, 2);
  EXPECT_EQ(mc_psd_integral(Z, 1000, 3).estimate, mc_psd_integral(Z, 1000, 3).estimate);
  EXPECT_NE(mc_psd_integral(Z, 1000, 3).estimate, mc_psd_integral(Z, 1000, 4).estimate);
}

TEST(McPsdIntegral, Errors) {
  EXPECT_EQ(error_code([&] { mc_psd_integral(Matrix::Identity(4, 4), 10, 1); }), Errc::dimension_unsupported);
  Matrix indef = Matrix::Identity(2, 2);
  indef(0, 0) = -1.0;
  EXPECT_EQ(error_code([&] { mc_psd_integral(indef, 10, 1); }), Errc::not_positive_definite);
}

}  // namespace
