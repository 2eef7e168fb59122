#include <gtest/gtest.h>

#include <cmath>
#include <set>

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

TEST(CounterRng, PureFunctionOfSeedStreamCounter) {
  const CounterRng a(42, 0), b(42, 0), other_stream(42, 1), other_seed(43, 0);
  EXPECT_EQ(CounterRng::kGeneratorId, "splitmix64-ctr/1");
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    EXPECT_EQ(a.word(k), b.word(k));
    EXPECT_NE(a.word(k), other_stream.word(k));
    EXPECT_NE(a.word(k), other_seed.word(k));
    const double u = a.uniform(k);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    seen.insert(a.word(k));
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(CounterRng, UniformMomentsAndNormalTail) {
  const CounterRng r(7, 0);
  MeanAccumulator u, z;
  for (std::uint64_t k = 0; k < 200'000; ++k) {
    u.push(r.uniform(k));
    z.push(r.normal(2 * k));
  }
  EXPECT_TRUE(u.result().within(0.5));
  EXPECT_TRUE(z.result().within(0.0));
}

TEST(MeanAccumulator, KnownValues) {
  MeanAccumulator acc;
  for (double v : {1.0, 2.0, 3.0, 4.0}) acc.push(v);
  const McEstimate e = acc.result();
  EXPECT_DOUBLE_EQ(e.estimate, 2.5);
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(e.samples, 4u);
  EXPECT_TRUE(e.within(2.5 + 3.0 * e.std_error));
  EXPECT_FALSE(e.within(2.5 + 3.1 * e.std_error));
}

TEST(Sampling, OrthantExponentialMeansAndLayout) {
  Vector c(3);
  c << 1.0, 2.0, 4.0;
  const SampleBatch batch = sample_orthant_exponential(c, 200'000, 11);
  EXPECT_EQ(batch.points.rows(), 200'000);
  EXPECT_EQ(batch.generator_id, "splitmix64-ctr/1");
  for (Index j = 0; j < 3; ++j) {
    MeanAccumulator acc;
    for (Index i = 0; i < batch.points.rows(); ++i) acc.push(batch.points(i, j));
    EXPECT_TRUE(acc.result().within(1.0 / c(j))) << j;
  }
  // point i coordinate j reads counter i·d + j of stream 0
  const CounterRng rng(11, 0);
  EXPECT_DOUBLE_EQ(batch.points(5, 2), rng.exponential(5 * 3 + 2, 4.0));
  EXPECT_EQ(error_code([&] { sample_reference(sdp_maxent_problem(fixtures::e2()), 10, 1); }), Errc::sampling_unsupported);
}

TEST(Sampling, BoxRejectionStaysInsideAndMatchesMean) {
  const MaxentProblem p = make_box_problem({{-1.0, 2.0}}, BoxDensity::ramp, BoxMap::identity, v1(0.5));
  const SampleBatch batch = sample_reference(p, 100'000, 3);
  MeanAccumulator acc;
  for (Index i = 0; i < batch.points.rows(); ++i) {
    EXPECT_GE(batch.points(i, 0), -1.0);
    EXPECT_LE(batch.points(i, 0), 2.0);
    acc.push(batch.points(i, 0));
  }
  EXPECT_TRUE(acc.result().within(log_partition_derivatives(p, v1(0.0)).gradient(0)));
}

TEST(MgfOracle, E1ClosedForm) {
  const MaxentProblem p = lp_maxent_problem(fixtures::e1());
  const SampleBatch batch = sample_reference(p, 1'000'000, 42);
  const McEstimate est = mc_mgf(batch, p, v1(0.3));
  EXPECT_TRUE(est.within(2.0 / (0.7 * 1.7)));
  EXPECT_EQ(error_code([&] { mc_mgf(batch, p, v1(1.2)); }), Errc::domain_violation);
}

TEST(FiniteDiff, ExactForQuadraticAndStepTooLarge) {
  auto f = [](const Vector& x) { return x.squaredNorm(); };
  auto g = [](const Vector& x) -> Vector { return 2.0 * x; };
  Vector at(2);
  at << 0.3, -1.2;
  EXPECT_LE(finite_diff_check(f, g, at, 1e-3), 1e-10);
  const MaxentProblem p = lp_maxent_problem(fixtures::e1());
  EXPECT_EQ(error_code([&] {
              finite_diff_check([&](const Vector& l) { return log_partition(p, l); },
                                [&](const Vector& l) { return log_partition_derivatives(p, l).gradient; }, v1(0.9),
                                0.5);
            }),
            Errc::step_too_large);
}

TEST(GaussLegendre, PolynomialExactness) {
  for (int n : {1, 2, 5, 20, 64}) {
    const GaussRule rule = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1 && k <= 40; ++k) {
      const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
      const double got = integrate(rule, -1.0, 1.0, [k](double x) { return std::pow(x, k); });
      EXPECT_NEAR(got, exact, 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Enumeration, BasisCountsAndSigns) {
  const LPInstance e1 = fixtures::e1();
  const BasisCatalog cat = enumerate_feasible_bases(e1);
  ASSERT_EQ(cat.bases.size(), 2u);
  for (const auto& b : cat.bases) {
    EXPECT_NEAR(b.det_abs, 1.0, 0.0);
    EXPECT_EQ(b.reduced_costs.size(), 1u);
    EXPECT_NEAR(std::abs(b.reduced_costs.begin()->second), 1.0, 1e-15);
  }
  EXPECT_TRUE(enumerate_feasible_bases(fixtures::e1(-1.0)).bases.empty());
}

}  // namespace
