#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cramer/linalg.hpp"
#include "cramer/lp_bridge.hpp"
#include "cramer/polytope.hpp"
#include "cramer/problem.hpp"
#include "cramer/rng.hpp"
#include "cramer/sdp_bridge.hpp"

/// Worked instances and seeded random instances shared by the verification
/// suites and the tests. Random draws use stream 1000 + k of the counter generator.
namespace cramer::fixtures {

/// A = [1, 1], c = (1, 2).
inline LPInstance e1(double y = 1.0) {
  Matrix A(1, 2);
  A << 1.0, 1.0;
  Vector c(2);
  c << 1.0, 2.0;
  return normalize_instance(A, c, Vector::Constant(1, y));
}

/// d = 2, A0 = I, A1 = I.
inline SDPInstance e2(double y = 3.0) {
  return make_sdp_instance(Matrix::Identity(2, 2), {Matrix::Identity(2, 2)}, Vector::Constant(1, y));
}

class Draws {
 public:
  Draws(std::uint64_t seed, std::uint64_t stream) : rng_(seed, 1000 + stream) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(counter_++); }
  double normal() {
    const double z = rng_.normal(counter_);
    counter_ += 2;
    return z;
  }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

/// A ~ U[−1,1]^{m×d}, c ~ U[0.5,2]^d, y = A x0 with x0 ~ U[0.2,1.5]^d (so y is interior).
inline LPInstance random_lp(std::uint64_t seed, Index d, Index m) {
  Draws r(seed, 0);
  Matrix A(m, d);
  Vector c(d), x0(d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < d; ++j) A(i, j) = r.uniform(-1.0, 1.0);
  for (Index j = 0; j < d; ++j) c(j) = r.uniform(0.5, 2.0);
  for (Index j = 0; j < d; ++j) x0(j) = r.uniform(0.2, 1.5);
  return normalize_instance(A, c, A * x0);
}

/// Positive A with well-separated ratios c_j/A_j, so every basis is feasible for y > 0.
inline LPInstance random_lp_m1(std::uint64_t seed, Index d) {
  Draws r(seed, 1);
  Matrix A(1, d);
  Vector c(d);
  for (Index j = 0; j < d; ++j) {
    A(0, j) = r.uniform(0.5, 2.0);
    c(j) = (1.0 + 0.5 * static_cast<double>(j) + r.uniform(0.0, 0.2)) * A(0, j);
  }
  return normalize_instance(A, c, Vector::Constant(1, r.uniform(0.5, 3.0)));
}

/// Positive A (m = 2) so the moment cone is a proper sector.
inline LPInstance random_lp_positive(std::uint64_t seed, Index d, Index m) {
  Draws r(seed, 2);
  Matrix A(m, d);
  Vector c(d), x0(d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < d; ++j) A(i, j) = r.uniform(0.2, 2.0);
  for (Index j = 0; j < d; ++j) c(j) = r.uniform(0.5, 2.0);
  for (Index j = 0; j < d; ++j) x0(j) = r.uniform(0.2, 1.5);
  return normalize_instance(A, c, A * x0);
}

inline Matrix random_symmetric(Draws& r, Index d) {
  Matrix S(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j <= i; ++j) S(i, j) = S(j, i) = r.uniform(-1.0, 1.0);
  return S;
}

/// 0.5·I + B Bᵀ/d with B ~ U[−1,1]^{d×d}.
inline Matrix random_pd(std::uint64_t seed, Index d, std::uint64_t stream = 3) {
  Draws r(seed, stream);
  Matrix B(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) B(i, j) = r.uniform(-1.0, 1.0);
  return 0.5 * Matrix::Identity(d, d) + B * B.transpose() / static_cast<double>(d);
}

/// A0 random PD, A_j random symmetric, y = (⟨A_j, X0⟩) for a random X0 ≻ 0.
inline SDPInstance random_sdp(std::uint64_t seed, Index d, Index m) {
  Draws r(seed, 4);
  std::vector<Matrix> As;
  for (Index j = 0; j < m; ++j) As.push_back(random_symmetric(r, d));
  const Matrix A0 = random_pd(seed, d, 5);
  const Matrix X0 = random_pd(seed, d, 6);
  Vector y(m);
  for (Index j = 0; j < m; ++j) y(j) = trace_inner(As[static_cast<std::size_t>(j)], X0);
  return make_sdp_instance(A0, As, y);
}

/// Uniform density on [0,1]^2 with h(x) = (Σx, Σx²).
inline MaxentProblem box_uniform_2d(const Vector& y) {
  return make_box_problem({{0.0, 1.0}, {0.0, 1.0}}, BoxDensity::uniform, BoxMap::sum_and_sum_squares, y);
}

}  // namespace cramer::fixtures
