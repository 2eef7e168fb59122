#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include "cramer/errors.hpp"
#include "cramer/linalg.hpp"
#include "cramer/maxent_core.hpp"
#include "cramer/problem.hpp"
#include "cramer/rng.hpp"

namespace cramer {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;

  bool within(double truth, double n_sigma = 3.0) const { return std::abs(estimate - truth) <= n_sigma * std_error; }
};

/// Welford mean/variance; deterministic because values are pushed in sample order.
class MeanAccumulator {
 public:
  void push(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }

  McEstimate result() const {
    McEstimate out;
    out.samples = n_;
    out.estimate = mean_;
    out.std_error = n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_)) : 0.0;
    return out;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// n points of Ω (one per row) with the seed and generator that produced them.
struct SampleBatch {
  Matrix points;
  std::uint64_t seed = 0;
  std::string generator_id;
};

/// Independent coordinates x_j ~ Exp(c_j) by inverse CDF; point i coordinate j
/// uses counter i·d + j of stream 0.
inline SampleBatch sample_orthant_exponential(const Vector& c, std::size_t n, std::uint64_t seed) {
  if (c.size() == 0 || !((c.array() > 0.0).all()) || !c.allFinite())
    fail(Errc::invalid_rate, "exponential rates must be finite and > 0");
  const Index d = c.size();
  SampleBatch batch{Matrix(static_cast<Index>(n), d), seed, std::string(CounterRng::kGeneratorId)};
  const CounterRng rng(seed, 0);
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    for (Index j = 0; j < d; ++j)
      batch.points(i, j) = rng.exponential(static_cast<std::uint64_t>(i * d + j), c(j));
  return batch;
}

namespace detail {

/// Rejection sampling from the catalogued box density; sample i uses stream i + 1.
inline SampleBatch sample_box(const BoxQuadrature& box, std::size_t n, std::uint64_t seed) {
  const auto d = static_cast<Index>(box.bounds.size());
  const double bound = box_density_upper_bound(box.density, d);
  SampleBatch batch{Matrix(static_cast<Index>(n), d), seed, std::string(CounterRng::kGeneratorId)};
  Vector x(d);
  for (Index i = 0; i < static_cast<Index>(n); ++i) {
    const CounterRng rng(seed, static_cast<std::uint64_t>(i) + 1);
    for (std::uint64_t attempt = 0;; ++attempt) {
      const std::uint64_t base = attempt * static_cast<std::uint64_t>(d + 1);
      for (Index j = 0; j < d; ++j) {
        const auto& b = box.bounds[static_cast<std::size_t>(j)];
        x(j) = b.lo + (b.hi - b.lo) * rng.uniform(base + static_cast<std::uint64_t>(j));
      }
      const double accept = std::exp(box_log_density_unnormalized(box.density, box.bounds, x)) / bound;
      if (rng.uniform(base + static_cast<std::uint64_t>(d)) <= accept) break;
    }
    batch.points.row(i) = x.transpose();
  }
  return batch;
}

}  // namespace detail

/// Seeded samples from the reference measure P (LP-orthant or box backends).
inline SampleBatch sample_reference(const MaxentProblem& problem, std::size_t n, std::uint64_t seed) {
  if (const auto* lp = std::get_if<LpOrthant>(&problem.backend)) return sample_orthant_exponential(lp->c, n, seed);
  if (const auto* box = std::get_if<BoxQuadrature>(&problem.backend)) return detail::sample_box(*box, n, seed);
  fail(Errc::sampling_unsupported, "no sampler for the PSD cone backend (use mc_psd_integral)");
}

/// Monte-Carlo estimate of Z(λ) = E_P[e^{<λ,h(X)>}] over a batch of P-samples.
/// The MGF domain is checked analytically first.
inline McEstimate mc_mgf(const SampleBatch& batch, const MaxentProblem& problem, const Vector& lambda) {
  if (lambda.size() != problem.moment_dim()) fail(Errc::invalid_argument, "lambda has wrong dimension");
  if (problem.is_lp() || problem.is_sdp()) log_partition(problem, lambda);  // throws DomainViolation
  if (batch.points.cols() != problem.domain_dim()) fail(Errc::invalid_argument, "batch points have wrong dimension");
  MeanAccumulator acc;
  for (Index i = 0; i < batch.points.rows(); ++i)
    acc.push(std::exp(lambda.dot(moment_map(problem, batch.points.row(i).transpose()))));
  return acc.result();
}

/// ∞-norm discrepancy between grad_f(at) and central differences of f.
/// Throws StepTooLarge when at ± step·e_i leaves the domain of f.
inline double finite_diff_check(const std::function<double(const Vector&)>& f,
                                const std::function<Vector(const Vector&)>& grad_f, const Vector& at, double step) {
  if (!(step > 0.0)) fail(Errc::invalid_argument, "step must be positive");
  const Vector g = grad_f(at);
  if (g.size() != at.size()) fail(Errc::invalid_argument, "gradient has wrong dimension");
  double worst = 0.0;
  for (Index i = 0; i < at.size(); ++i) {
    Vector up = at, down = at;
    up(i) += step;
    down(i) -= step;
    double fu = 0.0, fd = 0.0;
    try {
      fu = f(up);
      fd = f(down);
    } catch (const Error& e) {
      if (e.code() == Errc::domain_violation || e.code() == Errc::not_positive_definite)
        fail(Errc::step_too_large, "finite-difference stencil leaves the domain");
      throw;
    }
    worst = std::max(worst, std::abs((fu - fd) / (2.0 * step) - g(i)));
  }
  return worst;
}

}  // namespace cramer
