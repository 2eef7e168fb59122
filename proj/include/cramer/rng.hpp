#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace cramer {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so a sample's randomness does not depend on how
/// work is split across streams or threads.
///
/// Algorithm "splitmix64-ctr/1": key = mix(seed ^ mix(stream + G)),
/// word(counter) = mix(key + (counter + 1) * G), with G the 64-bit golden
/// ratio increment and mix the SplitMix64 finalizer.
class CounterRng {
 public:
  static constexpr std::string_view kGeneratorId = "splitmix64-ctr/1";

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + kGolden))) {}

  constexpr std::uint64_t word(std::uint64_t counter) const { return mix(key_ + (counter + 1) * kGolden); }

  /// Uniform on the open interval (0, 1).
  constexpr double uniform(std::uint64_t counter) const {
    return (static_cast<double>(word(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate, by inverse CDF.
  double exponential(std::uint64_t counter, double rate) const { return -std::log(uniform(counter)) / rate; }

  /// Standard normal by Box-Muller; consumes counters (counter, counter + 1).
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(counter);
    const double u2 = uniform(counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace cramer
