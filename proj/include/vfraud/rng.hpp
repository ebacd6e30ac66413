#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace vfraud {

// Seeded generator with platform-independent output. The engine is
// std::mt19937_64 (its sequence is fixed by the standard); the variate
// mappings below are written out because the standard distributions are
// implementation-defined.
//
//   uniform()        top 53 bits of one draw, scaled to [0, 1)
//   below(n)         rejection sampling on the full 64-bit range
//   exponential(m)   -m * log(1 - uniform())
//   poisson(l)       inversion by sequential search over the pmf
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  std::uint64_t below(std::uint64_t n);
  double exponential(double mean);
  std::int64_t poisson(double lambda);
  bool bernoulli(double p) { return uniform() < p; }
  /// Index drawn from an inclusive prefix-sum table of non-negative weights.
  std::size_t weighted(std::span<const double> cumulative);

private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer over (base, stream); used to derive independent
/// per-stream seeds from one scenario seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace vfraud
