#include "vfraud/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfraud/error.hpp"

namespace vfraud {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "Rng::below(0)");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double Rng::exponential(double mean) { return -mean * std::log1p(-uniform()); }

std::int64_t Rng::poisson(double lambda) {
  if (!(lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "Poisson rate must be >= 0");
  if (lambda == 0.0) return 0;
  if (lambda > 600.0) fail(ErrorCode::InvalidArgument, "Poisson rate too large for inversion");
  const double u = uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::int64_t k = 0;
  // The tail cut-off keeps the loop bounded when u lands in the last ulp.
  const auto cap = static_cast<std::int64_t>(lambda * 10.0 + 100.0);
  while (u >= cdf && k < cap) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::size_t Rng::weighted(std::span<const double> cumulative) {
  if (cumulative.empty() || !(cumulative.back() > 0.0)) {
    fail(ErrorCode::InvalidArgument, "weighted draw needs positive total weight");
  }
  const double x = uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace vfraud
