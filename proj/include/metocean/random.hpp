#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "metocean/distributions.hpp"

namespace metocean {

/// SplitMix64 finaliser. Used to turn (seed, stream) pairs into well-mixed
/// engine seeds so streams are independent of the order they are consumed in.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A seeded random stream. Child streams are addressed by (seed, stream id),
/// so replicate k always sees the same numbers regardless of scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))),
        engine_(key_) {}

  /// Independent child stream; does not advance this stream.
  RandomStream derive(std::uint64_t stream) const { return RandomStream(key_, stream); }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    // Lemire's multiply-shift; bias is negligible for n << 2^64.
    const unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    return static_cast<std::size_t>(m >> 64);
  }

  double normal() { return dist::normal_quantile(uniform()); }

  double exponential() { return -std::log(uniform()); }

  /// Poisson draw by inversion. Large means are split into chunks of 30 and
  /// summed, which is exact because Poisson variables are additive.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_inversion(30.0);
      mean -= 30.0;
    }
    return total + poisson_inversion(mean);
  }

 private:
  std::uint64_t poisson_inversion(double mean) {
    if (mean <= 0) return 0;
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace metocean
