#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mrp {

// splitmix64 step; used to derive well-separated substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Distinct salts keep the simulator's per-respondent streams and the
// bootstrap's per-replicate streams disjoint even under equal seeds.
enum class RngDomain : std::uint64_t {
  Simulator = 0x53494D5F52455350ULL,
  Bootstrap = 0x424F4F545F524550ULL,
};

// Deterministic RNG stream.  The engine is std::mt19937_64 (bit-exact across
// platforms); all draws below avoid std::*_distribution, whose output is
// implementation-defined, so identical (seed, domain, stream) yields
// identical sequences everywhere, independent of thread scheduling.
class Rng {
 public:
  Rng(std::uint64_t seed, RngDomain domain, std::uint64_t stream) {
    std::uint64_t s = seed ^ static_cast<std::uint64_t>(domain);
    splitmix64(s);
    s += 0x9E3779B97F4A7C15ULL * (stream + 1);
    engine_.seed(splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n); unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  // Index draw from a cumulative weight table (last entry = total mass).
  std::size_t from_cdf(std::span<const double> cdf) {
    double u = uniform01() * cdf.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cdf[mid] <= u) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<double> cumulative(std::span<const double> weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[i] = acc;
  }
  return cdf;
}

}  // namespace mrp
