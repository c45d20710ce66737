#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "liprl/errors.hpp"

namespace liprl {

// splitmix64 step; used to spread user seeds and derive substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for an independent substream (per-state, per-mode, ...) of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base;
  (void)splitmix64(s);
  s ^= 0xD1B54A32D192ED03ULL * (stream + 1);
  return splitmix64(s);
}

// Seeded generator with hand-rolled distributions. std:: distributions are
// implementation-defined, so replayability across toolchains would be lost;
// everything here is pinned to the mt19937_64 bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw domain_error("Rng::index: n must be positive");
    auto r = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return r < n ? r : n - 1;
  }

  int sign() { return (gen_() & 1u) ? 1 : -1; }

  // Standard normal via Box-Muller; no cached spare so the stream position
  // stays easy to reason about.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::vector<double> gaussian_vec(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal();
    return v;
  }

  // Uniform sample from the probability simplex (Dirichlet(1,...,1)).
  std::vector<double> dirichlet1(std::size_t n) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (auto& x : v) {
      x = -std::log(1.0 - uniform01());
      sum += x;
    }
    for (auto& x : v) x /= sum;
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace liprl
