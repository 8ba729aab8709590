#pragma once

#include <cstdint>
#include <random>

namespace qcost {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic random stream. Everything randomized draws through this
// wrapper: mt19937_64 plus an explicit bits-to-double conversion, no library
// distributions, so identical seeds give identical results on any platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // Independent per-replication stream derived from a master seed.
  static RngStream derive(std::uint64_t master, std::uint64_t index) {
    return RngStream(splitmix64(master ^ (0x9E3779B97F4A7C15ull * (index + 1))));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform, strictly inside (0,1).
  double uniform01() { return (double((next_u64() >> 11)) + 0.5) * 0x1p-53; }

  // Uniform strictly inside (a,b); falls back to the midpoint when the
  // interval is too narrow for an interior double.
  double uniform(double a, double b) {
    double v = a + (b - a) * uniform01();
    if (v <= a || v >= b) v = a + 0.5 * (b - a);
    return v;
  }

  std::size_t index(std::size_t n) { return std::size_t(next_u64() % n); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qcost
