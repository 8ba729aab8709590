#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "qcost/rng.hpp"

namespace testutil {

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline Stats stats_of(std::span<const double> xs) {
  Stats s;
  s.n = xs.size();
  if (s.n == 0) return s;
  long double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = double(sum / s.n);
  if (s.n < 2) return s;
  long double ss = 0.0;
  for (double x : xs) {
    long double d = x - s.mean;
    ss += d * d;
  }
  s.stderr_ = double(std::sqrt(ss / (s.n - 1) / s.n));
  return s;
}

// |a-b| <= atol, written out so failure messages show both values.
inline bool close(double a, double b, double atol) { return std::fabs(a - b) <= atol; }

}  // namespace testutil
