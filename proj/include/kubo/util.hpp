#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace kubo {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cd kI{0.0, 1.0};

// representative of k in (-pi, pi]
inline double torus_wrap(double k) {
  double w = std::remainder(k, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

// |k|_T = min_n |k + 2 pi n|
inline double torus_dist(double k) { return std::abs(torus_wrap(k)); }

// ring coordinate of array index i in [0, L): x in [-L/2, L/2]
inline int ring_coord(int i, int L) { return (i <= L / 2) ? i : i - L; }

// array index of ring coordinate x
inline int ring_index(int x, int L) {
  int i = x % L;
  return (i < 0) ? i + L : i;
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace kubo
