#pragma once

#include <cmath>
#include <cstddef>

// Fixed-seed distribution checks run at the 0.1% level.
inline constexpr double kKsCritical001 = 1.949;
inline constexpr double kChiLevel001 = 0.001;

inline double ks_one_sample_critical(std::size_t n) { return kKsCritical001 / std::sqrt(double(n)); }

inline double ks_two_sample_critical(std::size_t n, std::size_t m) {
  return kKsCritical001 * std::sqrt(double(n + m) / double(n * m));
}
