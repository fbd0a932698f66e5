#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace oaf {

// Small deterministic sampling kit on top of mt19937_64. std::distributions
// are implementation-defined across standard libraries; these are not, so
// seeded runs reproduce bit-for-bit anywhere.

// Uniform double in [0, 1): top 53 bits of the generator output.
inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in {0, ..., n-1}.
inline int uniform_int(std::mt19937_64& rng, int n) {
  const int k = static_cast<int>(uniform_double(rng) * n);
  return k < n ? k : n - 1;
}

// Standard normal via Box-Muller (stateless variant, one draw per call).
inline double normal_double(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform_double(rng);  // (0, 1]: keeps the log finite
  const double u2 = uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace oaf
