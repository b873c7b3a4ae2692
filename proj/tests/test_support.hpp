#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "vortsphere/operators.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere::testing {

/// Random real mean-zero field with coefficients in degrees [jmin, jmax],
/// amplitudes decaying like exp(-decay * j), normalized to the given L2 norm.
inline SpectralField random_field(std::size_t J, std::uint64_t seed, std::size_t jmax = 0, double decay = 0.0,
                                  double l2 = 1.0, std::size_t jmin = 1) {
  if (jmax == 0 || jmax > J) jmax = J;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField a(J);
  for (std::size_t j = jmin; j <= jmax; ++j) {
    const double amp = std::exp(-decay * static_cast<double>(j));
    a.set_real_pair(j, 0, Complex(amp * normal(rng), 0.0));
    for (int m = 1; m <= static_cast<int>(j); ++m)
      a.set_real_pair(j, m, amp * Complex(normal(rng), normal(rng)) / std::sqrt(2.0));
  }
  const double n = l2_norm(a);
  if (n > 0) a *= l2 / n;
  return a;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double worst = 0.0;
  const auto& ca = a.coeffs();
  const auto& cb = b.coeffs();
  for (std::size_t n = 0; n < ca.size(); ++n) worst = std::max(worst, std::abs(ca[n] - cb[n]));
  return worst;
}

}  // namespace vortsphere::testing
