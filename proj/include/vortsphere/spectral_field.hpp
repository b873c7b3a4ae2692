#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <random>
#include <vector>

namespace vortsphere {

using Complex = std::complex<double>;

/// Band-limited real field on the unit sphere, stored as coefficients a_{j,m}
/// (0 <= j <= J, -j <= m <= j) in the orthonormal complex spherical-harmonic
/// basis with Condon-Shortley phase. Real fields satisfy
/// a_{j,-m} = (-1)^m conj(a_{j,m}).
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(std::size_t J) : J_(J), coeffs_((J + 1) * (J + 1)) {}

  std::size_t truncation() const { return J_; }
  std::size_t size() const { return coeffs_.size(); }

  static std::size_t index(std::size_t j, int m) {
    return static_cast<std::size_t>(static_cast<long>(j * (j + 1)) + m);
  }

  Complex& operator()(std::size_t j, int m) { return coeffs_[index(j, m)]; }
  const Complex& operator()(std::size_t j, int m) const { return coeffs_[index(j, m)]; }

  /// Sets a_{j,m} (m >= 0) and its mirror a_{j,-m} so the field stays real.
  void set_real_pair(std::size_t j, int m, Complex value);

  std::vector<Complex>& coeffs() { return coeffs_; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }

  /// Copy with truncation changed (padding with zeros or dropping degrees).
  SpectralField resized(std::size_t J) const;

  /// Largest violation of the real-field symmetry.
  double symmetry_defect() const;
  /// Overwrites negative-m coefficients from the m >= 0 ones and zeroes the
  /// imaginary part of m = 0.
  void enforce_real_symmetry();

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

 private:
  std::size_t J_ = 0;
  std::vector<Complex> coeffs_;
};

/// Degree-j slice of a field (all other coefficients zeroed).
SpectralField degree_part(const SpectralField& a, std::size_t j);
/// Coefficient-space energy sum_m |a_{j,m}|^2 at degree j.
double degree_energy(const SpectralField& a, std::size_t j);

/// Coefficients of the coordinate functions x1, x2, x3 at truncation J >= 1.
SpectralField coordinate_field(std::size_t J, int axis);
/// Coefficients of q . x.
SpectralField linear_field(std::size_t J, const std::array<double, 3>& q);
/// Real field with independent standard normal coefficients on degrees
/// jmin..jmax (clamped to J), the m != 0 ones split evenly between real and
/// imaginary parts.
SpectralField random_band_limited(std::size_t J, std::size_t jmin, std::size_t jmax, std::mt19937_64& rng);

/// The moment vector integral x * f dsigma, read off the degree-1 coefficients.
std::array<double, 3> degree_one_moment(const SpectralField& a);

}  // namespace vortsphere
