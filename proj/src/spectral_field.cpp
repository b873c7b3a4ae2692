#include "vortsphere/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vortsphere {

namespace {
constexpr double kPi = std::numbers::pi;
double sign_power(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }
}  // namespace

void SpectralField::set_real_pair(std::size_t j, int m, Complex value) {
  if (m < 0) throw std::invalid_argument("set_real_pair: m must be non-negative");
  if (m == 0) {
    (*this)(j, 0) = Complex(value.real(), 0.0);
    return;
  }
  (*this)(j, m) = value;
  (*this)(j, -m) = sign_power(m) * std::conj(value);
}

SpectralField SpectralField::resized(std::size_t J) const {
  SpectralField out(J);
  const std::size_t jmax = std::min(J, J_);
  for (std::size_t j = 0; j <= jmax; ++j)
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) out(j, m) = (*this)(j, m);
  return out;
}

double SpectralField::symmetry_defect() const {
  double worst = 0.0;
  for (std::size_t j = 0; j <= J_; ++j) {
    worst = std::max(worst, std::abs((*this)(j, 0).imag()));
    for (int m = 1; m <= static_cast<int>(j); ++m)
      worst = std::max(worst, std::abs((*this)(j, -m) - sign_power(m) * std::conj((*this)(j, m))));
  }
  return worst;
}

void SpectralField::enforce_real_symmetry() {
  for (std::size_t j = 0; j <= J_; ++j) {
    (*this)(j, 0).imag(0.0);
    for (int m = 1; m <= static_cast<int>(j); ++m)
      (*this)(j, -m) = sign_power(m) * std::conj((*this)(j, m));
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.J_ != J_) throw std::invalid_argument("SpectralField: truncation mismatch in +=");
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] += other.coeffs_[n];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (other.J_ != J_) throw std::invalid_argument("SpectralField: truncation mismatch in -=");
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] -= other.coeffs_[n];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralField degree_part(const SpectralField& a, std::size_t j) {
  SpectralField out(a.truncation());
  if (j > a.truncation()) return out;
  for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) out(j, m) = a(j, m);
  return out;
}

double degree_energy(const SpectralField& a, std::size_t j) {
  if (j > a.truncation()) return 0.0;
  double e = 0.0;
  for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) e += std::norm(a(j, m));
  return e;
}

SpectralField coordinate_field(std::size_t J, int axis) {
  if (J < 1) throw std::invalid_argument("coordinate_field: truncation must be >= 1");
  SpectralField out(J);
  const double c = std::sqrt(2.0 * kPi / 3.0);
  switch (axis) {
    case 0:  // x1 = c (Y_{1,-1} - Y_{1,1})
      out.set_real_pair(1, 1, Complex(-c, 0.0));
      break;
    case 1:  // x2 = i c (Y_{1,-1} + Y_{1,1})
      out.set_real_pair(1, 1, Complex(0.0, c));
      break;
    case 2:
      out(1, 0) = std::sqrt(4.0 * kPi / 3.0);
      break;
    default:
      throw std::invalid_argument("coordinate_field: axis must be 0, 1 or 2");
  }
  return out;
}

SpectralField linear_field(std::size_t J, const std::array<double, 3>& q) {
  SpectralField out(J);
  for (int axis = 0; axis < 3; ++axis) out += q[axis] * coordinate_field(J, axis);
  return out;
}

std::array<double, 3> degree_one_moment(const SpectralField& a) {
  if (a.truncation() < 1) return {0.0, 0.0, 0.0};
  const double c = std::sqrt(2.0 * kPi / 3.0);
  const Complex a11 = a(1, 1);
  return {-2.0 * c * a11.real(), 2.0 * c * a11.imag(), std::sqrt(4.0 * kPi / 3.0) * a(1, 0).real()};
}

SpectralField random_band_limited(std::size_t J, std::size_t jmin, std::size_t jmax, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField a(J);
  for (std::size_t j = jmin; j <= std::min(jmax, J); ++j) {
    a.set_real_pair(j, 0, Complex(normal(rng), 0.0));
    for (int m = 1; m <= static_cast<int>(j); ++m) {
      const double re = normal(rng), im = normal(rng);
      a.set_real_pair(j, m, Complex(re, im) / std::sqrt(2.0));
    }
  }
  return a;
}

}  // namespace vortsphere
