#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "vortsphere/grid.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

/// Normalized associated Legendre functions Pbar_{j,m}(mu) for 0 <= m <= j <= J,
/// with integral over [-1,1] of Pbar^2 equal to 1/(2 pi) and Condon-Shortley
/// phase, so Y_{j,m} = Pbar_{j,m}(mu) exp(i m lon). Packed by m, then j.
class LegendreTable {
 public:
  explicit LegendreTable(std::size_t J) : J_(J) {}

  std::size_t truncation() const { return J_; }
  std::size_t packed_size() const { return (J_ + 1) * (J_ + 2) / 2; }
  std::size_t offset(std::size_t m) const { return m * (2 * J_ + 3 - m) / 2; }
  std::size_t packed(std::size_t j, std::size_t m) const { return offset(m) + (j - m); }

  /// Fills values (and, if non-empty, mu-derivatives) at one mu in (-1, 1).
  void evaluate(double mu, std::span<double> values, std::span<double> derivatives = {}) const;

 private:
  std::size_t J_;
};

/// Precomputed transform tables for one (grid, truncation) pair.
class SphericalTransform {
 public:
  SphericalTransform(const Grid& grid, std::size_t J);

  const Grid& grid() const { return grid_; }
  std::size_t truncation() const { return J_; }

  SpectralField analyze(const GridField& f) const;
  GridField synthesize(const SpectralField& a) const;
  /// Longitude and mu derivatives of the synthesized field.
  void synthesize_derivatives(const SpectralField& a, GridField& d_lon, GridField& d_mu) const;

 private:
  void fourier_synthesis(std::span<const Complex> row_coeffs, std::span<double> row) const;

  Grid grid_;
  std::size_t J_;
  LegendreTable table_;
  std::vector<double> pbar_;    // nlat x packed
  std::vector<double> dpbar_;   // nlat x packed
  std::vector<double> cos_;     // nlon x (J+1)
  std::vector<double> sin_;     // nlon x (J+1)
};

/// Shared, cached transform for the given grid and truncation.
/// Throws ResolutionError if the grid cannot represent degree J.
std::shared_ptr<const SphericalTransform> transform_for(const Grid& grid, std::size_t J);

SpectralField analyze(const GridField& f, std::size_t J);
GridField synthesize(const SpectralField& a, const Grid& grid);

/// Evaluates the band-limited field at arbitrary unit vectors.
std::vector<double> evaluate(const SpectralField& a, std::span<const Vec3> points);

}  // namespace vortsphere
