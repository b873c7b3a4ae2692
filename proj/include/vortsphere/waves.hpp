#pragma once

#include <string>
#include <vector>

#include "vortsphere/grid.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

/// Rossby-Haurwitz wave alpha x3 + Y with Y of a single degree j.
/// For j >= 2 the rotation rate is tied to alpha by
///   beta = (2 - j(j+1)) / (2 j(j+1)) * alpha;
/// for j = 1 it is free.
struct RHWaveSpec {
  std::size_t degree = 2;
  SpectralField Y;
  double alpha = 0.0;
  double beta = 0.0;
  double Omega = 0.0;

  std::size_t truncation() const { return Y.truncation(); }
};

/// beta from the dispersion relation (degree >= 2).
double rh_rotation_rate(std::size_t degree, double alpha);

/// Throws std::invalid_argument if Y carries more than 1e-12 of its energy
/// (absolute, in coefficient space) outside degree j, or j exceeds Y's truncation.
RHWaveSpec make_rh_wave(std::size_t degree, const SpectralField& Y, double alpha, double Omega = 0.0,
                        double beta_degree_one = 0.0);

/// alpha x3 + Y composed with the rotation about e3 by (beta + Omega) t.
SpectralField exact_rh_solution(const RHWaveSpec& w, double t);

/// Time derivative of the exact solution.
SpectralField exact_rh_tendency(const RHWaveSpec& w, double t);

/// L2 norm of (exact tendency - discrete right-hand side) at t = 0.
double rh_residual(const RHWaveSpec& w, const Grid& grid);

/// One coefficient a_{j,m} (m >= 0) of the Y component; the mirrored m < 0
/// coefficient is implied.
struct YCoefficient {
  int m = 0;
  double re = 0.0;
  double im = 0.0;
};

/// Preset named "rh-j<j>". With no coefficients Y defaults to the unit-L2 real
/// harmonic with a_{j,1} = -1/sqrt(2), which is a multiple of x1 for j = 1
/// and of x1 x3 for j = 2.
RHWaveSpec rh_preset(const std::string& name, std::size_t J, double alpha, double Omega,
                     const std::vector<YCoefficient>& coeffs = {});

/// Unit-L2 field x1 x3 at truncation J.
SpectralField unit_x1x3(std::size_t J);

}  // namespace vortsphere
