#pragma once

#include <stdexcept>

#include "vortsphere/grid.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

/// Raised when a mean-zero input carries a mean above tolerance.
class MeanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Laplace-Beltrami operator: degree-j coefficients scale by -j(j+1).
SpectralField laplacian(const SpectralField& a);

/// Inverse of -Laplacian on mean-zero fields: degree-j coefficients scale by
/// 1/(j(j+1)); the output has zero mean. Throws MeanError if |a_{0,0}| exceeds
/// mean_tol.
SpectralField green(const SpectralField& a, double mean_tol = 1e-10);

/// Spectral coefficients of grad_perp(psi) . grad(zeta), with grad_perp v = (grad v) x x.
/// In (longitude, mu) coordinates this is
///   d(zeta)/d(lon) * d(psi)/d(mu) - d(zeta)/d(mu) * d(psi)/d(lon).
/// The grid must resolve the quadratic product (3/2 rule) unless
/// allow_aliasing is set, in which case it only has to carry degree J.
SpectralField jacobian(const SpectralField& psi, const SpectralField& zeta, const Grid& grid,
                       bool allow_aliasing = false);

/// Integral of u*v over the sphere (Parseval).
double inner(const SpectralField& a, const SpectralField& b);
double l2_norm(const SpectralField& a);

/// Removes the mean (a_{0,0}) and returns the removed integral of the field.
double remove_mean(SpectralField& a);

}  // namespace vortsphere
