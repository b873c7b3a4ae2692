#pragma once

#include <array>

#include "vortsphere/grid.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rigid rotation of S^2 by angle theta about the unit axis p (right-hand rule):
///   R x = cos(theta) x + sin(theta) (p x x) + (1 - cos(theta)) (p . x) p.
struct RotationSpec {
  Vec3 axis{0.0, 0.0, 1.0};
  double angle = 0.0;

  /// Validates |axis| = 1 within 1e-12.
  RotationSpec(Vec3 p, double theta);
  RotationSpec() = default;

  Mat3 matrix() const;
  Vec3 apply(const Vec3& x) const;
};

Vec3 mat_vec(const Mat3& R, const Vec3& x);
Mat3 multiply(const Mat3& A, const Mat3& B);
Mat3 transpose(const Mat3& A);
/// Axis-angle form of a rotation matrix (angle in [0, pi]).
RotationSpec axis_angle(const Mat3& R);
/// Some rotation taking e3 onto the unit vector q.
Mat3 align_e3_to(const Vec3& q);

double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
Vec3 normalized(const Vec3& a);

/// Coefficients of x -> f(R x). Rotations about +/-e3 use the exact phase
/// path a_{j,m} -> exp(i m theta) a_{j,m}; other axes synthesize at rotated
/// nodes of `grid` and re-analyze (exact at band limit).
SpectralField rotate(const SpectralField& a, const RotationSpec& r, const Grid& grid);
SpectralField rotate(const SpectralField& a, const RotationSpec& r);
SpectralField rotate(const SpectralField& a, const Mat3& R, const Grid& grid);
/// Composition with the rotation about e3 by theta.
SpectralField rotate_about_e3(const SpectralField& a, double theta);

}  // namespace vortsphere
