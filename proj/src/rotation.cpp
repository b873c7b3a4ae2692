#include "vortsphere/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vortsphere/transform.hpp"

namespace vortsphere {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return {a[0] / n, a[1] / n, a[2] / n};
}

RotationSpec::RotationSpec(Vec3 p, double theta) : axis(p), angle(theta) {
  if (std::abs(norm(p) - 1.0) > 1e-12) throw std::invalid_argument("RotationSpec: axis must be a unit vector");
}

Mat3 RotationSpec::matrix() const {
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  const auto& p = axis;
  Mat3 R{};
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) R[r][col] = t * p[r] * p[col] + (r == col ? c : 0.0);
  // sin(theta) [p]_x
  R[0][1] -= s * p[2];
  R[0][2] += s * p[1];
  R[1][0] += s * p[2];
  R[1][2] -= s * p[0];
  R[2][0] -= s * p[1];
  R[2][1] += s * p[0];
  return R;
}

Vec3 RotationSpec::apply(const Vec3& x) const {
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec3 px = cross(axis, x);
  const double pdx = dot(axis, x);
  return {c * x[0] + s * px[0] + (1 - c) * pdx * axis[0], c * x[1] + s * px[1] + (1 - c) * pdx * axis[1],
          c * x[2] + s * px[2] + (1 - c) * pdx * axis[2]};
}

Vec3 mat_vec(const Mat3& R, const Vec3& x) {
  return {dot(R[0], x), dot(R[1], x), dot(R[2], x)};
}

Mat3 multiply(const Mat3& A, const Mat3& B) {
  Mat3 C{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) C[i][j] += A[i][k] * B[k][j];
  return C;
}

Mat3 transpose(const Mat3& A) {
  Mat3 T{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) T[i][j] = A[j][i];
  return T;
}

RotationSpec axis_angle(const Mat3& R) {
  const double trace = R[0][0] + R[1][1] + R[2][2];
  const double angle = std::acos(std::clamp((trace - 1.0) / 2.0, -1.0, 1.0));
  Vec3 v{R[2][1] - R[1][2], R[0][2] - R[2][0], R[1][0] - R[0][1]};
  if (norm(v) > 1e-9) return RotationSpec(normalized(v), angle);
  if (angle < 1e-6) return RotationSpec({0.0, 0.0, 1.0}, 0.0);
  // angle near pi: axis from the symmetric part, R + I = 2 p p^T.
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (R[i][i] > R[best][best]) best = i;
  Vec3 p{R[0][best], R[1][best], R[2][best]};
  p[best] += 1.0;
  return RotationSpec(normalized(p), angle);
}

Mat3 align_e3_to(const Vec3& q_in) {
  const Vec3 q = normalized(q_in);
  const Vec3 e3{0.0, 0.0, 1.0};
  const Vec3 axis = cross(e3, q);
  const double s = norm(axis);
  if (s < 1e-15) {
    if (q[2] > 0) return RotationSpec(e3, 0.0).matrix();
    return RotationSpec({1.0, 0.0, 0.0}, std::numbers::pi).matrix();
  }
  return RotationSpec(normalized(axis), std::atan2(s, q[2])).matrix();
}

SpectralField rotate_about_e3(const SpectralField& a, double theta) {
  SpectralField out = a;
  for (std::size_t j = 0; j <= a.truncation(); ++j)
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m)
      if (m != 0) out(j, m) *= std::polar(1.0, m * theta);
  return out;
}

SpectralField rotate(const SpectralField& a, const Mat3& R, const Grid& grid) {
  std::vector<Vec3> nodes;
  nodes.reserve(grid.size());
  for (std::size_t i = 0; i < grid.nlat; ++i)
    for (std::size_t k = 0; k < grid.nlon; ++k) nodes.push_back(mat_vec(R, grid.point(i, k)));
  return analyze(GridField(grid, evaluate(a, nodes)), a.truncation());
}

SpectralField rotate(const SpectralField& a, const RotationSpec& r, const Grid& grid) {
  if (r.angle == 0.0) return a;
  if (std::abs(r.axis[0]) < 1e-15 && std::abs(r.axis[1]) < 1e-15)
    return rotate_about_e3(a, r.axis[2] > 0 ? r.angle : -r.angle);
  return rotate(a, r.matrix(), grid);
}

SpectralField rotate(const SpectralField& a, const RotationSpec& r) {
  return rotate(a, r, transform_grid(a.truncation()));
}

}  // namespace vortsphere
