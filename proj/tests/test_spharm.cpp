#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"
#include "vortsphere/coeff_io.hpp"
#include "vortsphere/diagnostics.hpp"
#include "vortsphere/grid.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rotation.hpp"
#include "vortsphere/transform.hpp"

using namespace vortsphere;
using vortsphere::testing::max_abs_diff;
using vortsphere::testing::random_field;

namespace {
constexpr double kPi = std::numbers::pi;

SpectralField field_of(std::size_t J, double (*f)(const Vec3&)) {
  const Grid g = transform_grid(J);
  return analyze(sample(g, [&](const Vec3& x) { return f(x); }), J);
}
double x1(const Vec3& x) { return x[0]; }
double x2(const Vec3& x) { return x[1]; }
double x3(const Vec3& x) { return x[2]; }
}  // namespace

TEST_CASE("make_grid: two-point rule and total area") {
  const Grid g2 = make_grid(2, 4);
  CHECK(g2.mu_nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(g2.mu_nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

  for (auto [nlat, nlon] : {std::pair{2, 4}, {24, 48}, {33, 64}, {97, 200}}) {
    const Grid g = make_grid(nlat, nlon);
    double area = 0.0;
    for (std::size_t i = 0; i < g.nlat; ++i) area += g.cell_area(i) * static_cast<double>(g.nlon);
    CHECK(std::abs(area - 4 * kPi) / (4 * kPi) < 1e-13);
  }
  const Grid g8 = make_grid(8, 16);
  CHECK(std::abs(integrate(sample(g8, [](const Vec3& x) { return x[2] * x[2]; })) - 4 * kPi / 3) < 1e-12);
}

TEST_CASE("make_grid rejects bad sizes") {
  CHECK_THROWS_AS(make_grid(1, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 7), std::invalid_argument);
}

TEST_CASE("analyze: x3 is sqrt(4pi/3) Y_{1,0}") {
  const std::size_t J = 6;
  const SpectralField a = field_of(J, x3);
  for (std::size_t j = 0; j <= J; ++j)
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) {
      const Complex expected = (j == 1 && m == 0) ? Complex(std::sqrt(4 * kPi / 3), 0) : Complex(0, 0);
      CHECK(std::abs(a(j, m) - expected) < 1e-12);
    }
  const SpectralField z = analyze(GridField(transform_grid(J)), J);
  CHECK(max_abs_diff(z, SpectralField(J)) == 0.0);
}

TEST_CASE("analyze rejects an undersized grid") {
  CHECK_THROWS_AS(analyze(GridField(make_grid(4, 8)), 6), ResolutionError);
}

TEST_CASE("analyze/synthesize round trip") {
  for (std::size_t J : {1u, 5u, 21u, 42u}) {
    const Grid g = transform_grid(J);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SpectralField a = random_field(J, seed * 31 + J);
      a(0, 0) = 0.7;
      const SpectralField b = analyze(synthesize(a, g), J);
      CHECK(max_abs_diff(a, b) < 1e-12);
      CHECK(b.symmetry_defect() < 1e-15);
    }
  }
}

TEST_CASE("synthesize: constant and degree-2 fields") {
  SpectralField a(4);
  a(0, 0) = std::sqrt(4 * kPi);
  const GridField f = synthesize(a, make_grid(6, 12));
  for (double v : f.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  const Grid g = make_grid(10, 20);
  const GridField x1x2 = sample(g, [](const Vec3& x) { return x[0] * x[1]; });
  const SpectralField c = analyze(x1x2, 4);
  for (std::size_t j = 0; j <= 4; ++j)
    if (j != 2) CHECK(degree_energy(c, j) < 1e-26);
  const GridField back = synthesize(c, g);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::abs(back.values[n] - x1x2.values[n]) < 1e-12);
  for (double v : synthesize(SpectralField(4), g).values) CHECK(v == 0.0);
}

TEST_CASE("laplacian and green eigenvalues") {
  const std::size_t J = 8;
  const SpectralField x3f = coordinate_field(J, 2);
  CHECK(max_abs_diff(laplacian(x3f), -2.0 * x3f) == 0.0);
  // 3 x3^2 - 1 = 2 P_2(mu) = 2 sqrt(4 pi / 5) Y_{2,0}
  SpectralField q(J);
  q(2, 0) = 2.0 * std::sqrt(4 * kPi / 5);
  CHECK(max_abs_diff(q, field_of(J, [](const Vec3& x) { return 3 * x[2] * x[2] - 1; })) < 1e-13);
  CHECK(max_abs_diff(laplacian(q), -6.0 * q) == 0.0);
  SpectralField c(J);
  c(0, 0) = 2.0;
  CHECK(max_abs_diff(laplacian(c), SpectralField(J)) == 0.0);

  CHECK(max_abs_diff(green(x3f), 0.5 * x3f) == 0.0);
  const SpectralField y2 = degree_part(random_field(J, 5), 2);
  CHECK(max_abs_diff(green(y2), (1.0 / 6.0) * y2) < 1e-16);
  CHECK(max_abs_diff(green(SpectralField(J)), SpectralField(J)) == 0.0);
  CHECK_THROWS_AS(green(c), MeanError);
}

TEST_CASE("Green operator identities (property)") {
  const std::size_t J = 21;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpectralField u = random_field(J, 100 + seed);
    const SpectralField v = random_field(J, 200 + seed);
    CHECK(max_abs_diff(-1.0 * laplacian(green(u)), u) < 1e-15);
    CHECK(std::abs(inner(u, green(v)) - inner(v, green(u))) < 1e-12);
    CHECK(inner(u, green(u)) > 0.0);
  }
}

TEST_CASE("jacobian orientation on coordinate functions") {
  const std::size_t J = 4;
  const Grid g = dealiased_grid(J);
  // ((grad x3) x x) . grad x1 = -x2 and ((grad x1) x x) . grad x2 = -x3
  CHECK(max_abs_diff(jacobian(field_of(J, x3), field_of(J, x1), g), -1.0 * field_of(J, x2)) < 1e-13);
  CHECK(max_abs_diff(jacobian(field_of(J, x1), field_of(J, x2), g), -1.0 * field_of(J, x3)) < 1e-13);
  CHECK_THROWS_AS(jacobian(field_of(J, x1), field_of(J, x2), transform_grid(J)), ResolutionError);
}

TEST_CASE("jacobian vanishes for parallel gradients") {
  const std::size_t J = 12;
  const Grid g = dealiased_grid(J);
  SpectralField psi(J), zeta(J);
  for (std::size_t j = 1; j <= J; ++j) {
    psi(j, 0) = 1.0 / (j + 1.0);
    zeta(j, 0) = std::cos(static_cast<double>(j));
  }
  CHECK(l2_norm(jacobian(psi, zeta, g)) < 1e-12);
  const SpectralField lin = linear_field(J, {0.3, -0.4, 0.5});
  CHECK(l2_norm(jacobian(green(lin), lin, g)) < 1e-13);
}

TEST_CASE("jacobian bracket orthogonality (property)") {
  const std::size_t J = 21;
  const Grid g = dealiased_grid(J);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpectralField zeta = random_field(J, 300 + seed);
    const SpectralField psi = random_field(J, 400 + seed);
    const SpectralField jz = jacobian(green(zeta), zeta, g);
    CHECK(std::abs(inner(zeta, jz)) < 1e-11);
    const SpectralField jp = jacobian(psi, zeta, g);
    const double scale = l2_norm(psi) * l2_norm(zeta);
    CHECK(std::abs(inner(zeta, jp)) < 1e-11 * scale);
    CHECK(std::abs(inner(psi, jp)) < 1e-11 * scale);
  }
}

TEST_CASE("rotate: identity, zonal invariance and the Rodrigues quarter turn") {
  const std::size_t J = 10;
  const SpectralField a = random_field(J, 7);
  CHECK(max_abs_diff(rotate(a, RotationSpec({0.6, 0.0, 0.8}, 0.0)), a) == 0.0);
  const SpectralField x3f = field_of(J, x3);
  CHECK(max_abs_diff(rotate(x3f, RotationSpec({0, 0, 1}, 1.234)), x3f) < 1e-15);
  // R^{e3}_{pi/2} x = (-x2, x1, x3), so x1 o R = -x2.
  const SpectralField x1f = field_of(J, x1);
  const SpectralField minus_x2 = -1.0 * field_of(J, x2);
  CHECK(max_abs_diff(rotate(x1f, RotationSpec({0, 0, 1}, kPi / 2)), minus_x2) < 1e-14);
  CHECK(max_abs_diff(rotate(x1f, RotationSpec({0, 0, 1}, kPi / 2).matrix(), transform_grid(J)), minus_x2) < 1e-13);
}

TEST_CASE("rotate: isometry, composition and fast path (property)") {
  const std::size_t J = 21;
  const Grid g = transform_grid(J);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const SpectralField a = random_field(J, 500 + seed);
    const Vec3 p = normalized({u(rng), u(rng), u(rng)});
    const double t1 = 3 * u(rng), t2 = 3 * u(rng);
    const SpectralField r1 = rotate(a, RotationSpec(p, t1), g);
    CHECK(std::abs(l2_norm(r1) - l2_norm(a)) < 1e-11);
    const SpectralField r12 = rotate(r1, RotationSpec(p, t2), g);
    CHECK(max_abs_diff(r12, rotate(a, RotationSpec(p, t1 + t2), g)) < 1e-11);
    const SpectralField slow = rotate(a, RotationSpec({0, 0, 1}, t1).matrix(), g);
    CHECK(max_abs_diff(slow, rotate_about_e3(a, t1)) < 1e-11);
  }
}

TEST_CASE("moment equivariance m(zeta o R) = R^-1 m(zeta)") {
  const std::size_t J = 15;
  const SpectralField a = random_field(J, 11);
  const RotationSpec r(normalized({1.0, 2.0, -0.5}), 0.9);
  const Vec3 m = moment(a);
  const Vec3 mr = moment(rotate(a, r));
  const Vec3 expected = mat_vec(transpose(r.matrix()), m);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(mr[c] - expected[c]) < 1e-11);
  const Vec3 spectral = degree_one_moment(a);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(m[c] - spectral[c]) < 1e-13);
}

TEST_CASE("inner products of coordinate functions") {
  const std::size_t J = 3;
  CHECK(inner(field_of(J, x3), field_of(J, x3)) == doctest::Approx(4 * kPi / 3).epsilon(1e-13));
  CHECK(std::abs(inner(field_of(J, x1), field_of(J, x2))) < 1e-14);
  const SpectralField a = random_field(J, 3);
  CHECK(inner(a, a) >= 0.0);
  const Grid g = power_grid(J, 2);
  const GridField fa = synthesize(a, g);
  const SpectralField b = random_field(J, 4);
  const GridField fb = synthesize(b, g);
  GridField prod(g);
  for (std::size_t n = 0; n < g.size(); ++n) prod.values[n] = fa.values[n] * fb.values[n];
  CHECK(std::abs(inner(a, b) - integrate(prod)) < 1e-12);
}

TEST_CASE("diagnostics examples") {
  const std::size_t J = 8;
  const double amp = 1.7;
  const Diagnostics d = diagnostics(amp * field_of(J, x3), {2.0, 3.0});
  CHECK(d.energy == doctest::Approx(kPi * amp * amp / 3).epsilon(1e-13));
  CHECK(std::abs(d.moment[0]) < 1e-13);
  CHECK(std::abs(d.moment[1]) < 1e-13);
  CHECK(d.moment[2] == doctest::Approx(4 * kPi * amp / 3).epsilon(1e-13));
  CHECK(d.lp_norms[0].value == doctest::Approx(amp * std::sqrt(4 * kPi / 3)).epsilon(1e-13));
  // integral |x3|^3 = 2 pi * 2 * (1/4) = pi
  CHECK(d.lp_norms[1].value == doctest::Approx(amp * std::cbrt(kPi)).epsilon(1e-3));
  CHECK(d.enstrophy == doctest::Approx(amp * amp * 4 * kPi / 3).epsilon(1e-13));
  CHECK(std::abs(d.casimir_moments[2]) < 1e-12);

  SpectralField y2 = degree_part(random_field(J, 9), 2);
  y2 *= 1.0 / l2_norm(y2);
  CHECK(diagnostics(y2, {}).energy == doctest::Approx(1.0 / 12.0).epsilon(1e-14));

  const Diagnostics z = diagnostics(SpectralField(J), {2.0});
  CHECK(z.energy == 0.0);
  CHECK(z.enstrophy == 0.0);
  CHECK(z.lp_norms[0].value == 0.0);
}

TEST_CASE("coefficient dump round trip") {
  const SpectralField a = random_field(7, 42);
  std::stringstream ss;
  write_coeffs(ss, a);
  const std::string text = ss.str();
  CHECK(text.rfind("# spharm-coeffs J=7 norm=orthonormal phase=CS\n", 0) == 0);
  const SpectralField b = read_coeffs(ss);
  CHECK(b.truncation() == 7);
  CHECK(max_abs_diff(a, b) == 0.0);
  std::stringstream again;
  write_coeffs(again, b);
  CHECK(again.str() == text);

  std::stringstream bad("# spharm-coeffs J=2 norm=schmidt phase=CS\n");
  CHECK_THROWS_AS(read_coeffs(bad), FormatError);
  std::stringstream missing("# spharm-coeffs J=1 norm=orthonormal phase=CS\n0 0 1 0\n");
  CHECK_THROWS_AS(read_coeffs(missing), FormatError);
}

TEST_CASE("core operations at J=21 run well under a second") {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t J = 21;
  const SpectralField a = random_field(J, 1);
  const SpectralField b = analyze(synthesize(a, transform_grid(J)), J);
  const SpectralField c = laplacian(green(b));
  const SpectralField d = jacobian(green(a), a, dealiased_grid(J));
  (void)c;
  (void)d;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 1.0);
}
