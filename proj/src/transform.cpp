#include "vortsphere/transform.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

namespace vortsphere {

namespace {
constexpr double kPi = std::numbers::pi;
}

void LegendreTable::evaluate(double mu, std::span<double> values, std::span<double> derivatives) const {
  const double s2 = 1.0 - mu * mu;
  const double s = std::sqrt(s2);
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (std::size_t m = 0; m <= J_; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    const std::size_t base = offset(m);
    values[base] = pmm;
    if (m + 1 <= J_) values[base + 1] = std::sqrt(2.0 * m + 3.0) * mu * pmm;
    for (std::size_t j = m + 2; j <= J_; ++j) {
      const double jj = static_cast<double>(j);
      const double mm = static_cast<double>(m);
      const double a = std::sqrt((4.0 * jj * jj - 1.0) / (jj * jj - mm * mm));
      const double b = std::sqrt(((jj - 1.0) * (jj - 1.0) - mm * mm) / (4.0 * (jj - 1.0) * (jj - 1.0) - 1.0));
      values[base + (j - m)] = a * (mu * values[base + (j - m) - 1] - b * values[base + (j - m) - 2]);
    }
  }
  if (derivatives.empty()) return;
  for (std::size_t m = 0; m <= J_; ++m) {
    const std::size_t base = offset(m);
    for (std::size_t j = m; j <= J_; ++j) {
      const double jj = static_cast<double>(j);
      const double mm = static_cast<double>(m);
      double d = -jj * mu * values[base + (j - m)];
      if (j > m)
        d += std::sqrt((2.0 * jj + 1.0) / (2.0 * jj - 1.0) * (jj * jj - mm * mm)) * values[base + (j - m) - 1];
      derivatives[base + (j - m)] = d / s2;
    }
  }
}

SphericalTransform::SphericalTransform(const Grid& grid, std::size_t J)
    : grid_(grid), J_(J), table_(J) {
  if (grid.nlat < J + 1 || grid.nlon < 2 * J + 1)
    throw ResolutionError("grid " + std::to_string(grid.nlat) + "x" + std::to_string(grid.nlon) +
                          " cannot represent truncation J=" + std::to_string(J));
  const std::size_t np = table_.packed_size();
  pbar_.resize(grid.nlat * np);
  dpbar_.resize(grid.nlat * np);
  for (std::size_t i = 0; i < grid.nlat; ++i)
    table_.evaluate(grid.mu_nodes[i], std::span(pbar_).subspan(i * np, np),
                    std::span(dpbar_).subspan(i * np, np));
  cos_.resize(grid.nlon * (J + 1));
  sin_.resize(grid.nlon * (J + 1));
  for (std::size_t k = 0; k < grid.nlon; ++k)
    for (std::size_t m = 0; m <= J; ++m) {
      // Reduce m*k modulo nlon before scaling to keep the phase exact.
      const double phase = 2.0 * kPi * static_cast<double>((m * k) % grid.nlon) / static_cast<double>(grid.nlon);
      cos_[k * (J + 1) + m] = std::cos(phase);
      sin_[k * (J + 1) + m] = std::sin(phase);
    }
}

void SphericalTransform::fourier_synthesis(std::span<const Complex> row_coeffs, std::span<double> row) const {
  const std::size_t M = J_ + 1;
  for (std::size_t k = 0; k < grid_.nlon; ++k) {
    const double* c = &cos_[k * M];
    const double* s = &sin_[k * M];
    double acc = 0.0;
    for (std::size_t m = 1; m < M; ++m) acc += row_coeffs[m].real() * c[m] - row_coeffs[m].imag() * s[m];
    row[k] = row_coeffs[0].real() + 2.0 * acc;
  }
}

GridField SphericalTransform::synthesize(const SpectralField& a) const {
  GridField out(grid_);
  const std::size_t np = table_.packed_size();
  const std::size_t Ja = std::min(J_, a.truncation());
  std::vector<Complex> F(J_ + 1);
  for (std::size_t i = 0; i < grid_.nlat; ++i) {
    const double* P = &pbar_[i * np];
    for (std::size_t m = 0; m <= J_; ++m) {
      Complex acc = 0.0;
      for (std::size_t j = m; j <= Ja; ++j) acc += a(j, static_cast<int>(m)) * P[table_.packed(j, m)];
      F[m] = acc;
    }
    fourier_synthesis(F, std::span(out.values).subspan(i * grid_.nlon, grid_.nlon));
  }
  return out;
}

void SphericalTransform::synthesize_derivatives(const SpectralField& a, GridField& d_lon, GridField& d_mu) const {
  d_lon = GridField(grid_);
  d_mu = GridField(grid_);
  const std::size_t np = table_.packed_size();
  const std::size_t Ja = std::min(J_, a.truncation());
  std::vector<Complex> Fl(J_ + 1), Fm(J_ + 1);
  for (std::size_t i = 0; i < grid_.nlat; ++i) {
    const double* P = &pbar_[i * np];
    const double* dP = &dpbar_[i * np];
    for (std::size_t m = 0; m <= J_; ++m) {
      Complex acc = 0.0, dacc = 0.0;
      for (std::size_t j = m; j <= Ja; ++j) {
        const Complex c = a(j, static_cast<int>(m));
        acc += c * P[table_.packed(j, m)];
        dacc += c * dP[table_.packed(j, m)];
      }
      Fl[m] = Complex(0.0, static_cast<double>(m)) * acc;
      Fm[m] = dacc;
    }
    fourier_synthesis(Fl, std::span(d_lon.values).subspan(i * grid_.nlon, grid_.nlon));
    fourier_synthesis(Fm, std::span(d_mu.values).subspan(i * grid_.nlon, grid_.nlon));
  }
}

SpectralField SphericalTransform::analyze(const GridField& f) const {
  if (!(f.grid == grid_)) throw std::invalid_argument("analyze: field lives on a different grid");
  SpectralField out(J_);
  const std::size_t M = J_ + 1;
  const std::size_t np = table_.packed_size();
  const double dlon = 2.0 * kPi / static_cast<double>(grid_.nlon);
  std::vector<double> re(M), im(M);
  for (std::size_t i = 0; i < grid_.nlat; ++i) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (std::size_t k = 0; k < grid_.nlon; ++k) {
      const double v = f.at(i, k);
      const double* c = &cos_[k * M];
      const double* s = &sin_[k * M];
      for (std::size_t m = 0; m < M; ++m) {
        re[m] += v * c[m];
        im[m] -= v * s[m];
      }
    }
    const double w = grid_.quad_weights[i] * dlon;
    const double* P = &pbar_[i * np];
    for (std::size_t m = 0; m <= J_; ++m) {
      const Complex G(w * re[m], w * im[m]);
      for (std::size_t j = m; j <= J_; ++j) out(j, static_cast<int>(m)) += G * P[table_.packed(j, m)];
    }
  }
  out.enforce_real_symmetry();
  return out;
}

std::shared_ptr<const SphericalTransform> transform_for(const Grid& grid, std::size_t J) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::shared_ptr<const SphericalTransform>> cache;
  const auto key = std::make_tuple(grid.nlat, grid.nlon, J);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto plan = std::make_shared<const SphericalTransform>(grid, J);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(plan)).first->second;
}

SpectralField analyze(const GridField& f, std::size_t J) { return transform_for(f.grid, J)->analyze(f); }

GridField synthesize(const SpectralField& a, const Grid& grid) {
  return transform_for(grid, a.truncation())->synthesize(a);
}

std::vector<double> evaluate(const SpectralField& a, std::span<const Vec3> points) {
  const std::size_t J = a.truncation();
  LegendreTable table(J);
  std::vector<double> P(table.packed_size());
  std::vector<double> out(points.size());
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Vec3& x = points[n];
    const double mu = std::clamp(x[2], -1.0, 1.0);
    table.evaluate(mu, P);
    const double lon = std::atan2(x[1], x[0]);
    const Complex step = std::polar(1.0, lon);
    Complex phase = 1.0;
    double acc = 0.0;
    for (std::size_t m = 0; m <= J; ++m) {
      Complex F = 0.0;
      for (std::size_t j = m; j <= J; ++j) F += a(j, static_cast<int>(m)) * P[table.packed(j, m)];
      const double term = (F * phase).real();
      acc += (m == 0) ? term : 2.0 * term;
      phase *= step;
    }
    out[n] = acc;
  }
  return out;
}

}  // namespace vortsphere
