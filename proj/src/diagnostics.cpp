#include "vortsphere/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vortsphere/operators.hpp"
#include "vortsphere/transform.hpp"

namespace vortsphere {

namespace {

void require_mean_zero(const SpectralField& zeta) {
  const double scale = std::max(1.0, l2_norm(zeta));
  if (std::abs(zeta(0, 0)) > 1e-10 * scale)
    throw MeanError("diagnostics: field has nonzero mean coefficient " + std::to_string(std::abs(zeta(0, 0))));
}

Vec3 moment_on(const GridField& f) {
  const Grid& g = f.grid;
  Vec3 m{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.nlat; ++i) {
    Vec3 row{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < g.nlon; ++k) {
      const Vec3 x = g.point(i, k);
      const double v = f.at(i, k);
      for (int c = 0; c < 3; ++c) row[c] += x[c] * v;
    }
    for (int c = 0; c < 3; ++c) m[c] += row[c] * g.cell_area(i);
  }
  return m;
}

}  // namespace

double energy(const SpectralField& zeta) {
  double e = 0.0;
  for (std::size_t j = 1; j <= zeta.truncation(); ++j) e += degree_energy(zeta, j) / static_cast<double>(j * (j + 1));
  return 0.5 * e;
}

Vec3 moment(const SpectralField& zeta) {
  return moment_on(synthesize(zeta, transform_grid(std::max<std::size_t>(zeta.truncation(), 1))));
}

Diagnostics diagnostics(const SpectralField& zeta, const std::vector<double>& p_list, std::size_t casimir_order) {
  require_mean_zero(zeta);
  std::size_t order = std::max<std::size_t>(casimir_order, 2);
  for (double p : p_list) order = std::max(order, static_cast<std::size_t>(std::ceil(p)));
  const std::size_t J = std::max<std::size_t>(zeta.truncation(), 1);
  const GridField f = synthesize(zeta, power_grid(J, order));

  Diagnostics d;
  d.energy = energy(zeta);
  d.moment = moment_on(f);
  for (double p : p_list) d.lp_norms.push_back({p, lp_norm(f, p)});

  d.casimir_moments.assign(casimir_order, 0.0);
  const Grid& g = f.grid;
  for (std::size_t i = 0; i < g.nlat; ++i) {
    std::vector<double> row(casimir_order, 0.0);
    for (std::size_t k = 0; k < g.nlon; ++k) {
      const double v = f.at(i, k);
      double power = 1.0;
      for (std::size_t n = 0; n < casimir_order; ++n) {
        power *= v;
        row[n] += power;
      }
    }
    for (std::size_t n = 0; n < casimir_order; ++n) d.casimir_moments[n] += row[n] * g.cell_area(i);
  }
  if (casimir_order >= 2) {
    d.enstrophy = d.casimir_moments[1];
  } else {
    d.enstrophy = inner(zeta, zeta);
  }
  return d;
}

}  // namespace vortsphere
