#pragma once

#include <cstddef>
#include <vector>

#include "vortsphere/grid.hpp"
#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

struct LpNorm {
  double p;
  double value;
};

/// Conserved and monitored integrals of a vorticity field.
struct Diagnostics {
  double energy = 0.0;                  // (1/2) integral zeta G zeta
  Vec3 moment{0.0, 0.0, 0.0};           // integral x zeta
  std::vector<LpNorm> lp_norms;
  double enstrophy = 0.0;               // integral zeta^2
  std::vector<double> casimir_moments;  // [k-1] -> integral zeta^k, k = 1..order
};

/// E(zeta) = (1/2) sum |a_{j,m}|^2 / (j(j+1)).
double energy(const SpectralField& zeta);
/// Moment vector by quadrature against x1, x2, x3.
Vec3 moment(const SpectralField& zeta);

/// Evaluates all diagnostics. Quadratures run on a grid exact for
/// casimir_order-th powers of degree-J fields; L^p norms with non-even p are
/// quadrature-limited since |zeta|^p is not band-limited.
Diagnostics diagnostics(const SpectralField& zeta, const std::vector<double>& p_list,
                        std::size_t casimir_order = 4);

}  // namespace vortsphere
