#include "vortsphere/waves.hpp"

#include <cmath>
#include <stdexcept>

#include "vortsphere/dynamics.hpp"
#include "vortsphere/operators.hpp"
#include "vortsphere/rotation.hpp"

namespace vortsphere {

double rh_rotation_rate(std::size_t degree, double alpha) {
  if (degree < 1) throw std::invalid_argument("rh_rotation_rate: degree must be >= 1");
  const double lambda = static_cast<double>(degree * (degree + 1));
  return (2.0 - lambda) / (2.0 * lambda) * alpha;
}

RHWaveSpec make_rh_wave(std::size_t degree, const SpectralField& Y, double alpha, double Omega,
                        double beta_degree_one) {
  if (degree < 1) throw std::invalid_argument("make_rh_wave: degree must be >= 1");
  if (degree > Y.truncation())
    throw std::invalid_argument("make_rh_wave: degree " + std::to_string(degree) + " exceeds truncation " +
                                std::to_string(Y.truncation()));
  double off = 0.0;
  for (std::size_t j = 0; j <= Y.truncation(); ++j)
    if (j != degree) off += degree_energy(Y, j);
  if (off > 1e-12)
    throw std::invalid_argument("make_rh_wave: Y has energy " + std::to_string(off) + " outside degree " +
                                std::to_string(degree));
  RHWaveSpec w;
  w.degree = degree;
  w.Y = degree_part(Y, degree);
  w.Y.enforce_real_symmetry();
  w.alpha = alpha;
  w.Omega = Omega;
  w.beta = degree == 1 ? beta_degree_one : rh_rotation_rate(degree, alpha);
  return w;
}

SpectralField exact_rh_solution(const RHWaveSpec& w, double t) {
  SpectralField out = rotate_about_e3(w.Y, (w.beta + w.Omega) * t);
  out(1, 0) += w.alpha * coordinate_field(w.truncation(), 2)(1, 0);
  return out;
}

SpectralField exact_rh_tendency(const RHWaveSpec& w, double t) {
  const double rate = w.beta + w.Omega;
  SpectralField out = rotate_about_e3(w.Y, rate * t);
  for (std::size_t j = 1; j <= out.truncation(); ++j)
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) out(j, m) *= Complex(0.0, m * rate);
  return out;
}

double rh_residual(const RHWaveSpec& w, const Grid& grid) {
  const SpectralField zeta = exact_rh_solution(w, 0.0);
  return l2_norm(exact_rh_tendency(w, 0.0) - rhs(zeta, w.Omega, grid));
}

SpectralField unit_x1x3(std::size_t J) {
  if (J < 2) throw std::invalid_argument("unit_x1x3: truncation must be >= 2");
  SpectralField y(J);
  y.set_real_pair(2, 1, Complex(-1.0 / std::sqrt(2.0), 0.0));
  return y;
}

RHWaveSpec rh_preset(const std::string& name, std::size_t J, double alpha, double Omega,
                     const std::vector<YCoefficient>& coeffs) {
  const std::string prefix = "rh-j";
  if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size())
    throw std::invalid_argument("unknown wave preset '" + name + "' (expected rh-j<degree>)");
  std::size_t degree = 0;
  for (std::size_t i = prefix.size(); i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') throw std::invalid_argument("unknown wave preset '" + name + "'");
    degree = degree * 10 + static_cast<std::size_t>(name[i] - '0');
  }
  if (degree < 1 || degree > J)
    throw std::invalid_argument("wave preset '" + name + "' needs 1 <= degree <= J=" + std::to_string(J));

  SpectralField Y(J);
  if (coeffs.empty()) {
    Y.set_real_pair(degree, 1, Complex(-1.0 / std::sqrt(2.0), 0.0));
  } else {
    for (const auto& c : coeffs) {
      if (c.m < 0 || c.m > static_cast<int>(degree))
        throw std::invalid_argument("wave preset: coefficient order m=" + std::to_string(c.m) + " out of range");
      Y.set_real_pair(degree, c.m, Complex(c.re, c.m == 0 ? 0.0 : c.im));
    }
  }
  return make_rh_wave(degree, Y, alpha, Omega);
}

}  // namespace vortsphere
