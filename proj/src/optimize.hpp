#pragma once

// Thin wrappers over library optimizers used by the search routines.

#include <functional>
#include <vector>

namespace vortsphere::detail {

struct LocalMinimum {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex search (GSL nmsimplex2). Stops when the simplex size
/// falls below size_tol or after max_iter iterations.
LocalMinimum nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                         double step, double size_tol, std::size_t max_iter);

/// Bracketed 1-D minimization on [lo, hi] (Brent's golden-section/parabolic
/// method from Boost.Math). Returns (argmin, min).
std::pair<double, double> minimize_bracketed(const std::function<double(double)>& f, double lo, double hi,
                                             int bits = 40, std::size_t max_iter = 200);

}  // namespace vortsphere::detail
