#include "optimize.hpp"

#include <cstdint>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <boost/math/tools/minima.hpp>

namespace vortsphere::detail {

namespace {

using Objective = std::function<double(const std::vector<double>&)>;

double trampoline(const gsl_vector* v, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  std::vector<double> x(v->size);
  for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
  return f(x);
}

}  // namespace

LocalMinimum nelder_mead(const Objective& f, std::vector<double> x0, double step, double size_tol,
                         std::size_t max_iter) {
  const std::size_t n = x0.size();
  LocalMinimum out;
  if (n == 0) {
    out.value = f(x0);
    out.converged = true;
    return out;
  }
  gsl_set_error_handler_off();
  gsl_multimin_function fn{&trampoline, n, const_cast<Objective*>(&f)};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* steps = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0[i]);
    gsl_vector_set(steps, i, step);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, steps);

  std::size_t iter = 0;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && iter < max_iter) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), size_tol);
  }
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(s->x, i);
  out.value = s->fval;
  out.iterations = iter;
  out.converged = status == GSL_SUCCESS;

  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(steps);
  gsl_vector_free(x);
  return out;
}

std::pair<double, double> minimize_bracketed(const std::function<double(double)>& f, double lo, double hi, int bits,
                                             std::size_t max_iter) {
  std::uintmax_t iters = max_iter;
  return boost::math::tools::brent_find_minima(f, lo, hi, bits, iters);
}

}  // namespace vortsphere::detail
