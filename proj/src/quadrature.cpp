#include "stable_llt/quadrature.hpp"

#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

struct WorkspaceFree {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

double trampoline(double t, void* params) { return (*static_cast<const std::function<double(double)>*>(params))(t); }

}  // namespace

QuadratureResult gauss_kronrod_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                        std::size_t max_intervals) {
  if (!(b > a)) throw InvalidArgument("gauss_kronrod_adaptive: need b > a");
  if (!(abs_tol > 0.0)) throw InvalidArgument("gauss_kronrod_adaptive: tolerance must be positive");
  if (max_intervals < 1) throw InvalidArgument("gauss_kronrod_adaptive: need at least one interval");
  std::unique_ptr<gsl_integration_workspace, WorkspaceFree> work(gsl_integration_workspace_alloc(max_intervals));
  if (!work) throw NumericalError("gauss_kronrod_adaptive: workspace allocation failed");

  QuadratureResult out;
  auto counted = [&](double t) {
    ++out.evaluations;
    return f(t);
  };
  const std::function<double(double)> g = counted;
  gsl_function fn{&trampoline, const_cast<std::function<double(double)>*>(&g)};
  const gsl_error_handler_t* previous = gsl_set_error_handler_off();
  const int status = gsl_integration_qag(&fn, a, b, abs_tol, 0.0, max_intervals, GSL_INTEG_GAUSS15, work.get(),
                                         &out.value, &out.error);
  gsl_set_error_handler(previous);
  out.converged = status == GSL_SUCCESS && out.error <= abs_tol;
  return out;
}

}  // namespace stable_llt
