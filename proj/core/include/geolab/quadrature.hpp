#pragma once

#include <functional>

namespace geolab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated |G7 - K15| estimate
  long evals = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 7-15 on a finite interval. Bisects the worst
// panel until every panel meets tol = max(abs_tol, rel_tol * |integral|)
// scaled by panel share, or max_panels is hit.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol = 1e-10, double abs_tol = 1e-14,
                              int max_panels = 4000);

// Same, but a and/or b may be +-infinity (mapped through t = tan(u) so the
// integrand is only ever evaluated at finite interior points).
QuadResult integrate_improper(const std::function<double(double)>& f, double a, double b,
                              double rel_tol = 1e-10, double abs_tol = 1e-14,
                              int max_panels = 4000);

}  // namespace geolab
