#include "geolab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace geolab {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (positive half; symmetric).
// Even-indexed Kronrod nodes carry the embedded Gauss-7 rule.
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;
  double err;
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b, long& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double k15 = 0.0, g7 = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kKronrodNodes[i];
    double fv;
    if (i == 7) {
      fv = f(c);
      ++evals;
    } else {
      fv = f(c - dx) + f(c + dx);
      evals += 2;
    }
    k15 += kKronrodWeights[i] * fv;
    // Gauss-7 nodes sit at the odd Kronrod indices (center included)
    if (i % 2 == 1) g7 += kGaussWeights[i / 2] * fv;
  }
  k15 *= h;
  g7 *= h;
  Panel p{a, b, k15, std::abs(k15 - g7)};
  return p;
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_tol, int max_panels) {
  QuadResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<Panel> panels;
  panels.push_back(eval_panel(f, a, b, res.evals));
  for (;;) {
    double total = 0.0, err = 0.0;
    size_t worst = 0;
    for (size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      err += panels[i].err;
      if (panels[i].err > panels[worst].err) worst = i;
    }
    const double tol = std::max(abs_tol, rel_tol * std::abs(total));
    if (err <= tol || static_cast<int>(panels.size()) >= max_panels) {
      res.value = sign * total;
      res.error = err;
      res.converged = err <= tol;
      return res;
    }
    Panel w = panels[worst];
    const double mid = 0.5 * (w.a + w.b);
    panels[worst] = eval_panel(f, w.a, mid, res.evals);
    panels.push_back(eval_panel(f, mid, w.b, res.evals));
  }
}

QuadResult integrate_improper(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_tol, int max_panels) {
  const bool inf_a = std::isinf(a);
  const bool inf_b = std::isinf(b);
  if (!inf_a && !inf_b) return integrate_adaptive(f, a, b, rel_tol, abs_tol, max_panels);
  // t = tan(u): dt = (1 + tan^2 u) du, u ranges inside (-pi/2, pi/2)
  const double ua = inf_a ? -M_PI / 2 : std::atan(a);
  const double ub = inf_b ? M_PI / 2 : std::atan(b);
  auto g = [&f](double u) {
    const double t = std::tan(u);
    const double jac = 1.0 + t * t;
    const double fv = f(t);
    return fv * jac;
  };
  return integrate_adaptive(g, ua, ub, rel_tol, abs_tol, max_panels);
}

}  // namespace geolab
