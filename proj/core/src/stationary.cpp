#include "geolab/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <utility>

namespace geolab {

namespace {

Vec with_shift(const Vec& x, int a, double d) {
  Vec y = x;
  y(a) += d;
  return y;
}

// 4th-order central difference, step h per axis
double fd_scalar(const std::function<double(const Vec&)>& f, const Vec& x, int a, double h) {
  return (f(with_shift(x, a, -2 * h)) - 8.0 * f(with_shift(x, a, -h)) +
          8.0 * f(with_shift(x, a, h)) - f(with_shift(x, a, 2 * h))) /
         (12.0 * h);
}

Vec fd_vector(const std::function<Vec(const Vec&)>& f, const Vec& x, int a, double h) {
  return (f(with_shift(x, a, -2 * h)) - 8.0 * f(with_shift(x, a, -h)) +
          8.0 * f(with_shift(x, a, h)) - f(with_shift(x, a, 2 * h))) /
         (12.0 * h);
}

void validate_curve(const StationaryModel& m, const DiscreteCurve& curve) {
  const int dim = m.spatial_dim() + 1;
  if (curve.p.size() != dim || curve.q.size() != dim)
    throw Error("stationary curve: endpoint dimension mismatch");
  for (const Vec& x : curve.nodes)
    if (x.size() != dim) throw Error("stationary curve: node dimension mismatch");
}

}  // namespace

GeometryModel StationaryModel::chart() const {
  if (!base.has_metric()) throw Error("stationary chart: base metric is required");
  if (base.index != 0) throw Error("stationary chart: base model must be Riemannian");
  if (!beta) throw Error("stationary chart: beta is required");
  if (!omega) throw Error("stationary chart: omega is required");
  const int n = base.dim;
  if (n <= 0) throw Error("stationary chart: base dimension must be positive");

  const StationaryModel self = *this;  // lambdas own their data
  GeometryModel g;
  g.dim = n + 1;
  g.index = 1;
  g.name = name + ":chart";

  // G = [[-beta, omega^T], [omega, g0]] on coordinates (t, x)
  g.metric = [self, n](const Vec& y) {
    if (y.size() != n + 1) throw Error("stationary chart: point dimension mismatch");
    const Vec x = y.tail(n);
    const Vec w = self.omega(x);
    if (w.size() != n) throw Error("stationary chart: omega dimension mismatch");
    Mat G = Mat::Zero(n + 1, n + 1);
    G(0, 0) = -self.beta(x);
    G.block(0, 1, 1, n) = w.transpose();
    G.block(1, 0, n, 1) = w;
    G.block(1, 1, n, n) = self.base.metric(x);
    return G;
  };

  g.metric_deriv = [self, n](const Vec& y) {
    if (y.size() != n + 1) throw Error("stationary chart: point dimension mismatch");
    const Vec x = y.tail(n);
    // d[0] stays zero: the chart is independent of t
    std::vector<Mat> d(static_cast<std::size_t>(n + 1), Mat::Zero(n + 1, n + 1));
    Vec bg(n);
    Mat wj(n, n);  // (i, a) = d omega_i / d x^a
    if (self.beta_grad) {
      bg = self.beta_grad(x);
      if (bg.size() != n) throw Error("stationary chart: beta_grad dimension mismatch");
    } else {
      for (int a = 0; a < n; ++a)
        bg(a) = fd_scalar(self.beta, x, a, self.fd_step * std::max(1.0, std::abs(x(a))));
    }
    if (self.omega_jac) {
      wj = self.omega_jac(x);
      if (wj.rows() != n || wj.cols() != n)
        throw Error("stationary chart: omega_jac dimension mismatch");
    } else {
      for (int a = 0; a < n; ++a)
        wj.col(a) = fd_vector(self.omega, x, a, self.fd_step * std::max(1.0, std::abs(x(a))));
    }
    const std::vector<Mat> dg0 = metric_derivatives(self.base, x);
    for (int a = 0; a < n; ++a) {
      Mat& D = d[static_cast<std::size_t>(a + 1)];
      D(0, 0) = -bg(a);
      for (int i = 0; i < n; ++i) {
        D(0, i + 1) = wj(i, a);
        D(i + 1, 0) = wj(i, a);
      }
      D.block(1, 1, n, n) = dg0[static_cast<std::size_t>(a)];
    }
    return d;
  };

  if (base.domain) {
    const auto dom = base.domain;
    g.domain = [dom, n](const Vec& y) { return dom(Vec(y.tail(n))); };
  }
  if (!base.periods.empty()) {
    g.periods.assign(static_cast<std::size_t>(n + 1), 0.0);  // t axis aperiodic
    for (int a = 0; a < n && a < static_cast<int>(base.periods.size()); ++a)
      g.periods[static_cast<std::size_t>(a + 1)] = base.periods[static_cast<std::size_t>(a)];
  }
  return g;
}

double curve_action(const StationaryModel& m, const DiscreteCurve& curve) {
  validate_curve(m, curve);
  const GeometryModel g = m.chart();
  const int segs = curve.segment_count();
  const double h = curve.spacing();
  double f = 0.0;
  Mat Ga = g.metric(curve.point(0));
  for (int k = 0; k < segs; ++k) {
    const Mat Gb = g.metric(curve.point(k + 1));
    const Mat Gm = 0.5 * (Ga + Gb);
    const Vec d = curve.point(k + 1) - curve.point(k);
    f += d.dot(Gm * d) / (2.0 * h);
    Ga = Gb;
  }
  return f;
}

ActionSplit split_action(const StationaryModel& m, const DiscreteCurve& curve) {
  validate_curve(m, curve);
  const GeometryModel g = m.chart();
  const int segs = curve.segment_count();
  const double h = curve.spacing();
  ActionSplit out;
  Mat Ga = g.metric(curve.point(0));
  for (int k = 0; k < segs; ++k) {
    const Mat Gb = g.metric(curve.point(k + 1));
    const Mat Gm = 0.5 * (Ga + Gb);
    const double kk = Gm(0, 0);  // <K,K> under the averaged segment metric
    if (!(kk < 0.0)) {
      std::ostringstream os;
      os << "split_action: Killing field is not timelike along the curve (<K,K> = " << kk
         << " on segment " << k << ")";
      throw Error(os.str());
    }
    const Vec d = curve.point(k + 1) - curve.point(k);
    const Vec Gd = Gm * d;
    const double total = d.dot(Gd) / (2.0 * h);
    // <zdot,K> = (G zdot)_0, so the Killing term is (Gd)_0^2 / (kk 2h); its
    // complement against the full quadratic form is the non-negative part
    const double killing = Gd(0) * Gd(0) / kk / (2.0 * h);
    out.killing += killing;
    out.spatial += total - killing;
    Ga = Gb;
  }
  return out;
}

KillingConstantReport verify_killing_constant(const StationaryModel& m, const Trajectory& tr) {
  if (tr.samples.empty()) throw Error("verify_killing_constant: empty trajectory");
  const GeometryModel g = m.chart();
  const int dim = g.dim;
  const std::function<Vec(const Vec&)> field = [dim](const Vec&) {
    Vec k = Vec::Zero(dim);
    k(0) = 1.0;
    return k;
  };
  KillingConstantReport rep;
  std::vector<double> vals;
  vals.reserve(tr.samples.size());
  double sum = 0.0;
  for (const GeodesicState& st : tr.samples) {
    const double c = killing_charge(g, field, st);
    vals.push_back(c);
    sum += c;
  }
  rep.mean = sum / static_cast<double>(vals.size());
  for (double c : vals) rep.max_deviation = std::max(rep.max_deviation, std::abs(c - rep.mean));
  rep.relative_drift = relative_killing_drift(g, field, tr);
  return rep;
}

namespace {

// median absolute residual of the envelope model A d^alpha + B over bins
double fit_residual(const std::vector<double>& D, const std::vector<double>& Y, double A, double B,
                    double alpha) {
  std::vector<double> r(D.size());
  for (std::size_t k = 0; k < D.size(); ++k)
    r[k] = std::abs(Y[k] - (A * std::pow(D[k], alpha) + B));
  std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2), r.end());
  return r[r.size() / 2];
}

// least-absolute-deviation fit of Y ~ A D^alpha + B (A, B >= 0) over a small
// alpha grid; candidate (A, B) pairs come from exact interpolation through
// bin pairs plus the degenerate flat and zero-offset fits
GrowthFit fit_growth(const std::vector<double>& D, const std::vector<double>& Y) {
  GrowthFit fit;
  fit.bins = static_cast<int>(D.size());
  if (D.empty()) return fit;
  double best = std::numeric_limits<double>::infinity();
  for (int ia = 0; ia <= 150; ++ia) {
    const double alpha = 0.01 * ia;
    std::vector<std::pair<double, double>> cands;  // (A, B)
    for (std::size_t i = 0; i < D.size(); ++i) {
      cands.emplace_back(0.0, Y[i]);  // flat
      const double p = std::pow(D[i], alpha);
      if (p > 0.0 && Y[i] >= 0.0) cands.emplace_back(Y[i] / p, 0.0);  // through origin
      for (std::size_t j = i + 1; j < D.size(); ++j) {
        const double pi = std::pow(D[i], alpha), pj = std::pow(D[j], alpha);
        if (std::abs(pi - pj) <= 1e-12 * (pi + pj)) continue;
        const double A = (Y[i] - Y[j]) / (pi - pj);
        if (A < 0.0) continue;
        const double B = Y[i] - A * pi;
        if (B < -1e-9 * (1.0 + std::abs(Y[i]))) continue;
        cands.emplace_back(A, std::max(B, 0.0));
      }
    }
    for (const auto& [A, B] : cands) {
      const double res = fit_residual(D, Y, A, B, alpha);
      if (res + 1e-15 * (1.0 + res) < best) {  // ties keep the smaller alpha
        best = res;
        fit.alpha = alpha;
        fit.A = A;
        fit.B = B;
        fit.residual = res;
      }
    }
  }
  fit.sublinear = fit.alpha + 0.05 < 1.0;
  return fit;
}

}  // namespace

StationaryConditionsReport audit_stationary_conditions(const StationaryModel& m, const Vec& lo,
                                                       const Vec& hi, const Vec& p0,
                                                       int per_axis) {
  const int n = m.spatial_dim();
  if (lo.size() != n || hi.size() != n || p0.size() != n)
    throw Error("stationary audit: box dimension mismatch");
  if (per_axis < 2) throw Error("stationary audit: per_axis must be at least 2");
  for (int a = 0; a < n; ++a)
    if (!(hi(a) > lo(a))) throw Error("stationary audit: empty sample box");
  double total_f = 1.0;
  for (int a = 0; a < n; ++a) total_f *= per_axis;
  if (total_f > 250000.0) throw Error("stationary audit: sample grid too large");
  const int total = static_cast<int>(total_f);

  std::vector<Vec> pts(static_cast<std::size_t>(total));
  std::vector<bool> inside(static_cast<std::size_t>(total));
  int n_inside = 0;
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx;
    Vec x(n);
    for (int a = 0; a < n; ++a) {
      x(a) = lo(a) + (hi(a) - lo(a)) * (rem % per_axis) / (per_axis - 1);
      rem /= per_axis;
    }
    pts[static_cast<std::size_t>(idx)] = x;
    const bool in = m.base.in_domain(x);
    inside[static_cast<std::size_t>(idx)] = in;
    if (in) ++n_inside;
  }
  if (n_inside == 0) throw Error("stationary audit: no sample points inside the base domain");

  StationaryConditionsReport rep;
  rep.samples = n_inside;
  rep.completeness_asserted = m.base_complete_asserted;
  rep.completeness =
      m.base_complete_asserted
          ? "complete (user assertion)"
          : "undecided (completeness of the base metric is a user assertion, not checked "
            "numerically)";

  rep.beta_inf = std::numeric_limits<double>::infinity();
  rep.beta_sup = -std::numeric_limits<double>::infinity();
  std::vector<double> wnorm(static_cast<std::size_t>(total), 0.0);  // |omega|_0 per node
  for (int idx = 0; idx < total; ++idx) {
    if (!inside[static_cast<std::size_t>(idx)]) continue;
    const Vec& x = pts[static_cast<std::size_t>(idx)];
    const double b = m.beta(x);
    rep.beta_inf = std::min(rep.beta_inf, b);
    rep.beta_sup = std::max(rep.beta_sup, b);
    const Vec w = m.omega(x);
    const Mat g0 = m.base.metric(x);
    wnorm[static_cast<std::size_t>(idx)] = std::sqrt(std::max(0.0, w.dot(g0.ldlt().solve(w))));
  }

  // neighbour offsets {-1,0,1}^n \ {0}
  std::vector<std::vector<int>> offsets;
  {
    int p3 = 1;
    for (int a = 0; a < n; ++a) p3 *= 3;
    for (int code = 0; code < p3; ++code) {
      std::vector<int> off(static_cast<std::size_t>(n));
      int rem = code;
      bool zero = true;
      for (int a = 0; a < n; ++a) {
        off[static_cast<std::size_t>(a)] = rem % 3 - 1;
        if (off[static_cast<std::size_t>(a)] != 0) zero = false;
        rem /= 3;
      }
      if (!zero) offsets.push_back(off);
    }
  }

  // source: sampled node nearest to the base point
  int src = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int idx = 0; idx < total; ++idx) {
    if (!inside[static_cast<std::size_t>(idx)]) continue;
    const double d = (pts[static_cast<std::size_t>(idx)] - p0).norm();
    if (d < best_d) {
      best_d = d;
      src = idx;
    }
  }

  // g0 graph distance from the source (edge length by midpoint metric)
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(total), inf);
  dist[static_cast<std::size_t>(src)] = 0.0;
  using QItem = std::pair<double, int>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
  queue.emplace(0.0, src);
  while (!queue.empty()) {
    const auto [d, idx] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(idx)]) continue;
    std::vector<int> mi(static_cast<std::size_t>(n));
    int rem = idx;
    for (int a = 0; a < n; ++a) {
      mi[static_cast<std::size_t>(a)] = rem % per_axis;
      rem /= per_axis;
    }
    for (const auto& off : offsets) {
      int nidx = 0, stride = 1;
      bool ok = true;
      for (int a = 0; a < n; ++a) {
        const int k = mi[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)];
        if (k < 0 || k >= per_axis) {
          ok = false;
          break;
        }
        nidx += k * stride;
        stride *= per_axis;
      }
      if (!ok || !inside[static_cast<std::size_t>(nidx)]) continue;
      const Vec& xa = pts[static_cast<std::size_t>(idx)];
      const Vec& xb = pts[static_cast<std::size_t>(nidx)];
      const Vec mid = 0.5 * (xa + xb);
      if (!m.base.in_domain(mid)) continue;
      const Vec step = xb - xa;
      const double len = std::sqrt(std::max(0.0, step.dot(m.base.metric(mid) * step)));
      if (d + len < dist[static_cast<std::size_t>(nidx)]) {
        dist[static_cast<std::size_t>(nidx)] = d + len;
        queue.emplace(d + len, nidx);
      }
    }
  }

  // log-binned max envelope of |omega|_0 against the graph distance
  std::vector<std::pair<double, double>> dy;
  int unreachable = 0;
  for (int idx = 0; idx < total; ++idx) {
    if (!inside[static_cast<std::size_t>(idx)]) continue;
    const double d = dist[static_cast<std::size_t>(idx)];
    if (d == inf) {
      ++unreachable;
      continue;
    }
    if (d > 0.0) dy.emplace_back(d, wnorm[static_cast<std::size_t>(idx)]);
  }
  std::ostringstream notes;
  notes << "finite-sample audit: beta bounds and the growth envelope hold on the sampled grid "
           "only; growth fit = least-absolute-deviation envelope over log-binned graph distances";
  if (dy.empty()) {
    notes << "; no positive-radius samples, growth fit skipped";
    rep.notes = notes.str();
    return rep;
  }
  double dmin = inf, dmax = 0.0;
  for (const auto& [d, y] : dy) {
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  const int nb = (dmax / dmin < 1.02) ? 1 : std::min<int>(8, static_cast<int>(dy.size()));
  std::vector<double> bin_d(static_cast<std::size_t>(nb), 0.0);
  std::vector<double> bin_y(static_cast<std::size_t>(nb), 0.0);
  std::vector<bool> used(static_cast<std::size_t>(nb), false);
  const double lr = std::log(dmax / dmin);
  for (const auto& [d, y] : dy) {
    int k = 0;
    if (nb > 1)
      k = std::min(nb - 1,
                   static_cast<int>(std::floor(std::log(d / dmin) / lr * static_cast<double>(nb))));
    used[static_cast<std::size_t>(k)] = true;
    bin_d[static_cast<std::size_t>(k)] = std::max(bin_d[static_cast<std::size_t>(k)], d);
    bin_y[static_cast<std::size_t>(k)] = std::max(bin_y[static_cast<std::size_t>(k)], y);
  }
  std::vector<double> D, Y;
  for (int k = 0; k < nb; ++k) {
    if (!used[static_cast<std::size_t>(k)]) continue;
    D.push_back(bin_d[static_cast<std::size_t>(k)]);
    Y.push_back(bin_y[static_cast<std::size_t>(k)]);
  }
  rep.omega_growth = fit_growth(D, Y);

  if (rep.beta_inf <= 0.0) notes << "; warning: sampled beta is not positive everywhere";
  if (unreachable > 0)
    notes << "; " << unreachable << " sample point(s) unreachable from the base point were "
          << "excluded from the growth fit";
  if (rep.omega_growth.bins < 3)
    notes << "; too few radius bins for a reliable growth fit";
  rep.notes = notes.str();
  return rep;
}

double t_invariance_defect(const std::function<double(const Vec&)>& phi,
                           const std::vector<Vec>& samples, double dt) {
  if (!phi) throw Error("t_invariance_defect: phi is required");
  if (!(dt > 0.0)) throw Error("t_invariance_defect: dt must be positive");
  double worst = 0.0;
  for (const Vec& y : samples) {
    if (y.size() < 1) throw Error("t_invariance_defect: empty sample point");
    Vec a = y, b = y;
    a(0) += dt;
    b(0) -= dt;
    worst = std::max(worst, std::abs(phi(a) - phi(b)) / (2.0 * dt));
  }
  return worst;
}

}  // namespace geolab
