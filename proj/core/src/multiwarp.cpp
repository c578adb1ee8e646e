#include "geolab/multiwarp.hpp"

#include "geolab/models.hpp"
#include "geolab/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace geolab {

// ------------------------------------------------------------- fibers ----

FiberOracle euclidean_fiber(int k) {
  if (k < 1) throw Error("euclidean_fiber: dimension must be positive");
  FiberOracle f;
  f.dim = k;
  f.name = "R" + std::to_string(k);
  f.model = models::flat(k, 0);
  f.period_hint = 0.0;
  f.distance = [](const Vec& a, const Vec& b) { return (b - a).norm(); };
  f.enumerate = [k](const Vec& a, const Vec& b, double) {
    FiberGeodesicChoice c;
    c.length = (b - a).norm();
    c.dir = c.length > 1e-14 ? Vec((b - a) / c.length) : Vec(Vec::Zero(k));
    return std::vector<FiberGeodesicChoice>{c};
  };
  return f;
}

FiberOracle circle_fiber(double radius) {
  if (radius <= 0) throw Error("circle_fiber: radius must be positive");
  FiberOracle f;
  f.dim = 1;
  f.name = "S1";
  f.period_hint = 2.0 * M_PI * radius;
  GeometryModel m;
  m.dim = 1;
  m.index = 0;
  m.name = "circle";
  {
    Mat g(1, 1);
    g(0, 0) = radius * radius;
    m.metric = [g](const Vec&) { return g; };
    m.metric_deriv = [](const Vec&) { return std::vector<Mat>(1, Mat::Zero(1, 1)); };
  }
  f.model = m;
  f.distance = [radius](const Vec& a, const Vec& b) {
    return radius * std::abs(std::remainder(b[0] - a[0], 2.0 * M_PI));
  };
  f.enumerate = [radius](const Vec& a, const Vec& b, double cap) {
    const double delta = b[0] - a[0];
    std::vector<FiberGeodesicChoice> out;
    const int jmax = static_cast<int>(std::ceil(cap / (2.0 * M_PI * radius))) + 1;
    for (int j = -jmax; j <= jmax; ++j) {
      const double arc = delta + 2.0 * M_PI * j;
      const double len = radius * std::abs(arc);
      if (len > cap + 1e-12) continue;
      FiberGeodesicChoice c;
      c.length = len;
      c.dir = Vec::Zero(1);
      if (len > 1e-14) c.dir[0] = (arc > 0 ? 1.0 : -1.0) / radius;  // g-unit tangent
      out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FiberGeodesicChoice& x, const FiberGeodesicChoice& y) {
                       if (x.length != y.length) return x.length < y.length;
                       return x.dir[0] < y.dir[0];
                     });
    return out;
  };
  return f;
}

FiberOracle torus_fiber(const std::vector<double>& periods) {
  if (periods.empty()) throw Error("torus_fiber: empty period list");
  for (double p : periods)
    if (p <= 0) throw Error("torus_fiber: periods must be positive");
  const int k = static_cast<int>(periods.size());
  FiberOracle f;
  f.dim = k;
  f.name = "T" + std::to_string(k);
  f.model = models::flat(k, 0);
  f.period_hint = *std::min_element(periods.begin(), periods.end());
  models::LatticeQuotient lq{periods};
  f.distance = [lq](const Vec& a, const Vec& b) {
    return models::quotient_displacement(lq, a, b).norm();
  };
  f.enumerate = [lq, periods, k](const Vec& a, const Vec& b, double cap) {
    const double pmin = *std::min_element(periods.begin(), periods.end());
    const int w = static_cast<int>(std::ceil(cap / pmin)) + 1;
    std::vector<FiberGeodesicChoice> out;
    for (const Vec& lift : models::lattice_lifts(lq, a, b, w)) {
      const double len = (lift - a).norm();
      if (len > cap + 1e-12) continue;
      FiberGeodesicChoice c;
      c.length = len;
      c.dir = len > 1e-14 ? Vec((lift - a) / len) : Vec(Vec::Zero(k));
      out.push_back(std::move(c));
    }
    return out;  // lattice_lifts order: distance, then winding
  };
  return f;
}

FiberOracle sphere_fiber() {
  FiberOracle f;
  f.dim = 2;
  f.name = "S2";
  f.period_hint = 2.0 * M_PI;
  auto ps = models::pseudosphere(2, 0);
  f.model = ps.chart;

  auto embed = [ps](const Vec& z) { return ps.embed(z); };
  // g-unit chart tangent at a pointing along the great circle toward B
  auto chart_dir = [ps, embed](const Vec& a, const Vec& B, double delta) {
    Vec A = embed(a);
    Vec T = B - std::cos(delta) * A;
    const double tn = T.norm();
    if (tn < 1e-12) {
      // antipodal/coincident: direction not unique; fixed polar axis
      Vec u(2);
      u << 1.0, 0.0;
      return u;
    }
    T /= tn;
    // pull back through the embedding differential (FD Jacobian)
    Mat J(3, 2);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Vec ap = a, am = a;
      ap[j] += h;
      am[j] -= h;
      J.col(j) = (embed(ap) - embed(am)) / (2.0 * h);
    }
    Vec u = J.colPivHouseholderQr().solve(T);
    const Mat g = ps.chart.metric(a);
    return Vec(u / std::sqrt(u.dot(g * u)));
  };

  f.distance = [embed](const Vec& a, const Vec& b) {
    const double c = std::clamp(embed(a).dot(embed(b)), -1.0, 1.0);
    return std::acos(c);
  };
  f.enumerate = [embed, chart_dir](const Vec& a, const Vec& b, double cap) {
    Vec B = embed(b);
    const double delta = std::acos(std::clamp(embed(a).dot(B), -1.0, 1.0));
    std::vector<FiberGeodesicChoice> out;
    const int kmax = static_cast<int>(std::ceil(cap / (2.0 * M_PI))) + 1;
    Vec fwd = chart_dir(a, B, delta);
    for (int k = 0; k <= kmax; ++k) {
      // short arc family: delta + 2 pi k
      const double l1 = delta + 2.0 * M_PI * k;
      if (l1 <= cap + 1e-12) {
        FiberGeodesicChoice c;
        c.length = l1;
        c.dir = l1 > 1e-14 ? fwd : Vec(Vec::Zero(2));
        out.push_back(std::move(c));
      }
      // complementary arc family: (2 pi - delta) + 2 pi k, opposite tangent
      const double l2 = 2.0 * M_PI - delta + 2.0 * M_PI * k;
      if (l2 <= cap + 1e-12) {
        FiberGeodesicChoice c;
        c.length = l2;
        c.dir = -fwd;
        out.push_back(std::move(c));
      }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FiberGeodesicChoice& x, const FiberGeodesicChoice& y) {
                       return x.length < y.length;
                     });
    return out;
  };
  return f;
}

// -------------------------------------------------------------- model ----

int MultiwarpedModel::total_dim() const {
  int n = 1;
  for (const auto& f : fibers) n += f.dim;
  return n;
}

GeometryModel MultiwarpedModel::chart() const {
  if (fibers.size() != warp.size() || fibers.size() != warp_d.size())
    throw Error("MultiwarpedModel: fibers/warp/warp_d size mismatch");
  const int m = fiber_count();
  const int n = total_dim();
  std::vector<int> off(m), dim(m);
  {
    int o = 1;
    for (int i = 0; i < m; ++i) {
      off[i] = o;
      dim[i] = fibers[i].dim;
      o += dim[i];
    }
  }
  GeometryModel g;
  g.dim = n;
  g.index = 1;
  g.name = name + "-chart";
  auto self = *this;  // value copy keeps the lambdas self-contained
  g.metric = [self, off, dim, m, n](const Vec& z) {
    Mat M = Mat::Zero(n, n);
    M(0, 0) = -1.0;
    for (int i = 0; i < m; ++i) {
      const double fi = self.warp[i](z[0]);
      M.block(off[i], off[i], dim[i], dim[i]) =
          (fi * fi) * self.fibers[i].model.metric(z.segment(off[i], dim[i]));
    }
    return M;
  };
  g.metric_deriv = [self, off, dim, m, n](const Vec& z) {
    std::vector<Mat> dg(n, Mat::Zero(n, n));
    for (int i = 0; i < m; ++i) {
      const Vec zi = z.segment(off[i], dim[i]);
      const double fi = self.warp[i](z[0]);
      const double fid = self.warp_d[i](z[0]);
      dg[0].block(off[i], off[i], dim[i], dim[i]) =
          (2.0 * fi * fid) * self.fibers[i].model.metric(zi);
      const auto dgi = self.fibers[i].model.metric_deriv(zi);
      for (int a = 0; a < dim[i]; ++a)
        dg[off[i] + a].block(off[i], off[i], dim[i], dim[i]) = (fi * fi) * dgi[a];
    }
    return dg;
  };
  g.domain = [self, off, dim, m](const Vec& z) {
    if (!self.in_interval(z[0])) return false;
    for (int i = 0; i < m; ++i)
      if (!self.fibers[i].model.in_domain(z.segment(off[i], dim[i]))) return false;
    return true;
  };
  return g;
}

// ------------------------------------------------------ reduced lengths ----

namespace {

// sum_j c_j^2 / f_j^2 at t
double fiber_potential(const MultiwarpedModel& m, const Vec& c, double t) {
  double s = 0.0;
  for (int j = 0; j < m.fiber_count(); ++j) {
    const double fj = m.warp[j](t);
    s += c[j] * c[j] / (fj * fj);
  }
  return s;
}

double potential_min(const MultiwarpedModel& m, const Vec& c, double lo, double hi) {
  double best = std::numeric_limits<double>::infinity();
  const int N = 512;
  for (int k = 0; k <= N; ++k)
    best = std::min(best, fiber_potential(m, c, lo + (hi - lo) * k / N));
  return best;
}

}  // namespace

std::vector<double> fiber_lengths(const MultiwarpedModel& m, const ReductionConstants& rc,
                                  double t_start, double t_end) {
  const int mf = m.fiber_count();
  if (rc.c.size() != mf) throw Error("fiber_lengths: constants size mismatch");
  for (int i = 0; i < mf; ++i)
    if (rc.c[i] < 0) throw Error("fiber_lengths: negative fiber constant");
  if (!m.in_interval(t_start) || !m.in_interval(t_end))
    throw Error("fiber_lengths: endpoint outside the interval");

  std::vector<double> L(mf, 0.0);
  const double lo = std::min(t_start, t_end), hi = std::max(t_start, t_end);
  if (hi - lo < 1e-15) return L;

  // admissibility: radicand K + sum c^2/f^2 must stay positive
  if (rc.K + potential_min(m, rc.c, lo, hi) <= 0.0)
    throw Error("fiber_lengths: turning point (radicand nonpositive) in the range");

  for (int i = 0; i < mf; ++i) {
    if (rc.c[i] <= 0.0) continue;
    auto integrand = [&](double t) {
      const double fi = m.warp[i](t);
      return (rc.c[i] / (fi * fi)) / std::sqrt(rc.K + fiber_potential(m, rc.c, t));
    };
    L[i] = integrate_adaptive(integrand, lo, hi, 1e-9, 1e-14).value;
  }
  return L;
}

MubarResidual mubar(const MultiwarpedModel& m, const ReductionConstants& rc,
                    const FiberTarget& target) {
  const int mf = m.fiber_count();
  if (static_cast<int>(target.D.size()) != mf) throw Error("mubar: target size mismatch");
  MubarResidual r;
  r.L = fiber_lengths(m, rc, target.t_start, target.t_end);
  r.ratio = Vec::Zero(std::max(0, mf - 1));
  r.total = 0.0;
  for (int i = 0; i < mf; ++i) r.total += r.L[i] - target.D[i];
  for (int i = 0; i + 1 < mf; ++i)
    r.ratio[i] = r.L[i] * target.D[i + 1] - r.L[i + 1] * target.D[i];
  return r;
}

// --------------------------------------------------------------- solve ----

namespace {

struct ComboContext {
  const MultiwarpedModel& m;
  std::vector<int> active;    // fibers with D_i > 0
  std::vector<double> D;      // all fibers
  double sumD = 0.0;
  double t0 = 0.0, t1 = 0.0;  // z.t, w.t
};

Vec expand_c(const ComboContext& cc, const Vec& ca) {
  Vec c = Vec::Zero(cc.m.fiber_count());
  for (std::size_t a = 0; a < cc.active.size(); ++a) c[cc.active[a]] = ca[a];
  return c;
}

double total_residual(const ComboContext& cc, const Vec& c_full, double K) {
  ReductionConstants rc{c_full, K};
  auto L = fiber_lengths(cc.m, rc, cc.t0, cc.t1);
  double t = -cc.sumD;
  for (double l : L) t += l;
  return t;
}

// Zero of sum L(c, K) - sum D in K. The total is strictly decreasing in K
// (the radicand grows pointwise), so a sign change brackets the root.
std::optional<double> solve_K(const ComboContext& cc, const Vec& ca) {
  Vec c = expand_c(cc, ca);
  const double lo = std::min(cc.t0, cc.t1), hi = std::max(cc.t0, cc.t1);
  const double pmin = potential_min(cc.m, c, lo, hi);
  const double margin = 1e-6 * (1.0 + std::abs(pmin));
  double Klo = -pmin + margin;

  double flo = total_residual(cc, c, Klo);
  if (flo < 0.0) return std::nullopt;  // even the longest arcs fall short

  double Khi = std::max(1.0, Klo + 1.0);
  double fhi = total_residual(cc, c, Khi);
  while (fhi > 0.0 && Khi < 1e6) {
    Khi = 2.0 * Khi + 1.0;
    fhi = total_residual(cc, c, Khi);
  }
  if (fhi > 0.0) return std::nullopt;  // cap hit without a sign change

  for (int it = 0; it < 90; ++it) {
    const double Kmid = 0.5 * (Klo + Khi);
    const double fm = total_residual(cc, c, Kmid);
    if (std::abs(fm) < 1e-12 * (1.0 + cc.sumD)) return Kmid;
    (fm > 0.0 ? Klo : Khi) = Kmid;
    if (Khi - Klo < 1e-13 * (1.0 + std::abs(Kmid))) break;
  }
  return 0.5 * (Klo + Khi);
}

// Ratio residual vector at (ca, K(ca)); empty optional when no K root.
std::optional<Vec> ratio_residual(const ComboContext& cc, const Vec& ca, double* K_out) {
  auto K = solve_K(cc, ca);
  if (!K) return std::nullopt;
  Vec c = expand_c(cc, ca);
  ReductionConstants rc{c, *K};
  auto L = fiber_lengths(cc.m, rc, cc.t0, cc.t1);
  const int mA = static_cast<int>(cc.active.size());
  Vec rho(mA - 1);
  for (int a = 0; a + 1 < mA; ++a) {
    const int i = cc.active[a], j = cc.active[a + 1];
    rho[a] = L[i] * cc.D[j] - L[j] * cc.D[i];
  }
  if (K_out) *K_out = *K;
  return rho;
}

struct ReducedRoot {
  Vec ca;
  double K = 0.0;
};

// Newton polish on the simplex interior coordinates (first mA-1 of ca).
bool newton_polish(const ComboContext& cc, Vec& ca, double& K) {
  const int mA = static_cast<int>(cc.active.size());
  const int d = mA - 1;
  const double scale = 1.0 + cc.sumD * cc.sumD;
  Vec xi = ca.head(d);
  for (int it = 0; it < 30; ++it) {
    Vec full(mA);
    full.head(d) = xi;
    full[d] = 1.0 - xi.sum();
    if (full.minCoeff() <= 1e-9) return false;
    double K0;
    auto rho0 = ratio_residual(cc, full, &K0);
    if (!rho0) return false;
    if (rho0->cwiseAbs().maxCoeff() < 1e-10 * scale) {
      ca = full;
      K = K0;
      return true;
    }
    Mat J(d, d);
    const double h = 1e-7;
    for (int j = 0; j < d; ++j) {
      Vec xp = xi;
      xp[j] += h;
      Vec fp(mA);
      fp.head(d) = xp;
      fp[d] = 1.0 - xp.sum();
      if (fp.minCoeff() <= 1e-9) return false;
      auto rp = ratio_residual(cc, fp, nullptr);
      if (!rp) return false;
      J.col(j) = (*rp - *rho0) / h;
    }
    Vec step = J.colPivHouseholderQr().solve(-*rho0);
    // keep strictly inside the simplex
    double alpha = 1.0;
    for (int j = 0; j < d; ++j) {
      const double nj = xi[j] + step[j];
      if (nj < 1e-6) alpha = std::min(alpha, (xi[j] - 1e-6) / std::max(1e-300, -step[j]));
    }
    const double tail = 1.0 - (xi + step).sum();
    if (tail < 1e-6) {
      const double excess = (xi + step).sum() - (1.0 - 1e-6);
      const double cur = 1.0 - xi.sum();
      alpha = std::min(alpha, std::max(0.0, (cur - 1e-6) / std::max(1e-300, excess + cur - 1e-6)));
    }
    xi += std::clamp(alpha, 0.0, 1.0) * step;
  }
  return false;
}

// Roots of the ratio residual over the open simplex for one combination.
std::vector<ReducedRoot> reduced_roots(const ComboContext& cc, int grid) {
  const int mA = static_cast<int>(cc.active.size());
  std::vector<ReducedRoot> roots;

  if (mA == 1) {
    Vec ca = Vec::Ones(1);
    auto K = solve_K(cc, ca);
    if (K) roots.push_back({ca, *K});
    return roots;
  }

  if (mA == 2) {
    // 1-d scan in c_first with bisection on sign changes
    std::vector<double> xs, fs;
    std::vector<double> Ks;
    for (int k = 1; k <= grid; ++k) {
      const double x = static_cast<double>(k) / (grid + 1);
      Vec ca(2);
      ca << x, 1.0 - x;
      double K;
      auto rho = ratio_residual(cc, ca, &K);
      if (!rho) continue;
      xs.push_back(x);
      fs.push_back((*rho)[0]);
      Ks.push_back(K);
    }
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      if (fs[k] == 0.0) {
        Vec ca(2);
        ca << xs[k], 1.0 - xs[k];
        roots.push_back({ca, Ks[k]});
        continue;
      }
      if (fs[k] * fs[k + 1] > 0.0) continue;
      double a = xs[k], b = xs[k + 1];
      double fa = fs[k];
      double K = Ks[k];
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        Vec ca(2);
        ca << mid, 1.0 - mid;
        double Km;
        auto rho = ratio_residual(cc, ca, &Km);
        if (!rho) break;
        K = Km;
        if (fa * (*rho)[0] <= 0.0)
          b = mid;
        else {
          a = mid;
          fa = (*rho)[0];
        }
        if (b - a < 1e-12) break;
      }
      Vec ca(2);
      const double x = 0.5 * (a + b);
      ca << x, 1.0 - x;
      double Kf = K;
      auto rho = ratio_residual(cc, ca, &Kf);
      if (rho) roots.push_back({ca, Kf});
    }
    return roots;
  }

  // mA >= 3: lattice scan of the simplex interior; cells whose corners mix
  // signs in every residual component seed a Newton polish.
  const int d = mA - 1;
  const int G = grid + 1;
  std::vector<std::vector<int>> nodes;  // lattice indices of length d
  std::vector<int> idx(d, 1);
  for (;;) {
    int sum = 0;
    for (int j = 0; j < d; ++j) sum += idx[j];
    if (sum <= G - 1) nodes.push_back(idx);
    int j = 0;
    while (j < d && ++idx[j] > grid) idx[j++] = 1;
    if (j == d) break;
  }
  auto eval_node = [&](const std::vector<int>& nd) -> std::optional<Vec> {
    Vec ca(mA);
    double sum = 0;
    for (int j = 0; j < d; ++j) {
      ca[j] = static_cast<double>(nd[j]) / G;
      sum += ca[j];
    }
    ca[d] = 1.0 - sum;
    if (ca[d] <= 0) return std::nullopt;
    return ratio_residual(cc, ca, nullptr);
  };
  std::map<std::vector<int>, std::optional<Vec>> cache;
  auto eval_cached = [&](const std::vector<int>& nd) {
    auto it = cache.find(nd);
    if (it == cache.end()) it = cache.emplace(nd, eval_node(nd)).first;
    return it->second;
  };
  for (const auto& nd : nodes) {
    // cell = nd plus +1 offsets in each axis subset; check sign mixing
    bool mixed_all = true;
    for (int comp = 0; comp < d && mixed_all; ++comp) {
      bool has_pos = false, has_neg = false;
      for (int corner = 0; corner < (1 << d); ++corner) {
        std::vector<int> cn = nd;
        for (int j = 0; j < d; ++j)
          if (corner & (1 << j)) ++cn[j];
        auto v = eval_cached(cn);
        if (!v) continue;
        ((*v)[comp] >= 0 ? has_pos : has_neg) = true;
      }
      mixed_all = has_pos && has_neg;
    }
    if (!mixed_all) continue;
    Vec ca(mA);
    double sum = 0;
    for (int j = 0; j < d; ++j) {
      ca[j] = (nd[j] + 0.5) / G;
      sum += ca[j];
    }
    ca[d] = 1.0 - sum;
    if (ca[d] <= 1e-6) continue;
    double K = 0;
    if (newton_polish(cc, ca, K)) {
      bool dup = false;
      for (const auto& r : roots)
        if ((r.ca - ca).norm() < 1e-6) dup = true;
      if (!dup) roots.push_back({ca, K});
    }
  }
  return roots;
}

}  // namespace

ConnectivityReport solve_connection(const MultiwarpedModel& m, const MultiwarpedPoint& z,
                                    const MultiwarpedPoint& w,
                                    const MultiwarpSolveOptions& opts) {
  const int mf = m.fiber_count();
  if (static_cast<int>(z.fiber.size()) != mf || static_cast<int>(w.fiber.size()) != mf)
    throw Error("solve_connection: fiber point count mismatch");
  if (!m.in_interval(z.t) || !m.in_interval(w.t))
    throw Error("solve_connection: endpoint outside the interval");
  for (int i = 0; i < mf; ++i)
    if (z.fiber[i].size() != m.fibers[i].dim || w.fiber[i].size() != m.fibers[i].dim)
      throw Error("solve_connection: fiber coordinate dimension mismatch");

  GeometryModel chart = m.chart();
  const int n = chart.dim;
  std::vector<int> off(mf);
  {
    int o = 1;
    for (int i = 0; i < mf; ++i) {
      off[i] = o;
      o += m.fibers[i].dim;
    }
  }
  Vec z_chart(n), w_fiber_probe;
  z_chart[0] = z.t;
  for (int i = 0; i < mf; ++i) z_chart.segment(off[i], m.fibers[i].dim) = z.fiber[i];

  const double dt = w.t - z.t;

  // fiber-geodesic choices per fiber
  std::vector<std::vector<FiberGeodesicChoice>> choices(mf);
  for (int i = 0; i < mf; ++i) {
    const double d = m.fibers[i].distance(z.fiber[i], w.fiber[i]);
    const double cap = opts.length_cap > 0
                           ? opts.length_cap
                           : d + (opts.max_winding + 0.51) * m.fibers[i].period_hint;
    choices[i] = m.fibers[i].enumerate(z.fiber[i], w.fiber[i], cap);
    if (choices[i].empty()) {
      FiberGeodesicChoice c;
      c.length = d;
      c.dir = Vec::Zero(m.fibers[i].dim);
      choices[i] = {c};
    }
  }

  ConnectivityReport rep;
  rep.verdict_source = VerdictSource::Shooting;
  std::vector<Vec> kept_scaled;
  long combos = 0, roots_found = 0, turning_skips = 0;

  // coincident endpoints: constant curve
  bool same = std::abs(dt) < 1e-14;
  for (int i = 0; i < mf && same; ++i)
    same = m.fibers[i].distance(z.fiber[i], w.fiber[i]) < 1e-12;
  if (same) {
    ConnectSolution sol;
    sol.v0 = Vec::Zero(n);
    sol.arrival_s = 0.0;
    sol.endpoint_error = 0.0;
    sol.fiber_constants = Vec::Zero(mf);
    sol.energy_K = 0.0;
    sol.fiber_lengths.assign(mf, 0.0);
    rep.solutions.push_back(std::move(sol));
    rep.status = ConnectStatus::Connected;
    rep.diagnostics = "coincident endpoints: constant curve";
    return rep;
  }

  auto validate_and_push = [&](const Vec& c_full, double K, const std::vector<double>& D,
                               const std::vector<int>& choice_idx) {
    if (opts.causal_only && K < -1e-12) return;
    const double sgn = dt >= 0 ? 1.0 : -1.0;
    const double pot0 = fiber_potential(m, c_full, z.t);
    if (K + pot0 <= 0) return;

    Vec v0 = Vec::Zero(n);
    v0[0] = sgn * std::sqrt(K + pot0);
    for (int i = 0; i < mf; ++i) {
      if (c_full[i] <= 0) continue;
      const double fi = m.warp[i](z.t);
      v0.segment(off[i], m.fibers[i].dim) =
          (c_full[i] / (fi * fi)) * choices[i][choice_idx[i]].dir;
    }

    // arrival parameter: ds = dt / tdot
    auto s_integrand = [&](double t) {
      return 1.0 / std::sqrt(K + fiber_potential(m, c_full, t));
    };
    const double lo = std::min(z.t, w.t), hi = std::max(z.t, w.t);
    const double s_arr = integrate_adaptive(s_integrand, lo, hi, 1e-10, 1e-14).value;
    if (!(s_arr > 0) || !std::isfinite(s_arr)) return;

    // validation: re-integrate the full chart geodesic
    GeodesicState st{z_chart, v0, 0.0};
    GeodesicState fin;
    auto term = integrate_observe(chart, st, s_arr, opts.integ,
                                  [](const GeodesicState&) { return true; }, &fin);
    if (term != Termination::SpanComplete) return;
    double err2 = (fin.pos[0] - w.t) * (fin.pos[0] - w.t);
    for (int i = 0; i < mf; ++i) {
      const double di =
          m.fibers[i].distance(fin.pos.segment(off[i], m.fibers[i].dim), w.fiber[i]);
      err2 += di * di;
    }
    const double err = std::sqrt(err2);
    if (err > opts.tol_endpoint) return;

    Vec scaled = s_arr * v0;
    for (const Vec& ks : kept_scaled)
      if ((ks - scaled).norm() < 1e-4 * std::max(1.0, ks.norm())) return;
    kept_scaled.push_back(scaled);

    ConnectSolution sol;
    sol.v0 = v0;
    sol.arrival_s = s_arr;
    sol.endpoint_error = err;
    sol.fiber_constants = c_full;
    sol.energy_K = K;
    sol.fiber_lengths = D;
    rep.solutions.push_back(std::move(sol));
  };

  // enumerate fiber-geodesic combinations lexicographically
  std::vector<int> choice_idx(mf, 0);
  for (;;) {
    if (combos >= opts.max_combos) break;
    ++combos;

    std::vector<double> D(mf);
    for (int i = 0; i < mf; ++i) D[i] = choices[i][choice_idx[i]].length;

    ComboContext cc{m, {}, D, 0.0, z.t, w.t};
    for (int i = 0; i < mf; ++i) {
      cc.sumD += D[i];
      if (D[i] > 1e-12) cc.active.push_back(i);
    }

    if (std::abs(dt) < 1e-14) {
      // fiber travel with no t travel needs a turning point
      if (!cc.active.empty()) ++turning_skips;
    } else if (cc.active.empty()) {
      // vertical line: fibers constant, t affine, K = 1 at unit speed
      validate_and_push(Vec::Zero(mf), 1.0, D, choice_idx);
    } else {
      std::vector<ReducedRoot> roots;
      try {
        roots = reduced_roots(cc, opts.simplex_grid);
      } catch (const Error&) {
        roots.clear();  // quadrature/admissibility breakdown: skip combo
      }
      if (roots.empty()) ++turning_skips;
      for (const auto& root : roots) {
        ++roots_found;
        validate_and_push(expand_c(cc, root.ca), root.K, D, choice_idx);
      }
    }

    int i = 0;
    while (i < mf && ++choice_idx[i] >= static_cast<int>(choices[i].size()))
      choice_idx[i++] = 0;
    if (i == mf) break;
  }

  if (opts.causal_only) {
    // most timelike first
    std::stable_sort(rep.solutions.begin(), rep.solutions.end(),
                     [](const ConnectSolution& a, const ConnectSolution& b) {
                       if (a.energy_K != b.energy_K) return a.energy_K > b.energy_K;
                       return a.endpoint_error < b.endpoint_error;
                     });
  } else {
    std::stable_sort(rep.solutions.begin(), rep.solutions.end(),
                     [](const ConnectSolution& a, const ConnectSolution& b) {
                       if (a.endpoint_error != b.endpoint_error)
                         return a.endpoint_error < b.endpoint_error;
                       return std::lexicographical_compare(a.v0.data(), a.v0.data() + a.v0.size(),
                                                           b.v0.data(),
                                                           b.v0.data() + b.v0.size());
                     });
  }

  std::ostringstream diag;
  diag << combos << " fiber combination(s), " << roots_found << " root(s), "
       << rep.solutions.size() << " validated";
  if (rep.solutions.empty()) {
    rep.status = ConnectStatus::NotFound;
    if (turning_skips > 0)
      diag << "; " << turning_skips
           << " combination(s) rejected in the turning-point regime (monotone-t search only)";
    diag << "; no connecting geodesic found within the search budget"
         << " (this does not prove the points are disconnected)";
  } else {
    rep.status = ConnectStatus::Connected;
  }
  rep.diagnostics = diag.str();
  return rep;
}

ConnectivityReport causal_connect(const MultiwarpedModel& m, const MultiwarpedPoint& z,
                                  const MultiwarpedPoint& w, const MultiwarpSolveOptions& opts) {
  MultiwarpSolveOptions o = opts;
  o.causal_only = true;
  auto rep = solve_connection(m, z, w, o);
  if (rep.status == ConnectStatus::NotFound)
    rep.diagnostics += "; no causal solution (points possibly not causally related)";
  return rep;
}

// ----------------------------------------------------------- criterion ----

std::string to_string(IntegralVerdict v) {
  switch (v) {
    case IntegralVerdict::Divergent: return "divergent";
    case IntegralVerdict::Convergent: return "convergent";
    case IntegralVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Partial integrals of the criterion integrand on a geometric ladder
// toward one endpoint; verdict from growth vs plateau.
IntegralVerdict ladder_verdict(const std::function<double(double)>& integrand, double c,
                               double endpoint, bool endpoint_infinite, double* tail) {
  double I = 0.0;
  double prev_rung = c;
  double last_inc = 0.0;
  int plateau_hits = 0;
  std::vector<double> inc_ratios;
  const int max_rungs = endpoint_infinite ? 40 : 16;

  for (int k = 1; k <= max_rungs; ++k) {
    double rung;
    if (endpoint_infinite) {
      const double dir = endpoint > 0 ? 1.0 : -1.0;
      rung = c + dir * std::ldexp(std::max(1.0, std::abs(c)), k);  // c ± 2^k
    } else {
      rung = endpoint - (endpoint - c) * std::pow(4.0, -k);
    }
    auto q = integrate_adaptive(integrand, prev_rung, rung, 1e-9, 1e-14);
    const double inc = std::abs(q.value);
    I += inc;
    if (last_inc > 0 && inc > 0) inc_ratios.push_back(inc / last_inc);
    if (inc < 1e-6 * std::max(1.0, I)) {
      if (++plateau_hits >= 2) {
        *tail = I;
        return IntegralVerdict::Convergent;
      }
    } else {
      plateau_hits = 0;
    }
    if (I > 1e8) {
      *tail = I;
      return IntegralVerdict::Divergent;
    }
    last_inc = inc;
    prev_rung = rung;
  }
  *tail = I;
  // no plateau: sustained increments mean divergence (log-type growth keeps
  // increments roughly constant; convergent tails decay geometrically)
  if (!inc_ratios.empty()) {
    const int look = std::min<std::size_t>(5, inc_ratios.size());
    double med = 0.0;
    std::vector<double> lastr(inc_ratios.end() - look, inc_ratios.end());
    std::sort(lastr.begin(), lastr.end());
    med = lastr[lastr.size() / 2];
    if (med >= 0.5) return IntegralVerdict::Divergent;
  }
  return IntegralVerdict::Inconclusive;
}

}  // namespace

CriterionReport check_integral_criterion(const MultiwarpedModel& m, double c_probe) {
  if (!m.in_interval(c_probe))
    throw Error("check_integral_criterion: probe outside the interval");
  CriterionReport rep;
  rep.note =
      "endpoint verdicts are a numerical heuristic from partial-integral growth, not a proof";
  const int mf = m.fiber_count();
  rep.toward_lo.resize(mf);
  rep.toward_hi.resize(mf);
  rep.tail_lo.assign(mf, 0.0);
  rep.tail_hi.assign(mf, 0.0);

  for (int i = 0; i < mf; ++i) {
    auto integrand = [&m, i](double t) {
      double s = 0.0;
      for (int j = 0; j < m.fiber_count(); ++j) {
        const double fj = m.warp[j](t);
        s += 1.0 / (fj * fj);
      }
      const double fi = m.warp[i](t);
      return (1.0 / (fi * fi)) / std::sqrt(s);
    };
    const bool lo_inf = std::isinf(m.t_lo), hi_inf = std::isinf(m.t_hi);
    rep.toward_lo[i] = ladder_verdict(integrand, c_probe, m.t_lo, lo_inf, &rep.tail_lo[i]);
    rep.toward_hi[i] = ladder_verdict(integrand, c_probe, m.t_hi, hi_inf, &rep.tail_hi[i]);
  }
  return rep;
}

}  // namespace geolab
