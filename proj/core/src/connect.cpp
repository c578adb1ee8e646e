#include "geolab/connect.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace geolab {

std::string to_string(ConnectStatus s) {
  switch (s) {
    case ConnectStatus::Connected: return "connected";
    case ConnectStatus::NotFound: return "not-found";
    case ConnectStatus::UnreachableClosedForm: return "unreachable-closed-form";
  }
  return "?";
}

std::string to_string(VerdictSource s) {
  return s == VerdictSource::Shooting ? "shooting" : "closed-form";
}

namespace {

// Targets the search has to reach: q plus its lattice translates,
// nearest to p first.
std::vector<Vec> target_lifts(const ShootingProblem& prob) {
  if (prob.lattice.empty() || prob.max_winding <= 0) return {prob.q};
  models::LatticeQuotient lq{prob.lattice};
  return models::lattice_lifts(lq, prob.p, prob.q, prob.max_winding);
}

double min_lift_distance(const Vec& x, const std::vector<Vec>& lifts, int* which = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lifts.size(); ++i) {
    const double d = (x - lifts[i]).norm();
    if (d < best) {
      best = d;
      if (which) *which = static_cast<int>(i);
    }
  }
  return best;
}

struct Candidate {
  Vec u;        // velocity parameters (before velocity_map)
  double s = 0.0;
  double miss = std::numeric_limits<double>::infinity();
  int lift = 0;
};

// Trajectories that leave a ball around the endpoints cannot connect them;
// capping there avoids grinding through coordinate blowups.
double escape_radius(const ShootingProblem& prob, const std::vector<Vec>& lifts) {
  if (prob.escape_radius > 0) return prob.escape_radius;
  double r = prob.p.norm();
  for (const Vec& l : lifts) r = std::max(r, l.norm());
  return 4.0 * (r + 1.0);
}

// Flow endpoint of the geodesic with parameters u at parameter s.
// Returns false when integration terminates before s (domain exit, blowup).
bool flow_to(const ShootingProblem& prob, const Vec& u, double s, const IntegratorConfig& cfg,
             double cap, Vec* pos_out, Vec* vel_out = nullptr) {
  Vec v = prob.velocity_map.size() ? Vec(prob.velocity_map * u) : u;
  GeodesicState st{prob.p, v, 0.0};
  GeodesicState fin;
  bool escaped = false;
  Termination t = integrate_observe(prob.model, st, s, cfg,
                                    [&](const GeodesicState& g) {
                                      escaped = g.pos.norm() > cap;
                                      return !escaped;
                                    },
                                    &fin);
  if (escaped || t != Termination::SpanComplete) return false;
  *pos_out = fin.pos;
  if (vel_out) *vel_out = fin.vel;
  return true;
}

// Track the closest approach to any lift along the trajectory of u.
Candidate coarse_score(const ShootingProblem& prob, const Vec& u, const std::vector<Vec>& lifts,
                       double cap) {
  Candidate c;
  c.u = u;
  Vec v = prob.velocity_map.size() ? Vec(prob.velocity_map * u) : u;
  if (v.norm() < 1e-14) return c;  // zero shot: stays at p
  GeodesicState st{prob.p, v, 0.0};
  integrate_observe(prob.model, st, prob.s_max, prob.coarse, [&](const GeodesicState& g) {
    int which = 0;
    const double d = min_lift_distance(g.pos, lifts, &which);
    if (d < c.miss) {
      c.miss = d;
      c.s = g.s;
      c.lift = which;
    }
    return g.pos.norm() <= cap;
  });
  return c;
}

// Gauss-Newton on (u, s) against one fixed lift. FD Jacobian in u
// (step 1e-6), analytic in s (the flow velocity). Backtracking on the
// residual norm; at most 50 iterations.
bool refine(const ShootingProblem& prob, Candidate& c, const Vec& lift, double cap) {
  const int k = static_cast<int>(c.u.size());
  const double fd = 1e-6;
  Vec u = c.u;
  double s = std::max(c.s, 1e-6);

  Vec pos, vel;
  if (!flow_to(prob, u, s, prob.integ, cap, &pos, &vel)) return false;
  Vec r = pos - lift;

  int stagnant = 0;
  for (int iter = 0; iter < 50; ++iter) {
    if (r.norm() <= 0.3 * prob.tol_endpoint) break;
    Mat J(r.size(), k + 1);
    for (int j = 0; j < k; ++j) {
      Vec up = u;
      up[j] += fd;
      Vec pp;
      if (!flow_to(prob, up, s, prob.integ, cap, &pp)) return false;
      J.col(j) = (pp - pos) / fd;
    }
    J.col(k) = vel;

    // (v,s) carries the exact scaling redundancy exp(cv, s/c) = exp(v, s),
    // so J has a structurally null direction; truncating small singular
    // values keeps the step in the well-conditioned subspace instead of
    // letting the pseudo-inverse amplify that direction's FD noise.
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-4);
    Vec step = svd.solve(-r);
    double alpha = 1.0;
    bool moved = false;
    for (int back = 0; back < 10; ++back, alpha *= 0.5) {
      Vec ut = u + alpha * step.head(k);
      double st = s + alpha * step[k];
      if (st <= 1e-9 || st > prob.s_max * 1.5) continue;
      Vec pt, vt;
      if (!flow_to(prob, ut, st, prob.integ, cap, &pt, &vt)) continue;
      Vec rt = pt - lift;
      if (rt.norm() < r.norm()) {
        // slow relative progress three times in a row means the basin is
        // wrong; give up instead of burning the full iteration budget
        stagnant = rt.norm() > 0.7 * r.norm() ? stagnant + 1 : 0;
        u = ut;
        s = st;
        pos = pt;
        vel = vt;
        r = rt;
        moved = true;
        break;
      }
    }
    if (!moved || stagnant >= 3) break;
  }

  c.u = u;
  c.s = s;
  c.miss = r.norm();
  return true;
}

}  // namespace

ConnectivityReport shoot_connect(const ShootingProblem& prob) {
  if (prob.p.size() != prob.model.dim || prob.q.size() != prob.model.dim)
    throw Error("shoot_connect: endpoint dimension mismatch");
  if (prob.v_lo.size() != prob.v_hi.size() || prob.v_lo.size() == 0)
    throw Error("shoot_connect: empty velocity box");

  const std::vector<Vec> lifts = target_lifts(prob);
  const double cap = escape_radius(prob, lifts);
  const int k = static_cast<int>(prob.v_lo.size());
  const int per_axis =
      prob.grid_per_axis > 0 ? prob.grid_per_axis : std::max(3, 9 - 2 * (k - 2));

  // Coarse stage: score every grid node, keep the best `multistart`.
  std::vector<Candidate> cands;
  std::vector<int> idx(k, 0);
  for (;;) {
    Vec u(k);
    for (int j = 0; j < k; ++j) {
      const double t = per_axis == 1 ? 0.5 : static_cast<double>(idx[j]) / (per_axis - 1);
      u[j] = prob.v_lo[j] + t * (prob.v_hi[j] - prob.v_lo[j]);
    }
    Candidate c = coarse_score(prob, u, lifts, cap);
    if (std::isfinite(c.miss)) cands.push_back(std::move(c));
    int j = 0;
    while (j < k && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == k) break;
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.miss < b.miss; });
  if (static_cast<int>(cands.size()) > prob.multistart) cands.resize(prob.multistart);

  ConnectivityReport rep;
  rep.verdict_source = VerdictSource::Shooting;

  std::vector<Vec> kept_scaled;  // s*v of accepted solutions, for dedup
  int refined = 0;
  for (Candidate& c : cands) {
    if (prob.max_solutions > 0 &&
        static_cast<int>(rep.solutions.size()) >= prob.max_solutions)
      break;
    ++refined;
    if (!refine(prob, c, lifts[c.lift], cap)) continue;

    // Validation: fresh integration of the refined shot.
    Vec pos;
    Vec v = prob.velocity_map.size() ? Vec(prob.velocity_map * c.u) : c.u;
    if (!flow_to(prob, c.u, c.s, prob.integ, cap, &pos)) continue;
    const double err = (pos - lifts[c.lift]).norm();
    if (err > prob.tol_endpoint) continue;

    // Dedup after s-normalization: geodesics with |s1*v1 - s2*v2| < 1e-4
    // trace the same curve.
    Vec scaled = c.s * v;
    bool dup = false;
    for (const Vec& w : kept_scaled)
      if ((w - scaled).norm() < 1e-4 * std::max(1.0, w.norm())) {
        dup = true;
        break;
      }
    if (dup) continue;
    kept_scaled.push_back(scaled);

    ConnectSolution sol;
    sol.v0 = v;
    sol.arrival_s = c.s;
    sol.endpoint_error = err;
    rep.solutions.push_back(std::move(sol));
  }

  // Deterministic order: by endpoint error, then lexicographic velocity.
  std::stable_sort(rep.solutions.begin(), rep.solutions.end(),
                   [](const ConnectSolution& a, const ConnectSolution& b) {
                     if (a.endpoint_error != b.endpoint_error)
                       return a.endpoint_error < b.endpoint_error;
                     return std::lexicographical_compare(a.v0.data(), a.v0.data() + a.v0.size(),
                                                         b.v0.data(), b.v0.data() + b.v0.size());
                   });

  std::ostringstream diag;
  diag << "grid " << per_axis << "^" << k << ", " << cands.size() << " candidates, " << refined
       << " refined, " << rep.solutions.size() << " validated";
  if (rep.solutions.empty()) {
    rep.status = ConnectStatus::NotFound;
    diag << "; no connecting geodesic found within the search budget"
         << " (this does not prove the points are disconnected)";
  } else {
    rep.status = ConnectStatus::Connected;
  }
  rep.diagnostics = diag.str();
  return rep;
}

// ---------------------------------------------------------------- raster --

long RasterGrid::index(const std::vector<int>& idx) const {
  long lin = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (idx[a] < 0 || idx[a] >= dims[a]) return -1;
    lin = lin * dims[a] + idx[a];
  }
  return lin;
}

bool RasterGrid::mark(const Vec& x) {
  std::vector<int> idx(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a)
    idx[a] = static_cast<int>(std::floor((x[a] - lo[a]) / cell));
  const long lin = index(idx);
  if (lin < 0) return false;
  hit[lin] = 1;
  return true;
}

long RasterGrid::hit_count() const {
  long n = 0;
  for (std::uint8_t h : hit) n += h;
  return n;
}

std::string RasterGrid::csv() const {
  std::ostringstream out;
  out.precision(10);
  for (std::size_t a = 0; a < dims.size(); ++a) out << "i" << a << ",";
  for (std::size_t a = 0; a < dims.size(); ++a) out << "c" << a << ",";
  out << "hit\n";
  std::vector<int> idx(dims.size(), 0);
  for (std::size_t lin = 0; lin < hit.size(); ++lin) {
    for (std::size_t a = 0; a < dims.size(); ++a) out << idx[a] << ",";
    for (std::size_t a = 0; a < dims.size(); ++a)
      out << lo[a] + (idx[a] + 0.5) * cell << ",";
    out << static_cast<int>(hit[lin]) << "\n";
    int a = static_cast<int>(dims.size()) - 1;
    while (a >= 0 && ++idx[a] == dims[a]) idx[a--] = 0;
  }
  return out.str();
}

namespace {

// Deterministic unit directions covering both orientations.
std::vector<Vec> sphere_directions(int dim, int n) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (dim == 2) {
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * M_PI * i / n;
      Vec d(2);
      d << std::cos(a), std::sin(a);
      dirs.push_back(d);
    }
    return dirs;
  }
  std::mt19937_64 gen(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Vec d(dim);
    do {
      for (int a = 0; a < dim; ++a) d[a] = gauss(gen);
    } while (d.norm() < 1e-8);
    d /= d.norm();
    dirs.push_back(d);
    dirs.push_back(-d);
  }
  return dirs;
}

}  // namespace

RasterGrid reachability_raster(const GeometryModel& m, const Vec& p, int v_sphere_samples,
                               double s_max, double cell, const Vec& box_lo, const Vec& box_hi,
                               const IntegratorConfig& cfg) {
  if (cell <= 0) throw Error("reachability_raster: cell size must be positive");
  RasterGrid grid;
  grid.lo = box_lo;
  grid.hi = box_hi;
  grid.cell = cell;
  long total = 1;
  for (int a = 0; a < box_lo.size(); ++a) {
    const int d = std::max(1, static_cast<int>(std::ceil((box_hi[a] - box_lo[a]) / cell)));
    grid.dims.push_back(d);
    total *= d;
  }
  grid.hit.assign(total, 0);

  for (const Vec& d : sphere_directions(m.dim, v_sphere_samples)) {
    GeodesicState st{p, d, 0.0};
    Vec prev = p;
    bool have_prev = false;
    integrate_observe(m, st, s_max, cfg, [&](const GeodesicState& g) {
      if (have_prev) {
        // walk the segment at half-cell resolution so fast passes still mark
        const double len = (g.pos - prev).norm();
        const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * cell))));
        for (int i = 1; i <= steps; ++i)
          grid.mark(prev + (static_cast<double>(i) / steps) * (g.pos - prev));
      } else {
        grid.mark(g.pos);
      }
      prev = g.pos;
      have_prev = true;
      return true;
    });
  }
  return grid;
}

// -------------------------------------------------------------- de Sitter --

double desitter_inner(const Vec& P, const Vec& Q) {
  if (P.size() != Q.size() || P.size() < 2) throw Error("desitter_inner: bad dimensions");
  auto quad = [](const Vec& X, const Vec& Y) {
    double s = -X[0] * Y[0];
    for (int i = 1; i < X.size(); ++i) s += X[i] * Y[i];
    return s;
  };
  if (std::abs(quad(P, P) - 1.0) > 1e-9 || std::abs(quad(Q, Q) - 1.0) > 1e-9)
    throw Error("desitter_inner: point not on the unit quadric");
  return quad(P, Q);
}

bool desitter_connectable(const Vec& P, const Vec& Q) {
  // strict criterion <p,q> > -1; inner products within 1e-10 of the
  // boundary resolve to the unreachable side (the antipode sits exactly
  // on it, and near it the verdict is below input precision anyway)
  return desitter_inner(P, Q) > -1.0 + 1e-10;
}

Vec DesitterGeodesic::point(double s) const {
  switch (kind) {
    case DesitterArc::Constant: return start;
    case DesitterArc::Trig: return std::cos(s) * start + std::sin(s) * dir;
    case DesitterArc::Null: return start + s * dir;
    case DesitterArc::Hyperbolic: return std::cosh(s) * start + std::sinh(s) * dir;
  }
  return start;
}

Vec DesitterGeodesic::velocity(double s) const {
  switch (kind) {
    case DesitterArc::Constant: return Vec::Zero(start.size());
    case DesitterArc::Trig: return -std::sin(s) * start + std::cos(s) * dir;
    case DesitterArc::Null: return dir;
    case DesitterArc::Hyperbolic: return std::sinh(s) * start + std::cosh(s) * dir;
  }
  return dir;
}

std::optional<DesitterGeodesic> desitter_geodesic(const Vec& P, const Vec& Q) {
  if (!desitter_connectable(P, Q)) return std::nullopt;

  DesitterGeodesic g;
  g.start = P;
  if ((P - Q).norm() < 1e-12) {
    g.kind = DesitterArc::Constant;
    g.dir = Vec::Zero(P.size());
    g.arrival_s = 0.0;
    return g;
  }

  // component of q orthogonal to p in the plane span{p,q}
  Vec w = Q - a * P;
  double ww = -w[0] * w[0];
  for (int i = 1; i < w.size(); ++i) ww += w[i] * w[i];

  if (ww > 1e-10) {
    g.kind = DesitterArc::Trig;  // spacelike plane: cos/sin arc
    g.dir = w / std::sqrt(ww);
    g.arrival_s = std::atan2(std::sqrt(ww), a);  // = arccos(a) in (0, pi)
  } else if (ww < -1e-10) {
    g.kind = DesitterArc::Hyperbolic;  // timelike plane: cosh/sinh arc, a > 1
    g.dir = w / std::sqrt(-ww);
    g.arrival_s = std::log(a + std::sqrt(a * a - 1.0));  // arccosh(a)
  } else {
    g.kind = DesitterArc::Null;  // lightlike plane: affine line reaching q at s=1
    g.dir = w;
    g.arrival_s = 1.0;
  }
  return g;
}

ConnectivityReport desitter_connect_report(const Vec& P, const Vec& Q) {
  ConnectivityReport rep;
  rep.verdict_source = VerdictSource::ClosedForm;
  auto g = desitter_geodesic(P, Q);
  if (!g) {
    rep.status = ConnectStatus::UnreachableClosedForm;
    rep.diagnostics = "criterion <p,q> > -1 fails: no geodesic of the quadric joins p to q";
    return rep;
  }
  rep.status = ConnectStatus::Connected;
  ConnectSolution sol;
  sol.v0 = g->velocity(0.0);
  sol.arrival_s = g->arrival_s;
  sol.endpoint_error = (g->point(g->arrival_s) - Q).norm();
  rep.solutions.push_back(std::move(sol));
  std::ostringstream diag;
  const char* kind = g->kind == DesitterArc::Trig        ? "trigonometric"
                     : g->kind == DesitterArc::Null      ? "null"
                     : g->kind == DesitterArc::Constant  ? "constant"
                                                         : "hyperbolic";
  diag << "plane-section arc (" << kind << "), <p,q> = " << desitter_inner(P, Q);
  rep.diagnostics = diag.str();
  return rep;
}

}  // namespace geolab
