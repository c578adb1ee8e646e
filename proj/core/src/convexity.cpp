#include "geolab/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace geolab {

// -------------------------------------------------------------- domain ----

Vec DomainSpec::grad(const Vec& x) const {
  if (phi_grad) return phi_grad(x);
  const int n = static_cast<int>(x.size());
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (phi(xp) - phi(xm)) / (2.0 * h);
  }
  return g;
}

Mat DomainSpec::hess(const Vec& x) const {
  if (phi_hess) return phi_hess(x);
  const int n = static_cast<int>(x.size());
  Mat H(n, n);
  if (phi_grad) {  // differentiate the analytic gradient
    for (int i = 0; i < n; ++i) {
      const double h = fd_step * std::max(1.0, std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      H.col(i) = (phi_grad(xp) - phi_grad(xm)) / (2.0 * h);
    }
  } else {
    const double f0 = phi(x);
    for (int i = 0; i < n; ++i) {
      const double hi = fd_step * std::max(1.0, std::abs(x[i]));
      for (int j = i; j < n; ++j) {
        if (i == j) {
          Vec xp = x, xm = x;
          xp[i] += hi;
          xm[i] -= hi;
          H(i, i) = (phi(xp) - 2.0 * f0 + phi(xm)) / (hi * hi);
        } else {
          const double hj = fd_step * std::max(1.0, std::abs(x[j]));
          Vec a = x, b = x, c = x, d = x;
          a[i] += hi, a[j] += hj;
          b[i] += hi, b[j] -= hj;
          c[i] -= hi, c[j] += hj;
          d[i] -= hi, d[j] -= hj;
          H(i, j) = (phi(a) - phi(b) - phi(c) + phi(d)) / (4.0 * hi * hj);
          H(j, i) = H(i, j);
        }
      }
    }
  }
  return 0.5 * (H + H.transpose());
}

// ------------------------------------------------------- hessian form ----

namespace {

// unprojected metric Hessian quadratic form
double hessian_quadratic(const DomainSpec& dom, const Vec& p, const Vec& v) {
  const Vec g = dom.grad(p);
  const Mat H = dom.hess(p);
  const Christoffel ch = christoffel(dom.ambient, p);
  return v.dot(H * v) - g.dot(ch.apply(v, v));
}

// deterministic unit directions in R^dim (coordinate normalization)
std::vector<Vec> unit_directions(int dim, int n) {
  std::vector<Vec> out;
  if (dim == 1) {
    Vec v(1);
    v << 1.0;
    out.push_back(v);
    out.push_back(-v);
    return out;
  }
  if (dim == 2) {
    for (int k = 0; k < std::max(2, n); ++k) {
      const double a = 2.0 * M_PI * k / std::max(2, n);
      Vec v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
    return out;
  }
  std::mt19937_64 gen(0x5eedc0de);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gauss(gen);
    if (v.norm() < 1e-12) continue;
    v.normalize();
    out.push_back(v);
    out.push_back(-v);
  }
  return out;
}

// g-normalized tangent directions at a point of the phi level set
std::vector<Vec> tangent_directions(const DomainSpec& dom, const Vec& p, int n) {
  const Vec g = dom.grad(p);
  const double g2 = g.squaredNorm();
  const Mat G = dom.ambient.metric(p);
  std::vector<Vec> out;
  for (const Vec& d : unit_directions(static_cast<int>(p.size()), n)) {
    Vec v = d - (g.dot(d) / g2) * g;
    if (v.norm() < 1e-8) continue;
    const double nn = v.dot(G * v);
    if (nn <= 0) continue;
    out.push_back(v / std::sqrt(nn));
  }
  return out;
}

}  // namespace

double hessian_form(const DomainSpec& dom, const Vec& p, const Vec& v) {
  const Vec g = dom.grad(p);
  if (g.norm() == 0.0) throw Error("hessian_form: vanishing phi gradient");
  Vec t = v;
  if (std::abs(g.dot(t)) > 1e-10 * g.norm() * std::max(1.0, t.norm()))
    t -= (g.dot(t) / g.squaredNorm()) * g;
  return hessian_quadratic(dom, p, t);
}

Vec project_to_level(const DomainSpec& dom, Vec x, double level) {
  for (int it = 0; it < 80; ++it) {
    const double f = dom.phi(x);
    if (std::abs(f - level) < 1e-12 * (1.0 + std::abs(level))) return x;
    const Vec g = dom.grad(x);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-20) throw Error("project_to_level: vanishing gradient");
    x += ((level - f) / g2) * g;
  }
  if (std::abs(dom.phi(x) - level) < 1e-8 * (1.0 + std::abs(level))) return x;
  throw Error("project_to_level: projection did not converge");
}

std::string to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::StrictlyConvex: return "strictly-convex";
    case BoundaryClass::Convex: return "convex";
    case BoundaryClass::NonConvex: return "non-convex";
  }
  return "?";
}

std::vector<BoundaryPointReport> classify_boundary(const DomainSpec& dom,
                                                   const std::vector<Vec>& samples,
                                                   int directions, double tie_tol) {
  std::vector<BoundaryPointReport> out;
  out.reserve(samples.size());
  for (const Vec& s : samples) {
    BoundaryPointReport rep;
    rep.point = project_to_level(dom, s, 0.0);
    double margin = -std::numeric_limits<double>::infinity();
    for (const Vec& v : tangent_directions(dom, rep.point, directions))
      margin = std::max(margin, hessian_quadratic(dom, rep.point, v));
    rep.margin = margin;
    if (margin > tie_tol)
      rep.cls = BoundaryClass::NonConvex;
    else if (margin < -tie_tol)
      rep.cls = BoundaryClass::StrictlyConvex;
    else
      rep.cls = BoundaryClass::Convex;
    out.push_back(std::move(rep));
  }
  return out;
}

std::string to_string(TangentProbe v) {
  return v == TangentProbe::Consistent ? "consistent" : "violation";
}

TangentProbeReport check_local_convexity(const DomainSpec& dom, const Vec& p, double radius,
                                         int directions, double enter_tol) {
  Vec p0 = project_to_level(dom, p, 0.0);
  TangentProbeReport rep;
  rep.max_phi = -std::numeric_limits<double>::infinity();
  for (const Vec& v : tangent_directions(dom, p0, directions)) {
    double worst = -std::numeric_limits<double>::infinity();
    integrate_observe(dom.ambient, {p0, v, 0.0}, radius, {}, [&](const GeodesicState& g) {
      worst = std::max(worst, dom.phi(g.pos));
      return true;
    });
    if (worst > rep.max_phi) {
      rep.max_phi = worst;
      rep.worst_dir = v;
    }
  }
  rep.verdict = rep.max_phi > enter_tol ? TangentProbe::Violation : TangentProbe::Consistent;
  return rep;
}

// ---------------------------------------------------------- discrete f ----

PathVariable chord_path(const DomainSpec& dom, const Vec& p, const Vec& q, int n_nodes,
                        double band) {
  PathVariable path;
  path.p = p;
  path.q = q;
  // deterministic fallback direction for nodes where grad phi vanishes
  Vec e = q - p;
  Vec perp = Vec::Zero(p.size());
  if (e.norm() > 1e-14) {
    e.normalize();
    int k = 0;
    for (int i = 1; i < e.size(); ++i)
      if (std::abs(e[i]) < std::abs(e[k])) k = i;
    perp = Vec::Unit(p.size(), k) - e[k] * e;
    if (perp.norm() > 1e-14) perp.normalize();
  }
  for (int j = 1; j <= n_nodes; ++j) {
    Vec x = p + (static_cast<double>(j) / (n_nodes + 1)) * (q - p);
    for (int it = 0; it < 120 && dom.phi(x) < band; ++it) {
      Vec g = dom.grad(x);
      if (g.norm() < 1e-8) {
        x += band * perp;
        continue;
      }
      Vec step = ((band - dom.phi(x)) / g.squaredNorm()) * g;
      const double cap = 0.25 * std::max(1.0, x.norm());  // damp deep-interior overshoot
      if (step.norm() > cap) step *= cap / step.norm();
      x += step;
    }
    path.nodes.push_back(std::move(x));
  }
  return path;
}

namespace {

double min_phi_along(const DomainSpec& dom, const PathVariable& path) {
  double m = std::min(dom.phi(path.p), dom.phi(path.q));
  for (const Vec& x : path.nodes) m = std::min(m, dom.phi(x));
  return m;
}

double action_terms(const PenalizedProblem& prob, const PathVariable& path, double eps,
                    bool* interior_ok, double* penalty_out) {
  const auto& dom = prob.domain;
  const int N = static_cast<int>(path.nodes.size());
  const double h = path.spacing();
  double f = 0.0, pen = 0.0;
  bool ok = true;
  for (int k = 0; k <= N; ++k) {
    const Vec& a = path.point(k);
    const Vec& b = path.point(k + 1);
    const Vec d = b - a;
    const Mat Gm = 0.5 * (dom.ambient.metric(a) + dom.ambient.metric(b));
    f += d.dot(Gm * d);
  }
  f /= 2.0 * h;
  for (int k = 0; k <= N + 1; ++k) {
    const double w = (k == 0 || k == N + 1) ? 0.5 : 1.0;
    const double ph = dom.phi(path.point(k));
    if (ph <= 0.0) {
      ok = false;
      break;
    }
    pen += w / (ph * ph);
  }
  pen *= h;
  if (interior_ok) *interior_ok = ok;
  if (penalty_out) *penalty_out = pen;
  return f + (ok ? eps * pen : std::numeric_limits<double>::infinity());
}

}  // namespace

double penalized_action(const PenalizedProblem& prob, const PathVariable& path, double eps) {
  bool ok = true;
  const double v = action_terms(prob, path, eps, &ok, nullptr);
  if (!ok) throw Error("penalized_action: path node on or outside the boundary");
  return v;
}

std::vector<Vec> penalized_gradient(const PenalizedProblem& prob, const PathVariable& path,
                                    double eps) {
  const auto& dom = prob.domain;
  const int N = static_cast<int>(path.nodes.size());
  const int n = static_cast<int>(path.p.size());
  const double h = path.spacing();
  std::vector<Vec> grad(N, Vec::Zero(n));

  std::vector<Mat> G(N + 2);
  for (int k = 0; k <= N + 1; ++k) G[k] = dom.ambient.metric(path.point(k));

  for (int j = 1; j <= N; ++j) {
    const Vec& x = path.point(j);
    const Vec dm = x - path.point(j - 1);
    const Vec dp = path.point(j + 1) - x;
    const Mat Gm = 0.5 * (G[j - 1] + G[j]);
    const Mat Gp = 0.5 * (G[j] + G[j + 1]);
    Vec g = 2.0 * (Gm * dm) - 2.0 * (Gp * dp);
    const auto dG = metric_derivatives(dom.ambient, x);
    for (int l = 0; l < n; ++l)
      g[l] += 0.5 * (dm.dot(dG[l] * dm) + dp.dot(dG[l] * dp));
    g /= 2.0 * h;

    const double ph = dom.phi(x);
    if (ph <= 0.0) throw Error("penalized_gradient: path node on or outside the boundary");
    g += eps * h * (-2.0 / (ph * ph * ph)) * dom.grad(x);
    grad[static_cast<std::size_t>(j - 1)] = std::move(g);
  }
  return grad;
}

// ----------------------------------------------------------- optimizer ----

namespace {

// H^1 preconditioner: per coordinate solve of (1/h) tridiag(-1, 2, -1) + S,
// where S adds the positive part of the barrier curvature per node (without
// it the Newton-like step overshoots at contact nodes and Armijo crawls).
// Thomas algorithm with a coordinate-dependent diagonal.
std::vector<Vec> h1_solve(const std::vector<Vec>& g, const std::vector<Vec>& stiff, double h) {
  const int N = static_cast<int>(g.size());
  const int n = N ? static_cast<int>(g[0].size()) : 0;
  std::vector<Vec> u(N, Vec::Zero(n));
  if (!N) return u;
  const double off = -1.0 / h;
  std::vector<double> c(N), d(N);
  for (int i = 0; i < n; ++i) {
    double m = 2.0 / h + stiff[0][i];
    c[0] = off / m;
    d[0] = g[0][i] / m;
    for (int j = 1; j < N; ++j) {
      m = 2.0 / h + stiff[j][i] - off * c[j - 1];
      c[j] = off / m;
      d[j] = (g[j][i] - off * d[j - 1]) / m;
    }
    u[N - 1][i] = d[N - 1];
    for (int j = N - 2; j >= 0; --j) u[j][i] = d[j] - c[j] * u[j + 1][i];
  }
  return u;
}

struct StageOutcome {
  bool converged = false;
  bool interior_failure = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

// Newton step on the flat-metric part of the Hessian: block tridiagonal with
// A_j = (G_{j-1/2} + G_{j+1/2})/h + eps h 6 phi^-4 grad grad^T  (SPD),
// B_j = -G_{j+1/2}/h.  Block Thomas; empty result signals a failed solve.
std::vector<Vec> newton_solve(const PenalizedProblem& prob, const PathVariable& path,
                              const std::vector<Vec>& g, double eps) {
  const auto& dom = prob.domain;
  const int N = static_cast<int>(g.size());
  const int n = static_cast<int>(path.p.size());
  const double h = path.spacing();

  std::vector<Mat> mid(N + 1);
  Mat Gprev = dom.ambient.metric(path.point(0));
  for (int k = 0; k <= N; ++k) {
    Mat Gnext = dom.ambient.metric(path.point(k + 1));
    mid[k] = 0.5 * (Gprev + Gnext);
    Gprev = std::move(Gnext);
  }

  std::vector<Mat> D(N);
  std::vector<Vec> y(N), u(N, Vec::Zero(n));
  std::vector<Eigen::LDLT<Mat>> fact(N);
  for (int j = 0; j < N; ++j) {
    const Vec& x = path.nodes[j];
    const double ph = dom.phi(x);
    const Vec gp = dom.grad(x);
    Mat A = (mid[j] + mid[j + 1]) / h +
            (eps * h * 6.0 / std::pow(ph, 4.0)) * gp * gp.transpose();
    if (j == 0) {
      D[0] = std::move(A);
      y[0] = g[0];
    } else {
      const Mat B = -mid[j] / h;  // coupling between nodes j-1 and j
      const Mat W = fact[j - 1].solve(B);
      D[j] = A - B.transpose() * W;
      y[j] = g[j] - B.transpose() * fact[j - 1].solve(y[j - 1]);
    }
    fact[j].compute(D[j]);
    if (fact[j].info() != Eigen::Success) return {};
  }
  u[N - 1] = fact[N - 1].solve(y[N - 1]);
  for (int j = N - 2; j >= 0; --j)
    u[j] = fact[j].solve(y[j] - (-mid[j + 1] / h) * u[j + 1]);
  for (const Vec& uj : u)
    if (!uj.allFinite()) return {};
  return u;
}

StageOutcome minimize_stage(const PenalizedProblem& prob, PathVariable& path, double eps) {
  StageOutcome out;
  const double h = path.spacing();
  const double scale = std::max({1.0, path.p.norm(), path.q.norm()});

  double f0 = penalized_action(prob, path, eps);
  int flat_run = 0;  // consecutive accepted steps with rounding-level decrease
  for (int iter = 0; iter < prob.max_iter; ++iter) {
    out.iterations = iter + 1;
    auto g = penalized_gradient(prob, path, eps);
    double gmax = 0.0;
    for (const Vec& gj : g) gmax = std::max(gmax, gj.norm());
    out.grad_norm = gmax;

    auto u = newton_solve(prob, path, g, eps);
    double umax = 0.0, descent = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      umax = std::max(umax, u[j].norm());
      descent += g[j].dot(u[j]);
    }
    if (u.empty() || descent <= 0.0) {  // fall back to the smoothing solve
      std::vector<Vec> stiff(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) {
        const Vec& x = path.nodes[j];
        const double ph = prob.domain.phi(x);
        const Vec gp = prob.domain.grad(x);
        stiff[j] = eps * h * (6.0 / std::pow(ph, 4.0)) * gp.cwiseProduct(gp);
      }
      u = h1_solve(g, stiff, h);
      umax = descent = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j) {
        umax = std::max(umax, u[j].norm());
        descent += g[j].dot(u[j]);
      }
    }
    if (umax < prob.grad_tol * scale) {
      out.converged = true;
      return out;
    }

    double alpha = 1.0;
    bool accepted = false;
    bool any_interior = false;
    for (int trial = 0; trial < 50; ++trial) {
      PathVariable cand = path;
      for (std::size_t j = 0; j < u.size(); ++j) cand.nodes[j] -= alpha * u[j];
      bool interior = true;
      double f1 = action_terms(prob, cand, eps, &interior, nullptr);
      if (interior) {
        any_interior = true;
        if (f1 <= f0 - 1e-4 * alpha * descent) {
          flat_run = (f0 - f1 < 1e-13 * (1.0 + std::abs(f0))) ? flat_run + 1 : 0;
          path = std::move(cand);
          f0 = f1;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.interior_failure = !any_interior;
      out.converged = umax < 1e3 * prob.grad_tol * scale;  // stopped by rounding
      return out;
    }
    if (flat_run >= 5) {  // progress is rounding-limited along a flat valley
      out.converged = gmax < 1e3 * prob.grad_tol * scale;
      return out;
    }
  }
  return out;
}

}  // namespace

DomainConnectionReport connect_in_domain(const PenalizedProblem& prob) {
  return connect_in_domain(prob, chord_path(prob.domain, prob.p, prob.q, prob.nodes,
                                            prob.enter_band));
}

DomainConnectionReport connect_in_domain(const PenalizedProblem& prob, const PathVariable& seed) {
  const auto& dom = prob.domain;
  DomainConnectionReport rep;
  if (!(dom.phi(prob.p) > 0.0) || !(dom.phi(prob.q) > 0.0))
    throw Error("connect_in_domain: endpoint outside the domain");

  rep.path = seed;
  if ((prob.q - prob.p).norm() < 1e-14) {
    for (auto& x : rep.path.nodes) x = prob.p;  // constant path
    rep.status = ConnectStatus::Connected;
    rep.action = 0.0;
    rep.min_phi = dom.phi(prob.p);
    rep.diagnostics = "coincident endpoints: constant path";
    return rep;
  }

  // schedule: supplied, or geometric from the seed (penalty ~10% of f)
  std::vector<double> schedule = prob.eps_schedule;
  if (schedule.empty()) {
    bool ok = true;
    double pen = 0.0;
    const double f_seed = action_terms(prob, rep.path, 0.0, &ok, &pen);
    if (!ok) throw Error("connect_in_domain: seed path leaves the domain");
    const double eps0 = 0.1 * std::max(f_seed, 1e-3) / std::max(pen, 1e-12);
    for (int k = 0; k < 8; ++k) schedule.push_back(eps0 * std::pow(4.0, -k));
  }

  for (double eps : schedule) {
    auto oc = minimize_stage(prob, rep.path, eps);
    StageLog log;
    log.eps = eps;
    log.f = action_terms(prob, rep.path, 0.0, nullptr, nullptr);
    log.min_phi = min_phi_along(dom, rep.path);
    log.grad_norm = oc.grad_norm;
    log.iterations = oc.iterations;
    rep.stages.push_back(log);
    if (!oc.converged) {
      rep.status = ConnectStatus::NotFound;
      std::ostringstream os;
      if (oc.interior_failure)
        os << "loss of convexity: the path is pressed into the boundary (stage eps=" << eps
           << " cannot keep all nodes interior)";
      else
        os << "optimizer stall at stage eps=" << eps << " (gradient " << oc.grad_norm
           << " after " << oc.iterations << " iterations)";
      rep.diagnostics = os.str();
      rep.action = log.f;
      rep.min_phi = log.min_phi;
      rep.residual = oc.grad_norm;
      return rep;
    }
  }

  rep.action = rep.stages.back().f;
  rep.min_phi = rep.stages.back().min_phi;
  rep.residual = rep.stages.back().grad_norm;

  // the unpenalized action must have stabilized across the last stages
  bool stable = true;
  if (rep.stages.size() >= 2) {
    const double df = std::abs(rep.stages.back().f - rep.stages[rep.stages.size() - 2].f);
    stable = df < 1e-3 * (1.0 + std::abs(rep.action));
  }
  std::ostringstream os;
  os << rep.stages.size() << " stage(s), eps " << schedule.front() << " -> "
     << schedule.back() << "; f=" << rep.action << ", margin=" << rep.min_phi;
  if (!stable) {
    rep.status = ConnectStatus::NotFound;
    os << "; loss of convexity: the action did not stabilize along the schedule";
  } else {
    rep.status = ConnectStatus::Connected;
  }
  rep.diagnostics = os.str();
  return rep;
}

// ---------------------------------------------------------------- audit ----

ConditionAudit audit_domain_conditions(const DomainSpec& dom, const std::vector<Vec>& seeds,
                                       const std::vector<double>& levels, int directions) {
  if (levels.empty()) throw Error("audit_domain_conditions: empty level ladder");
  ConditionAudit audit;
  audit.M_tangent = -std::numeric_limits<double>::infinity();
  audit.M_alldir = -std::numeric_limits<double>::infinity();
  audit.grad_lower = std::numeric_limits<double>::infinity();
  audit.grad_upper = 0.0;
  audit.flow_first = 0.0;
  audit.flow_second = 0.0;

  const int n = seeds.empty() ? 0 : static_cast<int>(seeds[0].size());
  auto flow_field = [&](const Vec& x) {
    const Vec g = dom.grad(x);
    return Vec(g / std::max(1e-300, g.squaredNorm()));
  };

  for (double a : levels) {
    LevelStats st;
    st.level = a;
    st.grad_min = std::numeric_limits<double>::infinity();
    st.grad_max = 0.0;
    st.M_tangent = -std::numeric_limits<double>::infinity();
    st.M_alldir = -std::numeric_limits<double>::infinity();
    for (const Vec& seed : seeds) {
      Vec x;
      try {
        x = project_to_level(dom, seed, a);
      } catch (const Error&) {
        continue;
      }
      ++st.samples;
      const Mat G = dom.ambient.metric(x);
      const Vec g = dom.grad(x);
      const double gn = std::sqrt(g.dot(G.ldlt().solve(g)));  // metric norm
      st.grad_min = std::min(st.grad_min, gn);
      st.grad_max = std::max(st.grad_max, gn);

      for (const Vec& v : tangent_directions(dom, x, directions))
        st.M_tangent = std::max(st.M_tangent, hessian_quadratic(dom, x, v) / a);
      for (const Vec& d : unit_directions(n, directions)) {
        const double nn = d.dot(G * d);
        if (nn <= 0) continue;
        const Vec v = d / std::sqrt(nn);
        st.M_alldir = std::max(st.M_alldir, hessian_quadratic(dom, x, v) / a);
      }

      // sampled derivatives of the projection flow grad phi / |grad phi|^2
      const double h = 1e-4 * std::max(1.0, x.norm());
      Mat J(n, n);
      for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        J.col(i) = (flow_field(xp) - flow_field(xm)) / (2.0 * h);
      }
      audit.flow_first = std::max(audit.flow_first, J.norm());
      double second = 0.0;
      for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const Vec d2 = (flow_field(xp) - 2.0 * flow_field(x) + flow_field(xm)) / (h * h);
        second = std::max(second, d2.norm());
      }
      audit.flow_second = std::max(audit.flow_second, second);
    }
    if (st.samples > 0) {
      audit.grad_lower = std::min(audit.grad_lower, st.grad_min);
      audit.grad_upper = std::max(audit.grad_upper, st.grad_max);
      audit.M_tangent = std::max(audit.M_tangent, st.M_tangent);
      audit.M_alldir = std::max(audit.M_alldir, st.M_alldir);
    }
    audit.levels.push_back(st);
  }

  // gradient lower bound must not decay along the ladder
  const LevelStats* first = nullptr;
  const LevelStats* last = nullptr;
  for (const auto& st : audit.levels)
    if (st.samples > 0) {
      if (!first) first = &st;
      last = &st;
    }
  audit.grad_bounds_ok = first && last && audit.grad_lower > 1e-8 &&
                         last->grad_min > 0.3 * first->grad_min;
  audit.notes =
      "flow-derivative magnitudes are sampled heuristics (no pass/fail); the Hessian "
      "bound M is the least constant observed on the sampled ladder";
  return audit;
}

}  // namespace geolab
