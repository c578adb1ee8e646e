#include "geolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace geolab {

Vec Christoffel::apply(const Vec& u, const Vec& v) const {
  const int n = dim();
  Vec out(n);
  for (int k = 0; k < n; ++k) out[k] = u.dot(gamma[k] * v);
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::SpanComplete: return "span-complete";
    case Termination::LeftDomain: return "left-domain";
    case Termination::StepUnderflow: return "step-underflow";
    case Termination::MaxSteps: return "max-steps";
  }
  return "unknown";
}

std::vector<Mat> metric_derivatives(const GeometryModel& m, const Vec& p) {
  if (!m.has_metric()) throw Error("metric_derivatives: model '" + m.name + "' has no metric");
  if (m.metric_deriv) return m.metric_deriv(p);
  const int n = m.dim;
  std::vector<Mat> dg(n);
  Vec x = p;
  for (int l = 0; l < n; ++l) {
    const double h = std::max(1e-5, 1e-5 * std::abs(p[l]));
    const double xl = p[l];
    x[l] = xl + 2 * h;
    Mat gpp = m.metric(x);
    x[l] = xl + h;
    Mat gp = m.metric(x);
    x[l] = xl - h;
    Mat gm = m.metric(x);
    x[l] = xl - 2 * h;
    Mat gmm = m.metric(x);
    x[l] = xl;
    dg[l] = (-gpp + 8.0 * gp - 8.0 * gm + gmm) / (12.0 * h);
  }
  return dg;
}

namespace {

Christoffel christoffel_from_metric(const GeometryModel& m, const Vec& p);

}  // namespace

Christoffel christoffel(const GeometryModel& m, const Vec& p) {
  if (!m.in_domain(p)) throw Error("christoffel: point outside domain of model '" + m.name + "'");
  if (m.connection) return m.connection(p);
  if (!m.has_metric()) throw Error("christoffel: model '" + m.name + "' has neither metric nor connection");
  return christoffel_from_metric(m, p);
}

namespace {

Christoffel christoffel_from_metric(const GeometryModel& m, const Vec& p) {
  const int n = m.dim;
  const Mat g = m.metric(p);
  Eigen::FullPivLU<Mat> lu(g);
  // rcond via extreme |diagonal| of U is crude but adequate as a degeneracy guard
  const Vec du = lu.matrixLU().diagonal().cwiseAbs();
  if (!lu.isInvertible() || du.minCoeff() < 1e-12 * std::max(1.0, du.maxCoeff()))
    throw Error("christoffel: metric of '" + m.name + "' is degenerate at the requested point");
  const Mat ginv = lu.inverse();
  const std::vector<Mat> dg = metric_derivatives(m, p);
  Christoffel ch;
  ch.gamma.assign(n, Mat::Zero(n, n));
  // G^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l)
          sum += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        ch.gamma[k](i, j) = 0.5 * sum;
        ch.gamma[k](j, i) = ch.gamma[k](i, j);
      }
  return ch;
}

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
// b - b* (error weights, 5th minus embedded 4th)
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695, E4 = B4 - 393.0 / 640,
                 E5 = B5 + 92097.0 / 339200, E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

struct Rhs {
  const GeometryModel& m;
  mutable Vec acc;

  explicit Rhs(const GeometryModel& model) : m(model), acc(model.dim) {}

  // y = (x, v) packed; dy = (v, -G(v,v))
  void operator()(const Vec& y, Vec& dy) const {
    const int n = m.dim;
    const auto x = y.head(n);
    const auto v = y.tail(n);
    dy.head(n) = v;
    if (m.accel) {
      m.accel(x, v, acc);
      dy.tail(n) = acc;
    } else if (m.connection) {
      dy.tail(n) = -m.connection(x).apply(v, v);
    } else {
      // Stage points may probe past the domain edge; a degenerate metric
      // there must read as "reject the step", not abort the integration.
      try {
        dy.tail(n) = -christoffel_from_metric(m, x).apply(v, v);
      } catch (const Error&) {
        dy.tail(n).setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
};

// One classical RK4 step (used for the fixed-step mode and for boundary bisection probes).
void rk4_step(const Rhs& f, const Vec& y0, double h, Vec& y1, Vec& k1, Vec& k2, Vec& k3, Vec& k4,
              Vec& tmp) {
  f(y0, k1);
  tmp = y0 + 0.5 * h * k1;
  f(tmp, k2);
  tmp = y0 + 0.5 * h * k2;
  f(tmp, k3);
  tmp = y0 + h * k3;
  f(tmp, k4);
  y1 = y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Stepper {
  Rhs f;
  Vec k1, k2, k3, k4, k5, k6, k7, ytmp, yerr;
  bool fsal_valid = false;

  explicit Stepper(const GeometryModel& m)
      : f(m),
        k1(2 * m.dim), k2(2 * m.dim), k3(2 * m.dim), k4(2 * m.dim), k5(2 * m.dim), k6(2 * m.dim),
        k7(2 * m.dim), ytmp(2 * m.dim), yerr(2 * m.dim) {}

  // Attempt one DP45 step of size h from y0; on return y1 holds the 5th-order
  // result and the weighted rms error is returned. k1 is reused via FSAL.
  double attempt(const Vec& y0, double h, Vec& y1, double abs_tol, double rel_tol) {
    if (!fsal_valid) f(y0, k1);
    ytmp = y0 + h * (A21 * k1);
    f(ytmp, k2);
    ytmp = y0 + h * (A31 * k1 + A32 * k2);
    f(ytmp, k3);
    ytmp = y0 + h * (A41 * k1 + A42 * k2 + A43 * k3);
    f(ytmp, k4);
    ytmp = y0 + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
    f(ytmp, k5);
    ytmp = y0 + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
    f(ytmp, k6);
    y1 = y0 + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    f(y1, k7);
    yerr = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    double sum = 0.0;
    const int N = static_cast<int>(y0.size());
    for (int i = 0; i < N; ++i) {
      const double sc = abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double r = yerr[i] / sc;
      sum += r * r;
    }
    return std::sqrt(sum / N);
  }

  void commit() {
    k1.swap(k7);  // FSAL
    fsal_valid = true;
  }
  void invalidate() { fsal_valid = false; }
};

}  // namespace

Termination integrate_observe(const GeometryModel& m, const GeodesicState& state0, double s_end,
                              const IntegratorConfig& cfg,
                              const std::function<bool(const GeodesicState&)>& on_sample,
                              GeodesicState* final_state, StepStats* stats) {
  const int n = m.dim;
  if (state0.pos.size() != n || state0.vel.size() != n)
    throw Error("integrate: state dimension does not match model '" + m.name + "'");
  if (!m.in_domain(state0.pos))
    throw Error("integrate: initial point outside domain of model '" + m.name + "'");

  const double s0 = state0.s;
  const double span = s_end - s0;
  const double dir = span >= 0 ? 1.0 : -1.0;
  StepStats st;
  st.h_min_used = std::numeric_limits<double>::infinity();

  Vec y(2 * n), ynew(2 * n);
  y.head(n) = state0.pos;
  y.tail(n) = state0.vel;
  double s = s0;

  GeodesicState cur{state0.pos, state0.vel, s0};
  auto emit = [&](const Vec& yy, double ss) {
    cur.pos = yy.head(n);
    cur.vel = yy.tail(n);
    cur.s = ss;
    return !on_sample || on_sample(cur);
  };
  auto finish = [&](Termination t) {
    if (final_state) *final_state = cur;
    if (stats) {
      if (!std::isfinite(st.h_min_used)) st.h_min_used = 0.0;
      *stats = st;
    }
    return t;
  };

  if (!emit(y, s)) return finish(Termination::SpanComplete);
  if (span == 0.0) return finish(Termination::SpanComplete);

  Stepper stepper(m);
  Vec r1(2 * n), r2(2 * n), r3(2 * n), r4(2 * n), rt(2 * n), yprobe(2 * n), ylo(2 * n);

  // Bisect a domain exit inside [s, s+h] (y inside, step target outside):
  // probes are single RK4 sub-steps from y. Locates s* to 1e-10 and leaves
  // the last interior state in `cur`.
  auto bisect_exit = [&](double h) {
    double alo = 0.0, ahi = 1.0;
    ylo = y;
    while (std::abs(h) * (ahi - alo) > 1e-10) {
      const double amid = 0.5 * (alo + ahi);
      rk4_step(stepper.f, y, amid * h, yprobe, r1, r2, r3, r4, rt);
      if (m.in_domain(yprobe.head(n))) {
        alo = amid;
        ylo = yprobe;
      } else {
        ahi = amid;
      }
    }
    emit(ylo, s + alo * h);
  };

  const bool fixed = cfg.fixed_step > 0.0;
  double h = fixed ? dir * cfg.fixed_step
                   : dir * std::min(cfg.h_max, cfg.h_init > 0 ? cfg.h_init : std::abs(span) / 100.0);
  if (std::abs(h) > std::abs(span)) h = span;

  double err_prev = 1.0;
  bool just_rejected = false;
  std::int64_t steps = 0;

  while (dir * (s_end - s) > 1e-14 * std::max(1.0, std::abs(s_end))) {
    if (++steps > cfg.max_steps) return finish(Termination::MaxSteps);
    if (dir * (s + h) > dir * s_end) h = s_end - s;

    if (fixed) {
      rk4_step(stepper.f, y, h, ynew, r1, r2, r3, r4, rt);
      ++st.accepted;
    } else {
      const double err = stepper.attempt(y, h, ynew, cfg.abs_tol, cfg.rel_tol);
      if (!(err <= 1.0) || !ynew.allFinite()) {
        ++st.rejected;
        stepper.invalidate();  // k7 was evaluated at a rejected point
        double fac = std::isfinite(err) && err > 0 ? 0.9 * std::pow(err, -0.2) : 0.1;
        fac = std::clamp(fac, 0.1, 0.9);
        h *= fac;
        just_rejected = true;
        if (std::abs(h) < cfg.h_min) return finish(Termination::StepUnderflow);
        continue;
      }
      st.h_min_used = std::min(st.h_min_used, std::abs(h));
      st.h_max_used = std::max(st.h_max_used, std::abs(h));
      ++st.accepted;
      // PI step-size controller
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, just_rejected ? 1.0 : 5.0);
      err_prev = e;
      just_rejected = false;
      const double h_next = dir * std::min(std::abs(h) * fac, cfg.h_max);
      if (!m.in_domain(ynew.head(n))) {
        bisect_exit(h);
        return finish(Termination::LeftDomain);
      }
      stepper.commit();
      s += h;
      y.swap(ynew);
      h = h_next;
      if (!emit(y, s)) return finish(Termination::SpanComplete);
      const double remaining = dir * (s_end - s);
      if (remaining > 1e-14 * std::max(1.0, std::abs(s_end)) && std::abs(h) < cfg.h_min)
        return finish(Termination::StepUnderflow);
      continue;
    }

    // fixed-step path
    if (!ynew.allFinite()) return finish(Termination::StepUnderflow);
    if (!m.in_domain(ynew.head(n))) {
      bisect_exit(h);
      return finish(Termination::LeftDomain);
    }
    s += h;
    y.swap(ynew);
    st.h_min_used = std::min(st.h_min_used, std::abs(h));
    st.h_max_used = std::max(st.h_max_used, std::abs(h));
    if (!emit(y, s)) return finish(Termination::SpanComplete);
  }
  return finish(Termination::SpanComplete);
}

Trajectory integrate_geodesic(const GeometryModel& m, const GeodesicState& state0, double s_end,
                              const IntegratorConfig& cfg) {
  Trajectory tr;
  const bool record_energy = m.has_metric();
  auto observer = [&](const GeodesicState& st) {
    tr.samples.push_back(st);
    if (record_energy) tr.energy_series.push_back(st.vel.dot(m.metric(st.pos) * st.vel));
    return true;
  };
  tr.termination = integrate_observe(m, state0, s_end, cfg, observer, nullptr, &tr.stats);
  return tr;
}

Vec exp_map(const GeometryModel& m, const Vec& p, const Vec& v, double s,
            const IntegratorConfig& cfg) {
  GeodesicState st0{p, v, 0.0};
  GeodesicState fin;
  const Termination t = integrate_observe(m, st0, s, cfg, nullptr, &fin, nullptr);
  if (t != Termination::SpanComplete)
    throw Error("exp_map: geodesic did not reach the requested parameter (" + to_string(t) + ")");
  return fin.pos;
}

double energy(const GeometryModel& m, const GeodesicState& st) {
  if (!m.has_metric()) throw Error("energy: model '" + m.name + "' has no metric");
  return st.vel.dot(m.metric(st.pos) * st.vel);
}

double killing_charge(const GeometryModel& m, const std::function<Vec(const Vec&)>& field,
                      const GeodesicState& st) {
  if (!m.has_metric()) throw Error("killing_charge: model '" + m.name + "' has no metric");
  return field(st.pos).dot(m.metric(st.pos) * st.vel);
}

namespace {

double series_drift(const std::vector<double>& values, const std::vector<double>& term_scales,
                    const std::vector<double>& s) {
  if (values.size() < 2) return 0.0;
  const double v0 = values.front();
  double worst = 0.0;
  // Running max of the term scale: digits cancelled in a badly-conditioned
  // episode stay lost, so later samples are judged against the worst
  // cancellation seen so far, not just the local one.
  double scale_run = 1e-300;
  for (size_t k = 1; k < values.size(); ++k) {
    scale_run = std::max(scale_run, term_scales[k]);
    const double scale = std::max(std::abs(v0), scale_run);
    const double span = std::max(1.0, std::abs(s[k] - s.front()));
    worst = std::max(worst, std::abs(values[k] - v0) / (scale * span));
  }
  return worst;
}

}  // namespace

double relative_energy_drift(const GeometryModel& m, const Trajectory& tr) {
  if (!m.has_metric()) throw Error("relative_energy_drift: model '" + m.name + "' has no metric");
  std::vector<double> vals, scales, ss;
  vals.reserve(tr.samples.size());
  for (const auto& st : tr.samples) {
    const Mat g = m.metric(st.pos);
    vals.push_back(st.vel.dot(g * st.vel));
    // |grad e| ~ ||g|| |v|^2: the absolute energy accuracy a state held to
    // relative accuracy r can support is r * this scale
    scales.push_back(g.cwiseAbs().maxCoeff() * st.vel.squaredNorm());
    ss.push_back(st.s);
  }
  return series_drift(vals, scales, ss);
}

double relative_killing_drift(const GeometryModel& m, const std::function<Vec(const Vec&)>& field,
                              const Trajectory& tr) {
  if (!m.has_metric()) throw Error("relative_killing_drift: model '" + m.name + "' has no metric");
  std::vector<double> vals, scales, ss;
  for (const auto& st : tr.samples) {
    const Mat g = m.metric(st.pos);
    const Vec K = field(st.pos);
    vals.push_back(K.dot(g * st.vel));
    scales.push_back(g.cwiseAbs().maxCoeff() * K.norm() * st.vel.norm());
    ss.push_back(st.s);
  }
  return series_drift(vals, scales, ss);
}

std::string trajectory_csv(const Trajectory& tr, bool with_energy) {
  std::string out;
  if (tr.samples.empty()) return out;
  const int n = static_cast<int>(tr.samples.front().pos.size());
  out += "s";
  for (int i = 0; i < n; ++i) out += ",x_" + std::to_string(i);
  for (int i = 0; i < n; ++i) out += ",v_" + std::to_string(i);
  if (with_energy) out += ",energy";
  out += "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  };
  for (size_t k = 0; k < tr.samples.size(); ++k) {
    const auto& st = tr.samples[k];
    put(st.s);
    for (int i = 0; i < n; ++i) {
      out += ',';
      put(st.pos[i]);
    }
    for (int i = 0; i < n; ++i) {
      out += ',';
      put(st.vel[i]);
    }
    if (with_energy) {
      out += ',';
      put(k < tr.energy_series.size() ? tr.energy_series[k] : 0.0);
    }
    out += '\n';
  }
  return out;
}

}  // namespace geolab
