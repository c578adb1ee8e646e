#include "geolab/models.hpp"

#include <algorithm>
#include <cmath>

namespace geolab::models {

namespace {

// Spherical parameterisation of S^k in R^{k+1}:
// u_1 = cos t1, u_i = sin t1 .. sin t_{i-1} cos t_i, u_{k+1} = sin t1 .. sin t_k.
Vec sphere_point(const Eigen::Ref<const Vec>& th) {
  const int k = static_cast<int>(th.size());
  Vec u(k + 1);
  double run = 1.0;
  for (int i = 0; i < k; ++i) {
    u[i] = run * std::cos(th[i]);
    run *= std::sin(th[i]);
  }
  u[k] = run;
  return u;
}

// Round-metric diagonal e_i = prod_{j<i} sin^2 t_j.
Vec sphere_metric_diag(const Eigen::Ref<const Vec>& th) {
  const int k = static_cast<int>(th.size());
  Vec e(k);
  double run = 1.0;
  for (int i = 0; i < k; ++i) {
    e[i] = run;
    const double s = std::sin(th[i]);
    run *= s * s;
  }
  return e;
}

// Angles from a unit vector; throws at chart poles.
Vec inverse_sphere(const Eigen::Ref<const Vec>& u) {
  const int k = static_cast<int>(u.size()) - 1;
  Vec th(k);
  double tail2 = u.squaredNorm();
  for (int i = 0; i < k; ++i) {
    tail2 -= u[i] * u[i];
    const double tail = std::sqrt(std::max(0.0, tail2));
    if (i + 1 < k) {
      if (tail < 1e-12)
        throw Error("pseudosphere chart: polar singularity (angle " + std::to_string(i) + ")");
      th[i] = std::atan2(tail, u[i]);
    } else if (i + 1 == k) {
      th[i] = std::atan2(u[k], u[k - 1]);
    }
  }
  return th;
}

}  // namespace

GeometryModel flat(int dim, int index) {
  if (dim < 1 || index < 0 || index > dim) throw Error("flat: bad (dim, index)");
  GeometryModel m;
  m.dim = dim;
  m.index = index;
  m.name = "flat-r" + std::to_string(dim) + "-nu" + std::to_string(index);
  Vec diag = Vec::Ones(dim);
  diag.head(index).setConstant(-1.0);
  Mat g = diag.asDiagonal();
  m.metric = [g](const Vec&) { return g; };
  m.metric_deriv = [dim](const Vec&) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); };
  m.accel = [](const Vec&, const Vec&, Vec& acc) { acc.setZero(); };
  return m;
}

Vec Pseudosphere::embed(const Vec& z) const {
  Vec P(n + 1);
  if (nu == 0) {
    P = sphere_point(z);
  } else {
    const double rho = z[0];
    const int ka = nu - 1, kb = n - nu;
    P.head(nu) = std::sinh(rho) * sphere_point(z.segment(1, ka));
    P.tail(n + 1 - nu) = std::cosh(rho) * sphere_point(z.segment(1 + ka, kb));
  }
  return P;
}

Vec Pseudosphere::embed_velocity(const Vec& z, const Vec& vz) const {
  // 4th-order directional difference of embed; plenty for validation work.
  const double h = 1e-4;
  const Vec Pp2 = embed(z + 2 * h * vz), Pp = embed(z + h * vz);
  const Vec Pm = embed(z - h * vz), Pm2 = embed(z - 2 * h * vz);
  return (-Pp2 + 8.0 * Pp - 8.0 * Pm + Pm2) / (12.0 * h);
}

Vec Pseudosphere::project(const Vec& P) const {
  if (P.size() != n + 1) throw Error("pseudosphere: ambient point has wrong dimension");
  Vec z(n);
  if (nu == 0) {
    z = inverse_sphere(P.normalized());
    return z;
  }
  const int ka = nu - 1, kb = n - nu;
  const Vec neg = P.head(nu), pos = P.tail(n + 1 - nu);
  if (kb == 0 && pos[0] <= 0)
    throw Error("pseudosphere chart: point lies on the sheet the chart does not cover");
  if (nu == 1) {
    const double rho = std::asinh(neg[0]);
    z[0] = rho;
    if (kb > 0) z.tail(kb) = inverse_sphere(pos / std::cosh(rho));
  } else {
    const double sh = neg.norm();
    if (sh < 1e-12)
      throw Error("pseudosphere chart: rho = 0 singularity (nu >= 2), cannot project");
    z[0] = std::asinh(sh);
    z.segment(1, ka) = inverse_sphere(neg / sh);
    if (kb > 0) z.tail(kb) = inverse_sphere(pos / std::cosh(z[0]));
  }
  return z;
}

Mat Pseudosphere::tangent_basis(const Vec& P) const {
  const int N = n + 1;
  Vec eta = Vec::Ones(N);
  eta.head(nu).setConstant(-1.0);
  auto ip = [&eta](const Vec& a, const Vec& b) { return a.dot(eta.asDiagonal() * b); };

  // Euclidean-orthonormal basis of {v : <v,P>_eta = 0} = perp of (eta .* P).
  Vec w = eta.asDiagonal() * P;
  Eigen::HouseholderQR<Mat> qr(w);
  Mat Q = qr.householderQ() * Mat::Identity(N, N);
  std::vector<Vec> pool;
  for (int j = 1; j < N; ++j) pool.push_back(Q.col(j));

  // Eta-Gram-Schmidt with pivoting; a null pair is combined into definite
  // vectors when every remaining candidate is eta-null.
  Mat B(N, n);
  std::vector<double> signs;
  int filled = 0;
  while (filled < n) {
    int best = -1;
    double best_q = 0.0;
    for (size_t i = 0; i < pool.size(); ++i) {
      const double q = std::abs(ip(pool[i], pool[i]));
      if (q > best_q) {
        best_q = q;
        best = static_cast<int>(i);
      }
    }
    if (best < 0 || best_q < 1e-10) {
      // all-null corner: find i, j with <w_i, w_j> != 0 and recombine
      bool fixed = false;
      for (size_t i = 0; i < pool.size() && !fixed; ++i)
        for (size_t j = i + 1; j < pool.size() && !fixed; ++j) {
          if (std::abs(ip(pool[i], pool[j])) > 1e-10) {
            Vec a = pool[i] + pool[j], b = pool[i] - pool[j];
            pool[i] = a;
            pool[j] = b;
            fixed = true;
          }
        }
      if (!fixed) throw Error("pseudosphere: tangent basis construction failed");
      continue;
    }
    Vec v = pool[best];
    pool.erase(pool.begin() + best);
    const double q = ip(v, v);
    const double sign = q > 0 ? 1.0 : -1.0;
    v /= std::sqrt(std::abs(q));
    B.col(filled) = v;
    signs.push_back(sign);
    ++filled;
    for (auto& u : pool) u -= sign * ip(u, v) * v;
  }
  // order columns timelike-first so parameter boxes read (timelike, spacelike..)
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&signs](int a, int b) { return signs[a] < signs[b]; });
  Mat Bo(N, n);
  for (int i = 0; i < n; ++i) Bo.col(i) = B.col(order[i]);
  return Bo;
}

Pseudosphere pseudosphere(int n, int nu) {
  if (n < 1 || nu < 0 || nu > n) throw Error("pseudosphere: bad (n, nu)");
  Pseudosphere ps;
  ps.n = n;
  ps.nu = nu;

  // --- intrinsic chart ---
  GeometryModel chart;
  chart.dim = n;
  chart.index = nu;
  chart.name = "pseudosphere-s" + std::to_string(n) + "-nu" + std::to_string(nu) + "-chart";
  const int ka = nu >= 1 ? nu - 1 : 0;
  const int kb = nu >= 1 ? n - nu : n;
  if (nu == 0) {
    chart.metric = [](const Vec& z) {
      Vec e = sphere_metric_diag(z);
      return static_cast<Mat>(e.asDiagonal());
    };
    chart.metric_deriv = [n](const Vec& z) {
      std::vector<Mat> dg(n, Mat::Zero(n, n));
      const Vec e = sphere_metric_diag(z);
      for (int l = 0; l < n; ++l) {
        const double cot2 = 2.0 * std::cos(z[l]) / std::sin(z[l]);
        for (int i = l + 1; i < n; ++i) dg[l](i, i) = e[i] * cot2;
      }
      return dg;
    };
  } else {
    chart.metric = [n, ka, kb](const Vec& z) {
      const double rho = z[0];
      const double sh = std::sinh(rho), ch = std::cosh(rho);
      Vec diag(n);
      diag[0] = -1.0;
      if (ka > 0) diag.segment(1, ka) = -(sh * sh) * sphere_metric_diag(z.segment(1, ka));
      if (kb > 0) diag.tail(kb) = (ch * ch) * sphere_metric_diag(z.segment(1 + ka, kb));
      return static_cast<Mat>(diag.asDiagonal());
    };
    chart.metric_deriv = [n, ka, kb](const Vec& z) {
      std::vector<Mat> dg(n, Mat::Zero(n, n));
      const double rho = z[0];
      const double sh = std::sinh(rho), ch = std::cosh(rho);
      const Vec ea = ka > 0 ? sphere_metric_diag(z.segment(1, ka)) : Vec();
      const Vec eb = kb > 0 ? sphere_metric_diag(z.segment(1 + ka, kb)) : Vec();
      for (int i = 0; i < ka; ++i) dg[0](1 + i, 1 + i) = -2.0 * sh * ch * ea[i];
      for (int i = 0; i < kb; ++i) dg[0](1 + ka + i, 1 + ka + i) = 2.0 * sh * ch * eb[i];
      for (int l = 0; l < ka; ++l) {
        const double cot2 = 2.0 * std::cos(z[1 + l]) / std::sin(z[1 + l]);
        for (int i = l + 1; i < ka; ++i) dg[1 + l](1 + i, 1 + i) = -(sh * sh) * ea[i] * cot2;
      }
      for (int l = 0; l < kb; ++l) {
        const double cot2 = 2.0 * std::cos(z[1 + ka + l]) / std::sin(z[1 + ka + l]);
        for (int i = l + 1; i < kb; ++i)
          dg[1 + ka + l](1 + ka + i, 1 + ka + i) = (ch * ch) * eb[i] * cot2;
      }
      return dg;
    };
  }
  ps.chart = chart;

  // --- embedded quadric model ---
  GeometryModel emb;
  emb.dim = n + 1;
  emb.index = nu;
  emb.name = "pseudosphere-s" + std::to_string(n) + "-nu" + std::to_string(nu) + "-embedded";
  Vec eta = Vec::Ones(n + 1);
  eta.head(nu).setConstant(-1.0);
  {
    Mat g = eta.asDiagonal();
    emb.metric = [g](const Vec&) { return g; };
    const int N = n + 1;
    emb.metric_deriv = [N](const Vec&) { return std::vector<Mat>(N, Mat::Zero(N, N)); };
    // G^k_ij = eta_ij x^k  =>  x'' = -<x',x'>_eta x, which preserves the quadric
    emb.connection = [eta, N](const Vec& x) {
      Christoffel ch;
      ch.gamma.resize(N);
      Mat etam = eta.asDiagonal();
      for (int k = 0; k < N; ++k) ch.gamma[k] = etam * x[k];
      return ch;
    };
    emb.accel = [eta](const Vec& x, const Vec& v, Vec& acc) {
      const double q = v.dot(eta.asDiagonal() * v);
      acc = -q * x;
    };
  }
  ps.embedded = emb;
  return ps;
}

GeometryModel bates_torus() {
  GeometryModel m;
  m.dim = 2;
  m.index = 0;
  m.name = "bates-torus";
  m.periods = {4.0 * M_PI, 4.0 * M_PI};
  m.connection = [](const Vec& x) {
    (void)x;
    Christoffel ch;
    ch.gamma.assign(2, Mat::Zero(2, 2));
    ch.gamma[0](0, 1) = 0.5;  // G^x_xy
    ch.gamma[0](1, 0) = 0.5;
    ch.gamma[1](0, 0) = -1.0;  // G^y_xx
    return ch;
  };
  m.accel = [](const Vec&, const Vec& v, Vec& acc) {
    acc[0] = -v[0] * v[1];
    acc[1] = v[0] * v[0];
  };
  return m;
}

GeometryModel smith_torus() {
  GeometryModel m;
  m.dim = 2;
  m.index = 1;
  m.name = "smith-torus";
  m.periods = {4.0 * M_PI, 4.0 * M_PI};
  m.metric = [](const Vec& x) {
    const double s = std::sin(2.0 * x[0]), c = std::cos(2.0 * x[0]);
    Mat g(2, 2);
    g << s, -c, -c, -s;
    return g;
  };
  m.metric_deriv = [](const Vec& x) {
    const double s = std::sin(2.0 * x[0]), c = std::cos(2.0 * x[0]);
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[0] << 2 * c, 2 * s, 2 * s, -2 * c;
    return dg;
  };
  // Levi-Civita worked out by hand; note g^{-1} = g since det g = -1.
  m.connection = [](const Vec& x) {
    const double s = std::sin(2.0 * x[0]), c = std::cos(2.0 * x[0]);
    Christoffel ch;
    ch.gamma.assign(2, Mat::Zero(2, 2));
    ch.gamma[0] << -s * c, c * c, c * c, s * c;
    ch.gamma[1] << -(1.0 + s * s), s * c, s * c, -c * c;
    return ch;
  };
  m.accel = [](const Vec& x, const Vec& v, Vec& acc) {
    const double s = std::sin(2.0 * x[0]), c = std::cos(2.0 * x[0]);
    acc[0] = -(-s * c * v[0] * v[0] + 2.0 * c * c * v[0] * v[1] + s * c * v[1] * v[1]);
    acc[1] = -(-(1.0 + s * s) * v[0] * v[0] + 2.0 * s * c * v[0] * v[1] - c * c * v[1] * v[1]);
  };
  return m;
}

std::vector<Vec> lattice_lifts(const LatticeQuotient& q, const Vec& a, const Vec& b,
                               int max_winding) {
  const int n = static_cast<int>(b.size());
  std::vector<int> periodic;
  for (int i = 0; i < n && i < static_cast<int>(q.periods.size()); ++i)
    if (q.periods[i] > 0) periodic.push_back(i);

  struct Entry {
    double d2;
    std::vector<int> winding;
    Vec point;
  };
  std::vector<Entry> entries;
  std::vector<int> k(periodic.size(), -max_winding);
  for (;;) {
    Vec lift = b;
    std::vector<int> w(periodic.size());
    for (size_t j = 0; j < periodic.size(); ++j) {
      lift[periodic[j]] += k[j] * q.periods[periodic[j]];
      w[j] = k[j];
    }
    entries.push_back({(lift - a).squaredNorm(), w, lift});
    // odometer
    size_t j = 0;
    for (; j < k.size(); ++j) {
      if (k[j] < max_winding) {
        ++k[j];
        break;
      }
      k[j] = -max_winding;
    }
    if (j == k.size()) break;
    if (periodic.empty()) break;
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.d2 != y.d2) return x.d2 < y.d2;
    return x.winding < y.winding;
  });
  std::vector<Vec> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.point));
  return out;
}

Vec quotient_displacement(const LatticeQuotient& q, const Vec& a, const Vec& b) {
  Vec d = b - a;
  for (int i = 0; i < d.size() && i < static_cast<int>(q.periods.size()); ++i)
    if (q.periods[i] > 0) d[i] = std::remainder(d[i], q.periods[i]);
  return d;
}

}  // namespace geolab::models
