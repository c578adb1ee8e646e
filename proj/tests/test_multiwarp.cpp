#include "doctest.h"
#include "geolab/connect.hpp"
#include "geolab/geometry.hpp"
#include "geolab/models.hpp"
#include "geolab/multiwarp.hpp"

#include <cmath>
#include <random>

using namespace geolab;

namespace {

// Hand-built multiwarped chart metric on (t, alpha, theta, phi):
// g = -dt^2 + f1(t)^2 dalpha^2 + f2(t)^2 (dtheta^2 + sin^2 theta dphi^2)
// with a circle fiber and a round-sphere fiber. Written directly here so
// the conservation oracle does not depend on the module under test.
double wf1(double t) { return 1.2 + 0.3 * std::sin(t); }
double wf1d(double t) { return 0.3 * std::cos(t); }
double wf2(double t) { return 1.1 + 0.25 * std::cos(0.7 * t); }
double wf2d(double t) { return -0.175 * std::sin(0.7 * t); }

GeometryModel handbuilt_multiwarp() {
  GeometryModel m;
  m.dim = 4;
  m.index = 1;
  m.name = "handbuilt-multiwarp";
  m.metric = [](const Vec& z) {
    const double f1 = wf1(z[0]), f2 = wf2(z[0]), st = std::sin(z[2]);
    Vec d(4);
    d << -1.0, f1 * f1, f2 * f2, f2 * f2 * st * st;
    return static_cast<Mat>(d.asDiagonal());
  };
  m.metric_deriv = [](const Vec& z) {
    const double f1 = wf1(z[0]), f2 = wf2(z[0]);
    const double d1 = wf1d(z[0]), d2 = wf2d(z[0]);
    const double st = std::sin(z[2]), ct = std::cos(z[2]);
    std::vector<Mat> dg(4, Mat::Zero(4, 4));
    dg[0](1, 1) = 2.0 * f1 * d1;
    dg[0](2, 2) = 2.0 * f2 * d2;
    dg[0](3, 3) = 2.0 * f2 * d2 * st * st;
    dg[2](3, 3) = f2 * f2 * 2.0 * st * ct;
    return dg;
  };
  return m;
}

}  // namespace

// [DERIVED, MANDATORY ORACLE] the reduction behind the warped fiber-length
// functional rests on two first integrals of the full geodesic flow:
//   c_i^2 = f_i^4(t) g_i(xdot_i, xdot_i)   (fiber pregeodesic constants)
//   K     = tdot^2 - sum_j c_j^2 / f_j^2(t)
// Both must be conserved by direct integration of the 4-d chart metric
// before any reduced formula is trusted.
TEST_CASE("multiwarp oracle: fiber constants and energy parameter conserved") {
  auto m = handbuilt_multiwarp();
  std::mt19937_64 gen(424242);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  for (int trial = 0; trial < 5; ++trial) {
    Vec z0(4), v0(4);
    z0 << 0.4 * uni(gen), M_PI * uni(gen), M_PI / 2 + 0.3 * uni(gen), M_PI * uni(gen);
    v0 << 0.8 + 0.3 * uni(gen), 0.5 * uni(gen), 0.25 * uni(gen), 0.25 * uni(gen);

    auto conserved = [&](const GeodesicState& g) {
      const double f1 = wf1(g.pos[0]), f2 = wf2(g.pos[0]);
      const double st = std::sin(g.pos[2]);
      const double c1sq = std::pow(f1, 4) * g.vel[1] * g.vel[1];
      const double c2sq =
          std::pow(f2, 4) * (g.vel[2] * g.vel[2] + st * st * g.vel[3] * g.vel[3]);
      const double K = g.vel[0] * g.vel[0] - c1sq / (f1 * f1) - c2sq / (f2 * f2);
      return Vec(Eigen::Vector3d(c1sq, c2sq, K));
    };

    GeodesicState st0{z0, v0, 0.0};
    Vec ref = conserved(st0);
    REQUIRE(ref.cwiseAbs().maxCoeff() > 1e-3);  // nondegenerate seed

    double drift = 0.0;
    int samples = 0;
    auto term = integrate_observe(m, st0, 3.0, {}, [&](const GeodesicState& g) {
      Vec now = conserved(g);
      for (int i = 0; i < 3; ++i)
        drift = std::max(drift, std::abs(now[i] - ref[i]) / std::max(1e-6, std::abs(ref[i])));
      ++samples;
      return true;
    });
    REQUIRE(term == Termination::SpanComplete);
    REQUIRE(samples > 10);
    CHECK(drift < 1e-7);
  }
}

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec v2d(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

MultiwarpedModel static_product(std::vector<FiberOracle> fibers) {
  MultiwarpedModel m;
  m.name = "static";
  m.fibers = std::move(fibers);
  for (std::size_t i = 0; i < m.fibers.size(); ++i) {
    m.warp.emplace_back([](double) { return 1.0; });
    m.warp_d.emplace_back([](double) { return 0.0; });
  }
  return m;
}

MultiwarpedModel grw_exp() {
  MultiwarpedModel m;
  m.name = "grw-exp";
  m.fibers = {euclidean_fiber(1)};
  m.warp = {[](double t) { return std::exp(t); }};
  m.warp_d = {[](double t) { return std::exp(t); }};
  return m;
}

// same warps as the hand-built oracle metric above
MultiwarpedModel oracle_shape_model() {
  MultiwarpedModel m;
  m.name = "oracle-shape";
  m.fibers = {circle_fiber(1.0), sphere_fiber()};
  m.warp = {wf1, wf2};
  m.warp_d = {wf1d, wf2d};
  return m;
}

}  // namespace

// [DERIVED] the module chart must reproduce the hand-built oracle metric
// (same fiber layout: t, circle angle, sphere polar pair).
TEST_CASE("multiwarp: chart assembly matches the hand-built metric") {
  auto mod = oracle_shape_model();
  auto chart = mod.chart();
  auto oracle = handbuilt_multiwarp();
  REQUIRE(chart.dim == 4);
  REQUIRE(chart.index == 1);

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Vec z(4);
    z << 1.5 * uni(gen), M_PI * uni(gen), M_PI / 2 + 0.8 * uni(gen), M_PI * uni(gen);
    CHECK((chart.metric(z) - oracle.metric(z)).cwiseAbs().maxCoeff() < 1e-12);
    auto da = chart.metric_deriv(z);
    auto db = oracle.metric_deriv(z);
    double dmax = 0;
    for (int l = 0; l < 4; ++l) dmax = std::max(dmax, (da[l] - db[l]).cwiseAbs().maxCoeff());
    CHECK(dmax < 1e-12);
  }
}

// [DERIVED] closed forms for the reduced length functional.
TEST_CASE("multiwarp: fiber lengths match closed forms") {
  // static product: L = c dt / sqrt(K + c^2)
  auto m = static_product({euclidean_fiber(1)});
  auto L = [&](double c, double K, double dt) {
    return fiber_lengths(m, {v1(c), K}, 0.0, dt)[0];
  };
  CHECK(std::abs(L(1.0, 3.0, 2.0) - 1.0) < 1e-10);
  CHECK(std::abs(L(1.0, 0.0, 1.5) - 1.5 / 1.0) < 1e-10);
  CHECK(std::abs(L(1.0, -0.5, 2.0) - 2.0 / std::sqrt(0.5)) < 1e-10);
  CHECK(std::abs(L(0.7, 1.0, 2.0) - 0.7 * 2.0 / std::sqrt(1.49)) < 1e-10);

  // zero constant: identically zero length
  auto m2 = static_product({euclidean_fiber(1), circle_fiber(1.0)});
  auto Lz = fiber_lengths(m2, {v2d(0.0, 1.0), 0.5}, 0.0, 2.0);
  CHECK(Lz[0] == 0.0);
  CHECK(Lz[1] > 0.0);

  // equal warps: lengths proportional to the constants
  MultiwarpedModel me;
  me.fibers = {euclidean_fiber(1), euclidean_fiber(1)};
  auto f = [](double t) { return 1.1 + 0.3 * std::sin(t); };
  auto fd = [](double t) { return 0.3 * std::cos(t); };
  me.warp = {f, f};
  me.warp_d = {fd, fd};
  auto Le = fiber_lengths(me, {v2d(0.7, 0.3), 0.4}, 0.0, 2.0);
  CHECK(std::abs(Le[0] / Le[1] - 0.7 / 0.3) < 1e-9);
}

// [DERIVED] the reduced lengths are invariant under (c, K) -> (l c, l^2 K).
TEST_CASE("multiwarp: fiber length scale invariance") {
  MultiwarpedModel m;
  m.fibers = {euclidean_fiber(1), circle_fiber(1.0)};
  m.warp = {[](double t) { return std::exp(0.4 * t); }, [](double t) { return 1.0 + 0.1 * t; }};
  m.warp_d = {[](double t) { return 0.4 * std::exp(0.4 * t); }, [](double) { return 0.1; }};
  m.t_lo = -5.0;

  const double lam = 3.7;
  auto La = fiber_lengths(m, {v2d(0.55, 0.45), 0.7}, -0.5, 1.5);
  auto Lb = fiber_lengths(m, {v2d(lam * 0.55, lam * 0.45), lam * lam * 0.7}, -0.5, 1.5);
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(La[i] - Lb[i]) < 1e-9 * std::max(1.0, std::abs(La[i])));

  // monotonicity in K: the total length strictly decreases
  double prev = La[0] + La[1];
  for (double K : {1.2, 2.0, 4.0, 9.0}) {
    auto Lk = fiber_lengths(m, {v2d(0.55, 0.45), K}, -0.5, 1.5);
    const double tot = Lk[0] + Lk[1];
    CHECK(tot < prev);
    prev = tot;
  }
}

TEST_CASE("multiwarp: turning point regime is rejected") {
  auto m = grw_exp();
  CHECK_THROWS_AS(fiber_lengths(m, {v1(1.0), -0.5}, 0.0, 3.0), Error);
  CHECK_NOTHROW(fiber_lengths(m, {v1(1.0), 0.5}, 0.0, 3.0));
}

TEST_CASE("multiwarp: ratio residuals") {
  MultiwarpedModel m;
  m.fibers = {circle_fiber(1.0), euclidean_fiber(1)};
  m.warp = {wf1, wf2};
  m.warp_d = {wf1d, wf2d};

  // self-consistency: targets produced by the model give zero residual
  ReductionConstants rc{v2d(0.6, 0.4), 0.8};
  auto L = fiber_lengths(m, rc, 0.0, 2.0);
  auto r = mubar(m, rc, {{L[0], L[1]}, 0.0, 2.0});
  CHECK(std::abs(r.ratio[0]) < 1e-12);
  CHECK(std::abs(r.total) < 1e-12);

  // sign: overweighting the first fiber makes the first ratio positive
  auto ms = static_product({euclidean_fiber(1), euclidean_fiber(1)});
  auto rp = mubar(ms, {v2d(0.8, 0.2), 0.5}, {{1.0, 1.0}, 0.0, 2.0});
  auto rn = mubar(ms, {v2d(0.2, 0.8), 0.5}, {{1.0, 1.0}, 0.0, 2.0});
  CHECK(rp.ratio[0] > 0.0);
  CHECK(rn.ratio[0] < 0.0);

  // inactive fiber with zero target drops out of the ratio residual
  auto r0 = mubar(ms, {v2d(1.0, 0.0), 0.5}, {{1.3, 0.0}, 0.0, 2.0});
  CHECK(std::abs(r0.ratio[0]) < 1e-15);
}

// [DERIVED] static product == Minkowski product: geodesics are straight
// lines, K has the closed form (dt/D)^2 - 1 at unit total fiber speed.
TEST_CASE("multiwarp: static product connects with straight lines") {
  auto m = static_product({euclidean_fiber(2)});
  MultiwarpedPoint z{0.0, {v2d(0.0, 0.0)}};
  MultiwarpedPoint w{1.5, {v2d(2.0, 1.0)}};

  auto rep = solve_connection(m, z, w);
  REQUIRE(rep.status == ConnectStatus::Connected);
  REQUIRE(rep.solutions.size() == 1);
  const auto& s = rep.solutions[0];
  CHECK(s.endpoint_error <= 1e-6);
  Vec disp = s.arrival_s * s.v0;
  CHECK(std::abs(disp[0] - 1.5) < 1e-6);
  CHECK(std::abs(disp[1] - 2.0) < 1e-6);
  CHECK(std::abs(disp[2] - 1.0) < 1e-6);
  const double D = std::sqrt(5.0);
  CHECK(std::abs(s.energy_K - (1.5 * 1.5 / (D * D) - 1.0)) < 1e-6);
  CHECK(std::abs(s.fiber_lengths[0] - D) < 1e-6);

  // spacelike pair: no causal connection
  auto cz = causal_connect(m, z, w);
  CHECK(cz.status == ConnectStatus::NotFound);
  CHECK(cz.diagnostics.find("causal") != std::string::npos);

  // vertical line: same fiber point, pure t travel
  MultiwarpedPoint a{0.0, {v2d(1.0, 2.0)}};
  MultiwarpedPoint b{2.0, {v2d(1.0, 2.0)}};
  auto rv = causal_connect(m, a, b);
  REQUIRE(rv.status == ConnectStatus::Connected);
  REQUIRE(rv.solutions.size() == 1);
  CHECK(std::abs(rv.solutions[0].v0[0] - 1.0) < 1e-12);
  CHECK(rv.solutions[0].v0.tail(2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(rv.solutions[0].arrival_s - 2.0) < 1e-10);
  CHECK(std::abs(rv.solutions[0].energy_K - 1.0) < 1e-12);
}

// [DERIVED] flat 1+1 product: K = (dt^2 - dx^2) / dx^2, causal iff |dx| <= dt.
TEST_CASE("multiwarp: causal connection in the flat product") {
  auto m = static_product({euclidean_fiber(1)});

  MultiwarpedPoint z{0.0, {v1(0.0)}};
  auto rc = causal_connect(m, z, {2.0, {v1(1.0)}});
  REQUIRE(rc.status == ConnectStatus::Connected);
  CHECK(std::abs(rc.solutions[0].energy_K - 3.0) < 1e-6);
  CHECK(std::abs(rc.solutions[0].arrival_s - 1.0) < 1e-8);

  auto rf = causal_connect(m, z, {1.0, {v1(2.0)}});
  CHECK(rf.status == ConnectStatus::NotFound);
  auto rs = solve_connection(m, z, {1.0, {v1(2.0)}});
  REQUIRE(rs.status == ConnectStatus::Connected);
  CHECK(std::abs(rs.solutions[0].energy_K - (-0.75)) < 1e-6);
}

// [DERIVED] circle fiber: winding families D = |dphi + 2 pi j| give
// 2 w + 1 validated geodesics at winding budget w.
TEST_CASE("multiwarp: circle fiber winding multiplicity") {
  auto m = static_product({circle_fiber(1.0)});
  MultiwarpedPoint z{0.0, {v1(0.0)}};
  MultiwarpedPoint w{3.0, {v1(1.0)}};

  std::size_t prev = 0;
  for (int wind = 0; wind <= 3; ++wind) {
    MultiwarpSolveOptions opts;
    opts.max_winding = wind;
    auto rep = solve_connection(m, z, w, opts);
    REQUIRE(rep.status == ConnectStatus::Connected);
    CHECK(rep.solutions.size() == static_cast<std::size_t>(2 * wind + 1));
    CHECK(rep.solutions.size() > prev);
    prev = rep.solutions.size();
    for (const auto& s : rep.solutions) {
      // every solution sits on one of the winding families
      double best = 1e9;
      for (int j = -wind; j <= wind; ++j)
        best = std::min(best, std::abs(s.fiber_lengths[0] - std::abs(1.0 + 2.0 * M_PI * j)));
      CHECK(best < 1e-9);
      const double D = s.fiber_lengths[0];
      CHECK(std::abs(s.energy_K - (9.0 / (D * D) - 1.0)) < 1e-6);
      CHECK(s.endpoint_error <= 1e-6);
    }
  }
}

TEST_CASE("multiwarp: sphere fiber arc enumeration and product connection") {
  auto sph = sphere_fiber();
  Vec a = v2d(M_PI / 2, 0.0), b = v2d(M_PI / 2, 1.0);
  CHECK(std::abs(sph.distance(a, b) - 1.0) < 1e-12);

  auto arcs = sph.enumerate(a, b, 12.0);
  REQUIRE(arcs.size() >= 3);
  CHECK(std::abs(arcs[0].length - 1.0) < 1e-12);
  CHECK(std::abs(arcs[1].length - (2.0 * M_PI - 1.0)) < 1e-12);
  CHECK(std::abs(arcs[2].length - (1.0 + 2.0 * M_PI)) < 1e-12);
  CHECK((arcs[0].dir - v2d(0.0, 1.0)).norm() < 1e-6);   // equatorial, forward
  CHECK((arcs[1].dir - v2d(0.0, -1.0)).norm() < 1e-6);  // complementary arc

  auto m = static_product({sphere_fiber()});
  MultiwarpSolveOptions opts;
  opts.max_winding = 1;
  auto rep = solve_connection(m, {0.0, {a}}, {2.0, {b}}, opts);
  REQUIRE(rep.status == ConnectStatus::Connected);
  CHECK(rep.solutions.size() == 3);
  for (const auto& s : rep.solutions) {
    CHECK(s.endpoint_error <= 1e-6);
    const double D = s.fiber_lengths[0];
    CHECK(std::abs(s.energy_K - (4.0 / (D * D) - 1.0)) < 1e-5);
  }
}

// [DERIVED] exponential-warp model: the reduced solver and the generic
// shooting engine must agree on the same chart.
TEST_CASE("multiwarp: exponential warp solve agrees with shooting") {
  auto m = grw_exp();
  MultiwarpedPoint z{0.0, {v1(0.0)}};
  MultiwarpedPoint w{2.0, {v1(0.5)}};

  auto rep = solve_connection(m, z, w);
  REQUIRE(rep.status == ConnectStatus::Connected);
  const auto& sol = rep.solutions[0];
  CHECK(sol.endpoint_error <= 1e-6);

  // |dx| = 0.5 < int_0^2 e^-t dt: the pair is timelike-related, so K > 0
  auto rc = causal_connect(m, z, w);
  REQUIRE(rc.status == ConnectStatus::Connected);
  CHECK(rc.solutions[0].energy_K > 0.0);

  // first integrals hold along the assembled geodesic
  auto chart = m.chart();
  Vec zc = v2d(0.0, 0.0);
  double drift = 0.0;
  const double c0 = sol.fiber_constants[0], K0 = sol.energy_K;
  integrate_observe(chart, {zc, sol.v0, 0.0}, sol.arrival_s, {},
                    [&](const GeodesicState& g) {
                      const double f = std::exp(g.pos[0]);
                      const double c = f * f * std::abs(g.vel[1]);
                      const double K = g.vel[0] * g.vel[0] - c * c / (f * f);
                      drift = std::max(drift, std::abs(c - c0));
                      drift = std::max(drift, std::abs(K - K0));
                      return true;
                    });
  CHECK(drift < 1e-7);

  // cross-oracle: generic shooting on the assembled chart
  ShootingProblem prob;
  prob.model = chart;
  prob.p = v2d(0.0, 0.0);
  prob.q = v2d(2.0, 0.5);
  prob.v_lo = v2d(-0.2, -3.0);
  prob.v_hi = v2d(3.0, 3.0);
  prob.multistart = 6;
  prob.max_solutions = 1;
  auto shot = shoot_connect(prob);
  REQUIRE(shot.status == ConnectStatus::Connected);
  Vec u1 = sol.v0 / sol.v0.norm();
  Vec u2 = shot.solutions[0].v0 / shot.solutions[0].v0.norm();
  CHECK((u1 - u2).norm() < 1e-3);

  // far spacelike pair: reduced search exhausts without a root
  auto far = solve_connection(m, z, {0.5, {v1(40.0)}});
  CHECK(far.status == ConnectStatus::NotFound);
  CHECK(far.diagnostics.find("does not prove") != std::string::npos);

  // pure fiber displacement needs a turning point: declared out of scope
  auto flat_t = solve_connection(m, z, {0.0, {v1(5.0)}});
  CHECK(flat_t.status == ConnectStatus::NotFound);
  CHECK(flat_t.diagnostics.find("turning-point") != std::string::npos);
}

// two active fibers: 1-d ratio scan inside the simplex
TEST_CASE("multiwarp: two-fiber ratio solve") {
  MultiwarpedModel m;
  m.fibers = {circle_fiber(1.0), euclidean_fiber(1)};
  m.warp = {[](double t) { return std::exp(0.3 * t); }, [](double) { return 1.0; }};
  m.warp_d = {[](double t) { return 0.3 * std::exp(0.3 * t); }, [](double) { return 0.0; }};

  MultiwarpedPoint z{0.0, {v1(0.0), v1(0.0)}};
  MultiwarpedPoint w{1.2, {v1(0.8), v1(0.7)}};
  MultiwarpSolveOptions opts;
  opts.max_winding = 0;
  auto rep = solve_connection(m, z, w, opts);
  REQUIRE(rep.status == ConnectStatus::Connected);
  const auto& s = rep.solutions[0];
  CHECK(s.endpoint_error <= 1e-6);

  // residual really vanishes at the reported constants
  auto r = mubar(m, {s.fiber_constants, s.energy_K}, {{0.8, 0.7}, 0.0, 1.2});
  CHECK(std::abs(r.ratio[0]) < 1e-8);
  CHECK(std::abs(r.total) < 1e-8);

  // conservation along the assembled geodesic
  auto chart = m.chart();
  Vec zc(3);
  zc << 0.0, 0.0, 0.0;
  double drift = 0.0;
  integrate_observe(chart, {zc, s.v0, 0.0}, s.arrival_s, {}, [&](const GeodesicState& g) {
    const double f1 = std::exp(0.3 * g.pos[0]);
    const double c1 = f1 * f1 * std::abs(g.vel[1]);
    const double c2 = std::abs(g.vel[2]);
    const double K = g.vel[0] * g.vel[0] - c1 * c1 / (f1 * f1) - c2 * c2;
    drift = std::max(drift, std::abs(c1 - s.fiber_constants[0]));
    drift = std::max(drift, std::abs(c2 - s.fiber_constants[1]));
    drift = std::max(drift, std::abs(K - s.energy_K));
    return true;
  });
  CHECK(drift < 1e-7);
}

// [DERIVED] three static circle fibers: the ratio system has the closed-form
// root c ~ D with K = (dt / sum D)^2 - |c|^2.
TEST_CASE("multiwarp: three-fiber simplex solve matches closed form") {
  auto m = static_product({circle_fiber(1.0), circle_fiber(1.0), circle_fiber(1.0)});
  MultiwarpedPoint z{0.0, {v1(0.0), v1(0.0), v1(0.0)}};
  MultiwarpedPoint w{2.0, {v1(0.5), v1(0.7), v1(0.9)}};

  MultiwarpSolveOptions opts;
  opts.max_winding = 0;
  auto rep = solve_connection(m, z, w, opts);
  REQUIRE(rep.status == ConnectStatus::Connected);
  REQUIRE(rep.solutions.size() == 1);
  const auto& s = rep.solutions[0];

  const double sumD = 0.5 + 0.7 + 0.9;
  Vec cstar(3);
  cstar << 0.5 / sumD, 0.7 / sumD, 0.9 / sumD;
  const double Kstar = (2.0 / sumD) * (2.0 / sumD) - cstar.squaredNorm();
  CHECK((s.fiber_constants - cstar).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(s.energy_K - Kstar) < 1e-6);
  CHECK(std::abs(s.arrival_s - sumD) < 1e-6);
  CHECK(s.endpoint_error <= 1e-6);
}

// [PAPER] qualitative completeness-criterion verdicts for the canonical
// warp shapes; the check is a numerical heuristic and says so.
TEST_CASE("multiwarp: integral criterion verdicts") {
  auto flat = static_product({euclidean_fiber(1)});
  auto rf = check_integral_criterion(flat, 0.0);
  CHECK(rf.toward_lo[0] == IntegralVerdict::Divergent);
  CHECK(rf.toward_hi[0] == IntegralVerdict::Divergent);
  CHECK(rf.note.find("heuristic") != std::string::npos);

  auto re = check_integral_criterion(grw_exp(), 0.0);
  CHECK(re.toward_lo[0] == IntegralVerdict::Divergent);
  CHECK(re.toward_hi[0] == IntegralVerdict::Convergent);

  MultiwarpedModel lin;  // f(t) = t on (0, 1): integrand 1/t diverges at 0
  lin.t_lo = 0.0;
  lin.t_hi = 1.0;
  lin.fibers = {euclidean_fiber(1)};
  lin.warp = {[](double t) { return t; }};
  lin.warp_d = {[](double) { return 1.0; }};
  auto rl = check_integral_criterion(lin, 0.5);
  CHECK(rl.toward_lo[0] == IntegralVerdict::Divergent);
  CHECK(rl.toward_hi[0] == IntegralVerdict::Convergent);

  MultiwarpedModel inv;  // f(t) = 1/t on (0, 1): integrand t converges at 0
  inv.t_lo = 0.0;
  inv.t_hi = 1.0;
  inv.fibers = {euclidean_fiber(1)};
  inv.warp = {[](double t) { return 1.0 / t; }};
  inv.warp_d = {[](double t) { return -1.0 / (t * t); }};
  auto ri = check_integral_criterion(inv, 0.5);
  CHECK(ri.toward_lo[0] == IntegralVerdict::Convergent);
}
