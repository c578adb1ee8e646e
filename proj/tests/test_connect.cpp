#include "doctest.h"

#include "geolab/connect.hpp"
#include "geolab/models.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace geolab;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Random point of the unit quadric <x,x>_1 = 1 in R^{1,n}: normalized
// spacelike gaussian draw.
Vec random_quadric_point(std::mt19937_64& gen, int amb) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vec y(amb);
    for (int i = 0; i < amb; ++i) y[i] = gauss(gen);
    double q = -y[0] * y[0];
    for (int i = 1; i < amb; ++i) q += y[i] * y[i];
    if (q > 0.3) return y / std::sqrt(q);
  }
}

double lorentz_inner(const Vec& a, const Vec& b) {
  double s = -a[0] * b[0];
  for (int i = 1; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

// [DERIVED] the unique straight line from (0,0) to (3,4) in the plane.
TEST_CASE("connect: flat plane straight line") {
  ShootingProblem prob;
  prob.model = models::flat(2, 0);
  prob.p = vec2(0, 0);
  prob.q = vec2(3, 4);
  prob.v_lo = vec2(-2, -2);
  prob.v_hi = vec2(2, 2);
  prob.s_max = 10.0;

  auto rep = shoot_connect(prob);
  REQUIRE(rep.status == ConnectStatus::Connected);
  REQUIRE(rep.solutions.size() == 1);  // all starts dedup to one line
  const auto& sol = rep.solutions[0];
  CHECK(sol.endpoint_error <= prob.tol_endpoint);
  Vec w = sol.arrival_s * sol.v0;
  CHECK((w - prob.q).norm() < 1e-5);
  CHECK(sol.v0.normalized().isApprox(prob.q.normalized(), 1e-5));
  CHECK(rep.verdict_source == VerdictSource::Shooting);
}

// [DERIVED] on a flat torus the lifts q + k.periods give one straight
// geodesic per winding class inside the budget.
TEST_CASE("connect: flat torus windings via lattice lifts") {
  ShootingProblem prob;
  prob.model = models::flat(2, 0);
  prob.p = vec2(0, 0);
  prob.q = vec2(1.0, 0.5);
  prob.v_lo = vec2(-2, -2);
  prob.v_hi = vec2(2, 2);
  prob.s_max = 12.0;
  prob.lattice = {2.0 * M_PI, 2.0 * M_PI};
  prob.max_winding = 1;
  prob.multistart = 24;
  prob.grid_per_axis = 9;

  auto rep = shoot_connect(prob);
  REQUIRE(rep.status == ConnectStatus::Connected);
  CHECK(rep.solutions.size() >= 3);

  // every solution's s*v must land exactly on some lift
  models::LatticeQuotient lq{prob.lattice};
  auto lifts = models::lattice_lifts(lq, prob.p, prob.q, 1);
  std::set<int> hit_lifts;
  for (const auto& sol : rep.solutions) {
    Vec w = sol.arrival_s * sol.v0;
    double best = 1e9;
    int which = -1;
    for (std::size_t i = 0; i < lifts.size(); ++i) {
      const double d = (w - lifts[i]).norm();
      if (d < best) {
        best = d;
        which = static_cast<int>(i);
      }
    }
    CHECK(best < 1e-4);
    hit_lifts.insert(which);
  }
  CHECK(hit_lifts.size() == rep.solutions.size());  // distinct windings
}

// [TRIVIAL] antipodal points on the round sphere are joined by a great
// circle in every direction; the multistart must retain several.
TEST_CASE("connect: sphere antipodal family") {
  auto ps = models::pseudosphere(2, 0);
  ShootingProblem prob;
  prob.model = ps.embedded;
  Vec P(3), Q(3);
  P << 1, 0, 0;
  Q << -1, 0, 0;
  prob.p = P;
  prob.q = Q;
  prob.velocity_map = ps.tangent_basis(P);
  prob.v_lo = vec2(-2, -2);
  prob.v_hi = vec2(2, 2);
  prob.s_max = 8.0;
  prob.multistart = 8;

  auto rep = shoot_connect(prob);
  REQUIRE(rep.status == ConnectStatus::Connected);
  CHECK(static_cast<int>(rep.solutions.size()) >= prob.multistart / 2);
  for (const auto& sol : rep.solutions) {
    CHECK(sol.endpoint_error <= prob.tol_endpoint);
    // every solution runs an odd number of half great circles
    const double phase = sol.arrival_s * sol.v0.norm();
    CHECK(std::abs(std::abs(std::remainder(phase, 2.0 * M_PI)) - M_PI) < 1e-4);
  }
}

// [PAPER] the x-extent of any geodesic of the looped-frame torus is less
// than pi, so a cover target at x = 3pi is out of reach; the report must
// say not-found without claiming disconnection.
TEST_CASE("connect: bates cover far target not found") {
  ShootingProblem prob;
  prob.model = models::bates_torus();
  prob.p = vec2(0, 0);
  prob.q = vec2(3.0 * M_PI, 0);
  prob.v_lo = vec2(-2, -2);
  prob.v_hi = vec2(2, 2);
  prob.s_max = 25.0;
  prob.multistart = 6;

  auto rep = shoot_connect(prob);
  CHECK(rep.status == ConnectStatus::NotFound);
  CHECK(rep.solutions.empty());
  CHECK(rep.diagnostics.find("does not prove") != std::string::npos);
}

// [DERIVED] closed-form arcs: on-quadric, solve x'' = -<x',x'> x, and
// reach q at the stated parameter.
TEST_CASE("desitter closed form satisfies the quadric geodesic equation") {
  std::mt19937_64 gen(2024);
  std::vector<std::pair<Vec, Vec>> cases;
  for (int rep = 0; rep < 40; ++rep) {
    const int amb = rep % 2 ? 3 : 4;
    Vec P = random_quadric_point(gen, amb);
    Vec Q = random_quadric_point(gen, amb);
    if (std::abs(lorentz_inner(P, Q) + 1.0) < 0.05) continue;
    cases.emplace_back(P, Q);
  }
  // guaranteed hyperbolic pairs: Q = cosh(r) P + sinh(r) T with T a unit
  // timelike tangent gives <P,Q> = cosh(r) > 1
  for (int rep = 0; rep < 10; ++rep) {
    const int amb = rep % 2 ? 3 : 4;
    Vec P = random_quadric_point(gen, amb);
    auto ps = models::pseudosphere(amb - 1, 1);
    Vec T = ps.tangent_basis(P).col(0);
    REQUIRE(lorentz_inner(T, T) == doctest::Approx(-1.0));
    const double r = 0.3 + 0.25 * rep;
    cases.emplace_back(P, Vec(std::cosh(r) * P + std::sinh(r) * T));
  }

  int trig = 0, hyper = 0;
  for (const auto& [P, Q] : cases) {
    auto g = desitter_geodesic(P, Q);
    if (!g) continue;
    (g->kind == DesitterArc::Trig ? trig : hyper) += 1;

    CHECK((g->point(0) - P).norm() < 1e-12);
    CHECK((g->point(g->arrival_s) - Q).norm() < 1e-8);
    // spot-check the ODE x'' = -<x',x'>_1 x by finite differences
    const double s0 = 0.37 * g->arrival_s, h = 1e-5;
    Vec xm = g->point(s0 - h), x0 = g->point(s0), xp = g->point(s0 + h);
    Vec acc = (xp - 2.0 * x0 + xm) / (h * h);
    Vec v = g->velocity(s0);
    Vec expect = -lorentz_inner(v, v) * x0;
    CHECK((acc - expect).norm() < 1e-5);
    // stays on the quadric
    CHECK(std::abs(lorentz_inner(x0, x0) - 1.0) < 1e-10);
  }
  CHECK(trig > 5);
  CHECK(hyper > 5);
}

// [DERIVED] a null plane section: p=(0,0,1), w=(2,2,0) has <w,w>=0,
// <p,w>=0, so q = p + w is reached by the affine line at s=1.
TEST_CASE("desitter closed form: null arc") {
  Vec P(3), Q(3);
  P << 0, 0, 1;
  Q << 2, 2, 1;
  auto g = desitter_geodesic(P, Q);
  REQUIRE(g.has_value());
  CHECK(g->kind == DesitterArc::Null);
  CHECK(g->arrival_s == doctest::Approx(1.0));
  CHECK((g->point(1.0) - Q).norm() < 1e-12);
  CHECK(std::abs(lorentz_inner(g->velocity(0), g->velocity(0))) < 1e-12);
}

// [TRIVIAL] guard rails: off-quadric input and the criterion boundary.
TEST_CASE("desitter input validation") {
  Vec P(3), Q(3);
  P << 0, 0, 1.5;  // not on the quadric
  Q << 0, 0, 1;
  CHECK_THROWS_AS((void)desitter_inner(P, Q), Error);

  P << 0, 0, 1;
  Q << 0, 0, -1;  // exactly antipodal: <p,q> = -1
  CHECK_THROWS_AS((void)desitter_connectable(P, Q), Error);

  Vec R(3);
  R << 0, 1, 0;  // <p,r> = 0 > -1
  CHECK(desitter_connectable(P, R));
  Vec S(3);
  S << 2, 0, -std::sqrt(5.0);  // <p,s> = -sqrt(5) < -1
  CHECK_FALSE(desitter_connectable(P, S));
}

// [PAPER] closed-form verdict vs numerical shooting on random quadric
// pairs: agreement with zero shooting hits on criterion-excluded pairs.
TEST_CASE("desitter: shooting agrees with the closed-form criterion") {
  std::mt19937_64 gen(77);
  int pairs = 0, agree = 0, false_pos = 0;
  int reachable = 0;
  for (int n1 = 3; n1 <= 4; ++n1) {
    const int count = n1 == 3 ? 40 : 20;
    auto ps = models::pseudosphere(n1 - 1, 1);
    for (int i = 0; i < count; ++i) {
      Vec P = random_quadric_point(gen, n1);
      Vec Q = random_quadric_point(gen, n1);
      if (std::abs(lorentz_inner(P, Q) + 1.0) < 0.05) {
        --i;
        continue;
      }
      const bool criterion = desitter_connectable(P, Q);

      ShootingProblem prob;
      prob.model = ps.embedded;
      prob.p = P;
      prob.q = Q;
      prob.velocity_map = ps.tangent_basis(P);
      const int k = n1 - 1;
      prob.v_lo = Vec::Constant(k, -2.0);
      prob.v_hi = Vec::Constant(k, 2.0);
      prob.s_max = 10.0;
      prob.multistart = 6;
      prob.grid_per_axis = k == 2 ? 7 : 5;
      prob.max_solutions = 1;
      prob.integ.abs_tol = prob.integ.rel_tol = 1e-9;

      const bool found = shoot_connect(prob).status == ConnectStatus::Connected;
      ++pairs;
      if (found == criterion) ++agree;
      if (found && !criterion) ++false_pos;
      if (criterion) ++reachable;
    }
  }
  CHECK(pairs == 60);
  CHECK(false_pos == 0);
  CHECK(agree >= pairs - 1);   // >= 99% at acceptance scale
  CHECK(reachable > 10);       // the sample exercises both verdicts
  CHECK(pairs - reachable > 5);
}

// [DERIVED] re-integrating a closed-form arc numerically lands on q.
TEST_CASE("desitter closed form re-integrates to the endpoint") {
  std::mt19937_64 gen(31337);
  auto ps = models::pseudosphere(2, 1);
  int done = 0;
  for (int i = 0; done < 12 && i < 200; ++i) {
    Vec P = random_quadric_point(gen, 3);
    Vec Q = random_quadric_point(gen, 3);
    if (std::abs(lorentz_inner(P, Q) + 1.0) < 0.05) continue;
    auto g = desitter_geodesic(P, Q);
    if (!g || g->arrival_s < 1e-6) continue;
    GeodesicState st{P, g->velocity(0.0), 0.0};
    auto tr = integrate_geodesic(ps.embedded, st, g->arrival_s);
    REQUIRE(tr.termination == Termination::SpanComplete);
    CHECK((tr.back().pos - Q).norm() < 1e-6);
    ++done;
  }
  CHECK(done == 12);
}

// [DERIVED] raster over the plane: rays from the origin cover every cell
// of a centered box of radius < s_max, and budgets grow monotonically.
TEST_CASE("raster: flat surjectivity and monotonicity") {
  auto m = models::flat(2, 0);
  Vec p = vec2(0, 0);
  Vec lo = vec2(-2, -2), hi = vec2(2, 2);
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-8;
  cfg.h_max = 0.2;

  auto small = reachability_raster(m, p, 16, 1.5, 0.5, lo, hi, cfg);
  auto large = reachability_raster(m, p, 80, 3.0, 0.5, lo, hi, cfg);

  // monotone: the 16 directions are a subset of the 80?  They are not
  // nested for 16 vs 80, so use s_max growth with identical directions.
  auto mid = reachability_raster(m, p, 16, 3.0, 0.5, lo, hi, cfg);
  REQUIRE(small.hit.size() == mid.hit.size());
  for (std::size_t i = 0; i < small.hit.size(); ++i)
    if (small.hit[i]) CHECK(mid.hit[i]);

  // surjective on the box at the larger budget
  CHECK(large.hit_count() == static_cast<long>(large.hit.size()));

  // csv sanity
  const std::string csv = large.csv();
  CHECK(csv.rfind("i0,i1,c0,c1,hit\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 8 * 8);
}

// [PAPER] de Sitter raster in the (rho, beta) chart from p = (0,1,0):
// cells whose embedded representative has <P,Q> <= -1 stay unhit.
TEST_CASE("raster: desitter forbidden region stays unhit") {
  auto ps = models::pseudosphere(2, 1);
  Vec p = vec2(0, 0);  // embeds to (0, 1, 0)
  Vec P = ps.embed(p);
  Vec lo = vec2(-2.0, -M_PI), hi = vec2(2.0, M_PI);
  const double cell = 0.25;
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-8;
  cfg.h_max = 0.1;

  auto grid = reachability_raster(ps.chart, p, 64, 6.0, cell, lo, hi, cfg);
  REQUIRE(grid.dims.size() == 2);

  long hit_cells = 0, forbidden = 0;
  for (int i0 = 0; i0 < grid.dims[0]; ++i0)
    for (int i1 = 0; i1 < grid.dims[1]; ++i1) {
      const long lin = grid.index({i0, i1});
      // max of <P, embed(.)> over the cell corners and center
      double best = -1e30;
      for (int c = 0; c < 5; ++c) {
        Vec z(2);
        z[0] = lo[0] + (i0 + (c == 4 ? 0.5 : (c & 1 ? 1.0 : 0.0))) * cell;
        z[1] = lo[1] + (i1 + (c == 4 ? 0.5 : (c & 2 ? 1.0 : 0.0))) * cell;
        best = std::max(best, lorentz_inner(P, ps.embed(z)));
      }
      if (grid.hit[lin]) {
        ++hit_cells;
        CHECK(best > -1.0 - 1e-9);  // hit cells intersect the reachable set
      }
      if (best <= -1.0 - 0.1) {
        ++forbidden;
        CHECK(grid.hit[lin] == 0);  // strictly forbidden cells stay unhit
      }
    }
  CHECK(hit_cells > 40);    // the raster does fill the reachable side
  CHECK(forbidden > 10);    // and the forbidden side is represented
}

// [PAPER] every geodesic of the looped-frame torus stays in a vertical
// strip of width < pi around its start.
TEST_CASE("raster: bates strip confinement") {
  auto m = models::bates_torus();
  Vec p = vec2(0, 0);
  Vec lo = vec2(-5, -7), hi = vec2(5, 7);
  IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-8;
  cfg.h_max = 0.2;

  auto grid = reachability_raster(m, p, 48, 6.0, 0.5, lo, hi, cfg);
  long hits = 0;
  std::vector<int> idx(2);
  for (int i0 = 0; i0 < grid.dims[0]; ++i0)
    for (int i1 = 0; i1 < grid.dims[1]; ++i1) {
      idx = {i0, i1};
      if (!grid.hit[grid.index(idx)]) continue;
      ++hits;
      const double cx = lo[0] + (i0 + 0.5) * 0.5;
      CHECK(std::abs(cx) < M_PI + 0.3);
    }
  CHECK(hits > 30);
}
