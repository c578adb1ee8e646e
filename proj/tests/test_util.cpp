#include "doctest.h"
#include "geolab/expr.hpp"
#include "geolab/quadrature.hpp"
#include "geolab/spline.hpp"

#include <cmath>
#include <random>

using namespace geolab;

TEST_CASE("expr: precedence, functions, constants") {
  CHECK(Expr::parse("2+3*4^2", {})({}) == doctest::Approx(50.0).epsilon(1e-15));
  CHECK(Expr::parse("-3^2", {})({}) == doctest::Approx(-9.0));  // unary minus binds last
  CHECK(Expr::parse("2^3^2", {})({}) == doctest::Approx(512.0));  // right assoc
  CHECK(Expr::parse("sin(pi/2)", {})({}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Expr::parse("pow(2,10)", {})({}) == doctest::Approx(1024.0));
  CHECK(Expr::parse("min(3,-2)+max(1,4)", {})({}) == doctest::Approx(2.0));
  CHECK(Expr::parse("exp(1)", {})({}) == doctest::Approx(M_E).epsilon(1e-15));
  CHECK(Expr::parse("(1+2)*(3-4)/2", {})({}) == doctest::Approx(-1.5));
}

TEST_CASE("expr: variables bind to slots") {
  Expr f = Expr::parse("x*y - y^2", {"x", "y"});
  CHECK(f.arity() == 2);
  CHECK(f.eval({3.0, 2.0}) == doctest::Approx(2.0));
  Expr g = Expr::parse("cosh(t)^2 - sinh(t)^2", {"t"});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) CHECK(g(U(rng)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("expr: rejects malformed input") {
  CHECK_THROWS_AS(Expr::parse("1 +", {}), ExprError);
  CHECK_THROWS_AS(Expr::parse("bogus(1)", {}), ExprError);
  CHECK_THROWS_AS(Expr::parse("x + 1", {}), ExprError);  // unknown variable
  CHECK_THROWS_AS(Expr::parse("pow(1)", {}), ExprError);
  CHECK_THROWS_AS(Expr::parse("1 2", {}), ExprError);
  CHECK_THROWS_AS(Expr::parse("(1+2", {}), ExprError);
}

TEST_CASE("quadrature: smooth finite integrals to tight tolerance") {
  auto r1 = integrate_adaptive([](double t) { return std::sin(t); }, 0.0, M_PI);
  CHECK(r1.converged);
  CHECK(r1.value == doctest::Approx(2.0).epsilon(1e-12));

  auto r2 = integrate_adaptive([](double t) { return 4.0 / (1.0 + t * t); }, 0.0, 1.0);
  CHECK(r2.value == doctest::Approx(M_PI).epsilon(1e-12));

  auto r3 = integrate_adaptive([](double) { return 1.0; }, 2.0, -3.0);
  CHECK(r3.value == doctest::Approx(-5.0));  // orientation
}

TEST_CASE("quadrature: improper ranges via tangent substitution") {
  auto r1 = integrate_improper([](double t) { return std::exp(-t); }, 0.0,
                               std::numeric_limits<double>::infinity());
  CHECK(r1.converged);
  CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-9));

  auto r2 = integrate_improper([](double t) { return std::exp(-t * t); },
                               -std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity());
  CHECK(r2.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));

  // integrable endpoint singularity: open rule never samples t = 0
  auto r3 = integrate_adaptive([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0, 1e-8, 1e-12);
  CHECK(r3.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("spline: interpolation and exact linear reproduction") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 20; ++i) {
    const double t = 2.0 * M_PI * i / 20.0;
    xs.push_back(t);
    ys.push_back(std::sin(t));
  }
  CubicSpline sp(xs, ys);
  for (size_t i = 0; i < xs.size(); ++i) CHECK(sp.value(xs[i]) == doctest::Approx(ys[i]).epsilon(1e-14));
  for (double t = 0.3; t < 6.0; t += 0.37) {
    CHECK(sp.value(t) == doctest::Approx(std::sin(t)).epsilon(2e-4));
    CHECK(sp.deriv(t) == doctest::Approx(std::cos(t)).epsilon(5e-3));
  }

  CubicSpline lin({0.0, 1.0, 2.5, 4.0}, {1.0, 3.0, 6.0, 9.0});  // y = 1 + 2x
  for (double t = -0.5; t < 4.6; t += 0.23) {
    CHECK(lin.value(t) == doctest::Approx(1.0 + 2.0 * t).epsilon(1e-12));
    CHECK(lin.deriv(t) == doctest::Approx(2.0).epsilon(1e-12));
  }

  CHECK_THROWS(CubicSpline({0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}));
}
