#pragma once

#include "geolab/geometry.hpp"

namespace geolab::models {

// R^n with the constant diagonal metric of index nu: diag(-1 x nu, +1 x (n-nu)).
GeometryModel flat(int dim, int index);

// Unit pseudosphere { <P,P>_nu = 1 } in flat R^{n+1} of index nu.
//
// `chart` is an intrinsic global-style chart:
//   nu = 0 : spherical angles on S^n;
//   nu >= 1: (rho, a_1..a_{nu-1}, b_1..b_{n-nu}) with
//            P = (sinh(rho) u(a), cosh(rho) w(b)),
//            g  = -d rho^2 - sinh^2(rho) dS_{nu-1} + cosh^2(rho) dS_{n-nu}.
// The chart degenerates at angle poles (and at rho = 0 for nu >= 2);
// project() reports those instead of guessing.
//
// `embedded` works directly on ambient coordinates with the quadric
// connection G^k_ij = eta_ij x^k, so geodesics obey x'' = -<x',x'> x. It is
// singularity-free and cheap; shooting uses it with tangent_basis() as the
// velocity parameterisation.
struct Pseudosphere {
  int n = 0;
  int nu = 0;
  GeometryModel chart;
  GeometryModel embedded;

  Vec embed(const Vec& chart_pt) const;
  Vec embed_velocity(const Vec& chart_pt, const Vec& chart_vel) const;
  Vec project(const Vec& ambient_pt) const;  // throws Error at chart singularities
  // eta-orthonormal basis of T_P (n+1 x n); column j has square norm sign_j.
  Mat tangent_basis(const Vec& ambient_pt) const;
};

Pseudosphere pseudosphere(int n, int nu);

// Affine counterexample: torus R^2 / (4 pi Z)^2 with the symmetric connection
// that makes the rotating frame
//   X1 = cos(x) dx + sin(x) dy,  X2 = -sin(x) dx + cos(x) dy
// parallel along every curve up to antisymmetric torsion terms; geodesics
// keep constant frame components, so their x-extent never exceeds 2 pi.
// No metric. Coefficients: G^x_xy = G^x_yx = 1/2, G^y_xx = -1.
GeometryModel bates_torus();

// Lorentzian counterexample: torus R^2 / (4 pi Z)^2 with
//   g = sin(2x) dx^2 - 2 cos(2x) dx dy - sin(2x) dy^2
// (the null frame X1, X2 above with <X1,X2> = -1). det g = -1 everywhere and
// d_y is Killing. Geodesics are trapped in x just like the affine case.
GeometryModel smith_torus();

// Lattice quotient bookkeeping for models given on a periodic covering chart.
struct LatticeQuotient {
  std::vector<double> periods;  // per-axis period, 0 = aperiodic
};

// All lifts b + k . periods with |k_j| <= max_winding on periodic axes,
// sorted by euclidean chart distance from a (ties broken lexicographically
// by winding vector for determinism).
std::vector<Vec> lattice_lifts(const LatticeQuotient& q, const Vec& a, const Vec& b,
                               int max_winding);

// Shortest-lift displacement b - a modulo the lattice.
Vec quotient_displacement(const LatticeQuotient& q, const Vec& a, const Vec& b);

}  // namespace geolab::models
