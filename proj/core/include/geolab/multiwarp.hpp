#pragma once

#include "geolab/connect.hpp"
#include "geolab/geometry.hpp"

#include <functional>

namespace geolab {

// One fiber geodesic between two fiber points: its length and the unit
// initial tangent (fiber chart coordinates, g_i-normalized).
struct FiberGeodesicChoice {
  double length = 0.0;
  Vec dir;
};

// A fiber of a multiwarped product: chart metric plus intrinsic distance
// and an enumerator of connecting geodesics (for multiplicity).
struct FiberOracle {
  int dim = 0;
  std::string name;
  GeometryModel model;
  std::function<double(const Vec&, const Vec&)> distance;
  // all fiber geodesics from a to b with length <= cap, deterministic order
  std::function<std::vector<FiberGeodesicChoice>(const Vec&, const Vec&, double cap)> enumerate;
  // translation length of the shortest closed geodesic family (0 = simply
  // connected); used to derive length caps from winding counts
  double period_hint = 0.0;
};

FiberOracle euclidean_fiber(int k);
FiberOracle circle_fiber(double radius = 1.0);
FiberOracle torus_fiber(const std::vector<double>& periods);
FiberOracle sphere_fiber();  // unit round 2-sphere, polar chart

// Product of an interval (possibly unbounded) with warped fibers:
// g = -dt^2 + sum_i f_i(t)^2 g_i.
struct MultiwarpedModel {
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  std::vector<FiberOracle> fibers;
  std::vector<std::function<double(double)>> warp;    // f_i > 0
  std::vector<std::function<double(double)>> warp_d;  // f_i'
  std::string name = "multiwarped";

  int fiber_count() const { return static_cast<int>(fibers.size()); }
  int total_dim() const;
  bool in_interval(double t) const { return t > t_lo && t < t_hi; }

  // full chart metric on (t, fiber_1 coords, ..., fiber_m coords)
  GeometryModel chart() const;
};

// Normalized reduction constants: c on the closed simplex (sum = 1),
// K the energy parameter of tdot^2 = K + sum c_i^2/f_i^2.
struct ReductionConstants {
  Vec c;
  double K = 0.0;
};

struct FiberTarget {
  std::vector<double> D;  // chosen fiber-geodesic lengths, >= 0
  double t_start = 0.0, t_end = 0.0;
};

// L_i(c, K) = int (c_i/f_i^2) / sqrt(K + sum_j c_j^2/f_j^2) dt over the
// monotone t-range. Throws when the radicand is nonpositive inside the
// range (turning-point regime, rejected here).
std::vector<double> fiber_lengths(const MultiwarpedModel& m, const ReductionConstants& rc,
                                  double t_start, double t_end);

// Shooting-map residuals: ratio_i = L_i D_{i+1} - L_{i+1} D_i for
// consecutive fibers, total = sum L - sum D (used by the inner K-solve).
struct MubarResidual {
  Vec ratio;     // length m-1
  double total = 0.0;
  std::vector<double> L;
};

MubarResidual mubar(const MultiwarpedModel& m, const ReductionConstants& rc,
                    const FiberTarget& target);

struct MultiwarpedPoint {
  double t = 0.0;
  std::vector<Vec> fiber;  // chart coordinates per fiber
};

struct MultiwarpSolveOptions {
  int max_winding = 1;        // fiber-geodesic enumeration depth
  double length_cap = 0.0;    // 0 = derived from windings and distances
  int simplex_grid = 9;       // points per simplex edge in the outer scan
  int max_combos = 512;       // fiber-combination budget
  bool causal_only = false;   // restrict to K >= 0
  double tol_endpoint = 1e-6;
  IntegratorConfig integ;     // validation integration
};

// Solve the connection problem z -> w: enumerate fiber-geodesic
// combinations, zero the shooting residuals over (c, K), assemble chart
// geodesics, validate by re-integration. Solutions carry (c, K, D).
ConnectivityReport solve_connection(const MultiwarpedModel& m, const MultiwarpedPoint& z,
                                    const MultiwarpedPoint& w,
                                    const MultiwarpSolveOptions& opts = {});

// Causal variant: K >= 0 only; solutions sorted by K descending (the
// report's first solution is the most timelike one found).
ConnectivityReport causal_connect(const MultiwarpedModel& m, const MultiwarpedPoint& z,
                                  const MultiwarpedPoint& w,
                                  const MultiwarpSolveOptions& opts = {});

// Endpoint behavior of int f_i^-2 (sum_j f_j^-2)^(-1/2) dt on a geometric
// ladder toward each interval end. A numerical heuristic: divergence and
// convergence are judged from partial-integral growth, not proved.
enum class IntegralVerdict { Divergent, Convergent, Inconclusive };

std::string to_string(IntegralVerdict v);

struct CriterionReport {
  std::vector<IntegralVerdict> toward_lo, toward_hi;  // per fiber
  std::vector<double> tail_lo, tail_hi;               // last partial integrals
  std::string note;
};

CriterionReport check_integral_criterion(const MultiwarpedModel& m, double c_probe);

}  // namespace geolab
