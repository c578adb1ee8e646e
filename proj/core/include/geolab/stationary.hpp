#pragma once
// Diagnostics for standard stationary charts -beta dt^2 + 2 omega (x) dt + g0:
// assembled Lorentzian metric, the action of discrete curves and its split
// into spatial and Killing parts, Killing-charge verification along
// integrated geodesics, and sampled audits of the sufficient conditions for
// geodesic connectedness (beta bounds, sublinear growth of |omega|).

#include <functional>
#include <string>
#include <vector>

#include "geolab/geometry.hpp"

namespace geolab {

// --------------------------------------------------------------- model ----

// Product chart R x M0 with K = d/dt the timelike Killing field
// (<K,K> = -beta < 0). base carries the Riemannian g0.
struct StationaryModel {
  GeometryModel base;                      // Riemannian (M0, g0)
  std::function<double(const Vec&)> beta;  // > 0 on M0
  std::function<Vec(const Vec&)> omega;    // 1-form components on M0
  // optional analytic derivatives; central differences otherwise
  std::function<Vec(const Vec&)> beta_grad;
  std::function<Mat(const Vec&)> omega_jac;  // (i,a) = d omega_i / d x_a
  // completeness of g0 is a user assertion, never inferred numerically
  bool base_complete_asserted = false;
  std::string name = "stationary";
  double fd_step = 1e-6;

  int spatial_dim() const { return base.dim; }
  // full chart on (t, x^1..x^n): index 1, metric independent of t
  GeometryModel chart() const;
};

// -------------------------------------------------------------- curves ----

// curve on the chart with a uniform parameter grid on [0,1], fixed endpoints
struct DiscreteCurve {
  Vec p, q;                // endpoints in chart coordinates (t, x)
  std::vector<Vec> nodes;  // interior nodes

  int segment_count() const { return static_cast<int>(nodes.size()) + 1; }
  double spacing() const { return 1.0 / segment_count(); }
  const Vec& point(int k) const {
    if (k <= 0) return p;
    if (k >= segment_count()) return q;
    return nodes[static_cast<std::size_t>(k - 1)];
  }
};

// trapezoidal action 1/2 int <zdot, zdot> ds; indefinite (may be negative)
double curve_action(const StationaryModel& m, const DiscreteCurve& curve);

struct ActionSplit {
  double spatial = 0.0;  // 1/2 int (<zdot,zdot> - <zdot,K>^2/<K,K>) >= 0
  double killing = 0.0;  // 1/2 int <zdot,K>^2/<K,K> <= 0 (K timelike)
  double total() const { return spatial + killing; }
};

// Segment-exact split of curve_action: spatial + killing reproduces the
// action to roundoff because the identity holds per quadrature term.
// Throws when the assembled <K,K> fails to be negative along the curve.
ActionSplit split_action(const StationaryModel& m, const DiscreteCurve& curve);

// ------------------------------------------------- conserved quantity ----

struct KillingConstantReport {
  double mean = 0.0;            // average of g(K, zdot) over samples
  double max_deviation = 0.0;   // max |sample - mean|
  double relative_drift = 0.0;  // backward-error drift as in core geometry
};

// g(K, zdot) along an integrated trajectory of the assembled chart; a
// diagnostic, not a filter — non-geodesic inputs simply report large drift.
KillingConstantReport verify_killing_constant(const StationaryModel& m, const Trajectory& tr);

// --------------------------------------------------------------- audit ----

struct GrowthFit {
  double alpha = 0.0;      // fitted exponent of |omega|_0 <= A d0^alpha + B
  double A = 0.0, B = 0.0;
  double residual = 0.0;   // median absolute deviation of the envelope fit
  bool sublinear = false;  // alpha below 1 with margin
  int bins = 0;
};

struct StationaryConditionsReport {
  std::string completeness;           // echoed user assertion or "undecided"
  bool completeness_asserted = false;
  double beta_inf = 0.0, beta_sup = 0.0;  // sampled bounds over the region
  GrowthFit omega_growth;
  int samples = 0;
  std::string notes;
};

// Sample a spatial box [lo, hi] on a per-axis grid: report inf/sup of beta
// and a robust envelope fit of the g0-norm of omega against the g0-distance
// to p0 (graph shortest path on the sample grid, log-binned radii,
// least-absolute-deviation regression).
StationaryConditionsReport audit_stationary_conditions(const StationaryModel& m, const Vec& lo,
                                                       const Vec& hi, const Vec& p0,
                                                       int per_axis = 12);

// Max |d phi / dt| over chart samples: boundary functions delegated to the
// domain machinery must be invariant under the Killing flow.
double t_invariance_defect(const std::function<double(const Vec&)>& phi,
                           const std::vector<Vec>& samples, double dt = 1e-4);

}  // namespace geolab
