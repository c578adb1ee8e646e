#pragma once

#include "geolab/geometry.hpp"
#include "geolab/models.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace geolab {

enum class ConnectStatus { Connected, NotFound, UnreachableClosedForm };
enum class VerdictSource { Shooting, ClosedForm };

std::string to_string(ConnectStatus s);
std::string to_string(VerdictSource s);

struct ConnectSolution {
  Vec v0;                       // initial velocity in chart coordinates
  double arrival_s = 0.0;       // affine parameter at the endpoint
  double endpoint_error = 0.0;  // chart distance to the (lifted) target
  // multiwarped extras (empty/NaN elsewhere)
  Vec fiber_constants;
  double energy_K = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> fiber_lengths;
};

struct ConnectivityReport {
  ConnectStatus status = ConnectStatus::NotFound;
  std::vector<ConnectSolution> solutions;
  VerdictSource verdict_source = VerdictSource::Shooting;
  std::string diagnostics;
};

struct ShootingProblem {
  GeometryModel model;
  Vec p, q;
  Vec v_lo, v_hi;     // velocity-parameter box (in map coordinates when velocity_map set)
  Mat velocity_map;   // optional: chart velocity = velocity_map * params; empty = identity
  double s_max = 10.0;
  double tol_endpoint = 1e-6;
  int multistart = 8;     // candidates kept for refinement
  int grid_per_axis = 0;  // coarse grid resolution; 0 = pick from dimension
  std::vector<double> lattice;  // target lattice periods (empty = none); 0 entries aperiodic
  int max_winding = 0;          // lattice lifts searched per axis
  int max_solutions = 0;        // stop after this many validated solutions; 0 = no cap
  // search ball: trajectories with |x| beyond this cannot connect and are
  // cut short; 0 = 4 * (max endpoint norm + 1)
  double escape_radius = 0.0;
  IntegratorConfig integ;       // used for refinement + validation
  IntegratorConfig coarse;      // used for the grid stage (looser by default)

  ShootingProblem() {
    coarse.abs_tol = coarse.rel_tol = 1e-6;
    coarse.h_max = 0.25;
  }
};

// Multistart shooting: coarse grid over the velocity box scoring
// miss(v) = min_{s <= s_max, lifts} |exp_p(v,s) - q_lift|, Gauss-Newton
// refinement on (v, s), deduplication on s*v, re-integration validation.
// "not-found" is a search outcome, never a disconnection proof.
ConnectivityReport shoot_connect(const ShootingProblem& prob);

// Occupancy raster of exp_p over a chart box: directions over the unit
// sphere (both orientations), s in [0, s_max]; segments between accepted
// samples are walked at half-cell resolution so thin passes still mark.
struct RasterGrid {
  Vec lo, hi;
  double cell = 0.0;
  std::vector<int> dims;
  std::vector<std::uint8_t> hit;

  long index(const std::vector<int>& idx) const;
  bool mark(const Vec& x);  // returns false when x is outside the box
  long hit_count() const;
  std::string csv() const;  // long format: i0..,c0..,hit
};

RasterGrid reachability_raster(const GeometryModel& m, const Vec& p, int v_sphere_samples,
                               double s_max, double cell, const Vec& box_lo, const Vec& box_hi,
                               const IntegratorConfig& cfg = {});

// --- exact de Sitter (unit pseudosphere of index 1) connectivity ---

// Lorentzian inner product -p0 q0 + sum p^i q^i; both points must satisfy
// <P,P> = 1 within 1e-9.
double desitter_inner(const Vec& P, const Vec& Q);

// Criterion: connectable iff <p,q> > -1. The boundary |<p,q>+1| < 1e-10 is
// indeterminate and reported as an error.
bool desitter_connectable(const Vec& P, const Vec& Q);

enum class DesitterArc { Constant, Trig, Null, Hyperbolic };

struct DesitterGeodesic {
  DesitterArc kind = DesitterArc::Constant;
  Vec start, dir;          // dir normalized except for the null form
  double arrival_s = 0.0;  // parameter where the curve reaches q

  Vec point(double s) const;
  Vec velocity(double s) const;
};

// Closed-form plane-section geodesic from p to q, or nullopt when the
// criterion fails. Throws on the boundary case and off-quadric input.
std::optional<DesitterGeodesic> desitter_geodesic(const Vec& P, const Vec& Q);

// Report wrapper around the closed form (verdict_source = closed-form).
ConnectivityReport desitter_connect_report(const Vec& P, const Vec& Q);

}  // namespace geolab
