#pragma once

#include "geolab/connect.hpp"
#include "geolab/geometry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace geolab {

// Open domain D = {phi > 0} inside an ambient chart model. phi vanishes on
// the boundary with nonzero differential there; grad/hess may be supplied
// analytically, otherwise central finite differences are used.
struct DomainSpec {
  GeometryModel ambient;
  std::function<double(const Vec&)> phi;
  std::function<Vec(const Vec&)> phi_grad;   // optional
  std::function<Mat(const Vec&)> phi_hess;   // optional (coordinate Hessian)
  double fd_step = 1e-5;

  Vec grad(const Vec& x) const;
  Mat hess(const Vec& x) const;
  bool inside(const Vec& x) const { return phi(x) > 0.0; }
};

// Metric Hessian of phi at p evaluated on (v, v):
//   Hess phi(v, v) = v^i v^j (d_i d_j phi - G^k_ij d_k phi).
// v is projected onto ker(d phi_p) when it is not already tangent to the
// level set (beyond 1e-10 relative). Throws when d phi_p = 0.
double hessian_form(const DomainSpec& dom, const Vec& p, const Vec& v);

// Boundary classification by the sign of the Hessian form over tangent
// directions: strictly-convex (negative definite), convex (semidefinite),
// non-convex (a positive direction exists).
enum class BoundaryClass { StrictlyConvex, Convex, NonConvex };
std::string to_string(BoundaryClass c);

struct BoundaryPointReport {
  Vec point;           // sample projected onto phi = 0
  BoundaryClass cls = BoundaryClass::Convex;
  double margin = 0.0;  // max Hessian form over unit tangent directions
};

// Project x onto the level set phi = level by the gradient flow
// x <- x + (level - phi) grad phi / |grad phi|^2. Throws on stall.
Vec project_to_level(const DomainSpec& dom, Vec x, double level = 0.0);

// Classify boundary points near the given samples (each is projected onto
// phi = 0 first). Margins within tie_tol of zero resolve to the weaker
// class (convex rather than strictly-convex).
std::vector<BoundaryPointReport> classify_boundary(const DomainSpec& dom,
                                                   const std::vector<Vec>& samples,
                                                   int directions = 16,
                                                   double tie_tol = 1e-9);

// Tangent-geodesic probe of local convexity at a boundary point: integrate
// ambient geodesics with boundary-tangent initial velocity over |s| <=
// radius; a violation means some tangent geodesic enters {phi > enter_tol}.
enum class TangentProbe { Consistent, Violation };
std::string to_string(TangentProbe v);

struct TangentProbeReport {
  TangentProbe verdict = TangentProbe::Consistent;
  double max_phi = 0.0;  // largest phi reached by any tangent geodesic
  Vec worst_dir;         // direction attaining it
};

TangentProbeReport check_local_convexity(const DomainSpec& dom, const Vec& p, double radius,
                                         int directions = 16, double enter_tol = 1e-9);

// Discrete H^1 path: fixed endpoints with N strictly interior nodes on a
// uniform parameter grid over [0, 1].
struct PathVariable {
  Vec p, q;
  std::vector<Vec> nodes;

  int segment_count() const { return static_cast<int>(nodes.size()) + 1; }
  double spacing() const { return 1.0 / segment_count(); }
  // point k of the full chain, k = 0 .. nodes+1
  const Vec& point(int k) const {
    if (k == 0) return p;
    if (k == static_cast<int>(nodes.size()) + 1) return q;
    return nodes[static_cast<std::size_t>(k - 1)];
  }
};

// Straight chart chord from p to q with interior nodes; nodes falling into
// phi <= band are pushed inward along the phi gradient (the deterministic
// fallback direction breaks ties where the gradient vanishes, e.g. a chord
// through a symmetric hole).
PathVariable chord_path(const DomainSpec& dom, const Vec& p, const Vec& q, int n_nodes,
                        double band = 1e-2);

struct PenalizedProblem {
  DomainSpec domain;
  Vec p, q;
  std::vector<double> eps_schedule;  // empty = eps0 4^-k, 8 steps, eps0 from the seed
  int nodes = 200;
  int max_iter = 600;      // optimizer iterations per stage
  double grad_tol = 1e-8;  // stage convergence: preconditioned step norm
  double enter_band = 1e-2;
};

// Discrete action with barrier: f_eps = f + eps int phi^-2, where
// f = 1/2 int <xdot, xdot> on the trapezoidal grid. Throws if a node
// leaves the domain.
double penalized_action(const PenalizedProblem& prob, const PathVariable& path, double eps);

// Analytic gradient of the penalized action w.r.t. the interior nodes.
std::vector<Vec> penalized_gradient(const PenalizedProblem& prob, const PathVariable& path,
                                    double eps);

struct StageLog {
  double eps = 0.0;
  double f = 0.0;        // unpenalized action of the stage minimizer
  double min_phi = 0.0;  // interior margin along the stage minimizer
  double grad_norm = 0.0;
  int iterations = 0;
};

struct DomainConnectionReport {
  ConnectStatus status = ConnectStatus::NotFound;
  PathVariable path;
  double action = 0.0;    // final unpenalized f
  double min_phi = 0.0;   // distance-to-boundary margin (in phi units)
  double residual = 0.0;  // final-stage penalized gradient norm
  std::vector<StageLog> stages;
  std::string diagnostics;
};

// Penalized-action connector: minimize f_eps along the schedule, warm
// starting each stage from the previous minimizer (initial path: inward-
// projected chord, or the explicit seed). Success requires every stage to
// converge with the path strictly interior and the action stabilized.
DomainConnectionReport connect_in_domain(const PenalizedProblem& prob);
DomainConnectionReport connect_in_domain(const PenalizedProblem& prob, const PathVariable& seed);

// Hypothesis audit on a ladder of level sets phi^-1(a_m): gradient-norm
// bounds, the least Hessian-bound constant M over level-tangent directions
// (and over all directions for the Cauchy-boundary variant), and sampled
// flow-derivative magnitudes (no pass/fail: reported as heuristic).
struct LevelStats {
  double level = 0.0;
  double grad_min = 0.0, grad_max = 0.0;  // metric norm of grad phi
  double M_tangent = 0.0;  // least M with Hess[v,v] <= M <v,v> phi, tangent v
  double M_alldir = 0.0;   // same over all directions
  int samples = 0;
};

struct ConditionAudit {
  std::vector<LevelStats> levels;
  bool grad_bounds_ok = false;  // lower bound does not decay along the ladder
  double grad_lower = 0.0, grad_upper = 0.0;
  double M_tangent = 0.0;  // sup over the ladder
  double M_alldir = 0.0;
  double flow_first = 0.0, flow_second = 0.0;  // sampled flow derivative norms
  std::string notes;
};

ConditionAudit audit_domain_conditions(const DomainSpec& dom, const std::vector<Vec>& seeds,
                                       const std::vector<double>& levels, int directions = 16);

}  // namespace geolab
