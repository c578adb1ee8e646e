#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geolab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Connection coefficients at a point: gamma[k](i,j) = G^k_ij, symmetric in (i,j).
struct Christoffel {
  std::vector<Mat> gamma;

  int dim() const { return static_cast<int>(gamma.size()); }
  // G^k_ij u^i v^j
  Vec apply(const Vec& u, const Vec& v) const;
};

// Chart description of a manifold piece. A model carries a metric, an
// analytic connection, or both (they must agree when both are present).
// `index` counts negative eigenvalues of the metric (0 Riemannian,
// 1 Lorentzian). `periods` marks lattice-periodic axes (0 = aperiodic) for
// models presented on a covering chart; the chart functions themselves are
// lattice-periodic, so integration never needs to wrap.
struct GeometryModel {
  int dim = 0;
  int index = 0;
  std::function<Mat(const Vec&)> metric;
  // dg[l](i,j) = d g_ij / d x^l; optional, finite differences otherwise
  std::function<std::vector<Mat>(const Vec&)> metric_deriv;
  std::function<Christoffel(const Vec&)> connection;  // optional analytic connection
  // optional fast path: acc^k = -G^k_ij v^i v^j, no allocation
  std::function<void(const Vec& x, const Vec& v, Vec& acc)> accel;
  std::function<bool(const Vec&)> domain;  // empty = all of R^dim
  std::vector<double> periods;
  std::string name;

  bool has_metric() const { return static_cast<bool>(metric); }
  bool in_domain(const Vec& x) const { return !domain || domain(x); }
};

struct GeodesicState {
  Vec pos;
  Vec vel;
  double s = 0.0;  // affine parameter
};

enum class Termination { SpanComplete, LeftDomain, StepUnderflow, MaxSteps };

std::string to_string(Termination t);

struct StepStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  double h_min_used = 0.0;
  double h_max_used = 0.0;
};

struct Trajectory {
  std::vector<GeodesicState> samples;
  std::vector<double> energy_series;  // g(v,v) per sample; empty without a metric
  StepStats stats;
  Termination termination = Termination::SpanComplete;

  const GeodesicState& back() const { return samples.back(); }
};

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double h_init = 0.0;   // 0 = automatic
  double h_min = 1e-12;
  double h_max = 0.5;
  std::int64_t max_steps = 4000000;
  double fixed_step = 0.0;  // > 0: plain RK4 at this step, no adaptivity
};

// Metric derivatives: analytic when supplied, otherwise 4th-order central
// differences with per-axis step max(1e-5, 1e-5 |x_l|).
std::vector<Mat> metric_derivatives(const GeometryModel& m, const Vec& p);

// Levi-Civita coefficients from the metric (or the model's analytic
// connection when present). Throws Error outside the domain or when the
// metric is degenerate at p.
Christoffel christoffel(const GeometryModel& m, const Vec& p);

// Integrate the geodesic equation from state0 (taken at parameter state0.s)
// to parameter s_end; s_end < state0.s integrates backwards. Dense output is
// one sample per accepted step. Domain exits are located by bisection to
// 1e-10 in s and the trajectory ends at the last interior state.
Trajectory integrate_geodesic(const GeometryModel& m, const GeodesicState& state0, double s_end,
                              const IntegratorConfig& cfg = {});

// Observer-driven variant; on_sample is called after each accepted step and
// may return false to stop (termination reports SpanComplete in that case).
// No trajectory is materialised.
Termination integrate_observe(const GeometryModel& m, const GeodesicState& state0, double s_end,
                              const IntegratorConfig& cfg,
                              const std::function<bool(const GeodesicState&)>& on_sample,
                              GeodesicState* final_state = nullptr, StepStats* stats = nullptr);

// exp_p(s v): endpoint position of the geodesic with initial data (p, v).
Vec exp_map(const GeometryModel& m, const Vec& p, const Vec& v, double s,
            const IntegratorConfig& cfg = {});

double energy(const GeometryModel& m, const GeodesicState& st);  // g(v, v)
double killing_charge(const GeometryModel& m, const std::function<Vec(const Vec&)>& field,
                      const GeodesicState& st);  // g(K, v)

// Relative drift of a conserved quantity along a trajectory, normalised per
// unit affine parameter. The deviation at each sample is judged against the
// gradient scale of the functional (for g(v,v): ~ ||g|| |v|^2, running max
// along the path), never less than |value at start|: that is the absolute
// accuracy a state carried at relative accuracy r can support, i.e. the
// backward-error reading of "relative". For tame geodesics this matches
// drift/|e_0| up to a small factor; approaching a finite-parameter blowup
// (velocities -> 1e9; several models here have incomplete geodesics) the
// flow's condition number grows like |v| and no integrator can hold the naive
// ratio, so the drift is measured against what the state can resolve.
double relative_energy_drift(const GeometryModel& m, const Trajectory& tr);
double relative_killing_drift(const GeometryModel& m, const std::function<Vec(const Vec&)>& field,
                              const Trajectory& tr);

// CSV dump: header s,x_0..,v_0..[,energy]; energy only for metric models.
std::string trajectory_csv(const Trajectory& tr, bool with_energy);

}  // namespace geolab
