// geolab: command-line front end for the geodesic-connectivity library.
//
// Subcommands cover geodesic integration, two-point connectivity searches,
// reachability rasters, the de Sitter closed form, multiwarped solvers,
// boundary-convexity tools, stationary-chart diagnostics, and seeded demo
// reproductions with built-in assertions.
//
// Reports are JSON (schema 1) to stdout or --out; plot data goes to CSV via
// --csv. Exit codes: 0 completed / connection found, 2 not-found verdict,
// 1 error (message on stderr names the offending flag or field).

#include "geolab/connect.hpp"
#include "geolab/convexity.hpp"
#include "geolab/geometry.hpp"
#include "geolab/model_io.hpp"
#include "geolab/models.hpp"
#include "geolab/multiwarp.hpp"
#include "geolab/stationary.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using geolab::Mat;
using geolab::Vec;
using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& msg) { throw geolab::Error(msg); }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& item, const std::string& flag) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos != item.size()) throw std::invalid_argument(item);
    return v;
  } catch (const std::exception&) {
    bad(flag + ": cannot parse '" + item + "' as a number");
  }
}

Vec parse_vec(const std::string& text, const std::string& flag) {
  const auto items = split(text, ',');
  if (items.empty() || text.empty()) bad(flag + ": empty coordinate list");
  Vec v(static_cast<int>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i)
    v[static_cast<int>(i)] = parse_double(items[i], flag);
  return v;
}

Vec parse_vec_checked(const std::string& text, int dim, const std::string& flag) {
  Vec v = parse_vec(text, flag);
  if (v.size() != dim)
    bad(flag + ": expected " + std::to_string(dim) + " coordinates, got " +
        std::to_string(v.size()));
  return v;
}

// "x1,y1;x2,y2;..." -> list of points of the given dimension.
std::vector<Vec> parse_point_list(const std::string& text, int dim, const std::string& flag) {
  std::vector<Vec> out;
  for (const auto& block : split(text, ';')) {
    if (block.empty()) continue;
    out.push_back(parse_vec_checked(block, dim, flag));
  }
  if (out.empty()) bad(flag + ": empty point list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split(text, ','))
    if (!item.empty()) out.push_back(parse_double(item, flag));
  if (out.empty()) bad(flag + ": empty list");
  return out;
}

// Multiwarped point "t;x_1,..;y_1,.." -- base coordinate, then one block of
// fiber chart coordinates per fiber.
geolab::MultiwarpedPoint parse_mw_point(const std::string& text, const geolab::MultiwarpedModel& m,
                                        const std::string& flag) {
  const auto blocks = split(text, ';');
  if (static_cast<int>(blocks.size()) != 1 + m.fiber_count())
    bad(flag + ": expected 't;" + std::string(m.fiber_count() > 1 ? "fiber;..." : "fiber") +
        "' with " + std::to_string(m.fiber_count()) + " fiber block(s), got " +
        std::to_string(blocks.size()) + " block(s)");
  geolab::MultiwarpedPoint z;
  z.t = parse_double(blocks[0], flag);
  if (!m.in_interval(z.t))
    bad(flag + ": base coordinate " + std::to_string(z.t) + " is outside the warp interval");
  for (int i = 0; i < m.fiber_count(); ++i)
    z.fiber.push_back(parse_vec_checked(blocks[static_cast<std::size_t>(i + 1)],
                                        m.fibers[static_cast<std::size_t>(i)].dim, flag));
  return z;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json solution_json(const geolab::ConnectSolution& sol, bool multiwarped) {
  json s;
  s["v0"] = vec_json(sol.v0);
  s["arrival_s"] = sol.arrival_s;
  s["endpoint_error"] = sol.endpoint_error;
  if (multiwarped) {
    s["fiber_constants"] = vec_json(sol.fiber_constants);
    s["energy_K"] = sol.energy_K;
    s["fiber_lengths"] = sol.fiber_lengths;
  }
  return s;
}

void write_text(const std::string& path, const std::string& text, const std::string& flag) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad(flag + ": cannot open '" + path + "' for writing");
  out << text;
  if (!out) bad(flag + ": write to '" + path + "' failed");
}

// Report sink: stdout by default, --out otherwise.
void emit(const json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty())
    std::fwrite(text.data(), 1, text.size(), stdout);
  else
    write_text(out_path, text, "--out");
}

json base_report(const std::string& command) {
  json r;
  r["schema"] = 1;
  r["command"] = command;
  return r;
}

// JSON has no literal for infinities; warp intervals may be unbounded.
json endpoint_json(double v) {
  if (std::isfinite(v)) return json(v);
  return json(v > 0.0 ? "inf" : "-inf");
}

geolab::IntegratorConfig make_integ(double tol) {
  geolab::IntegratorConfig cfg;
  if (tol > 0.0) cfg.abs_tol = cfg.rel_tol = tol;
  return cfg;
}

// ---------------------------------------------------------------------------
// integrate

struct IntegrateOpts {
  std::string model, x0, v0, out, csv;
  double s_end = 10.0;
  double tol = 0.0;
  double fixed_step = 0.0;
};

int run_integrate(const IntegrateOpts& o) {
  const geolab::LoadedModel lm = geolab::load_model(o.model);
  const Vec x0 = parse_vec_checked(o.x0, lm.geometry.dim, "--x0");
  const Vec v0 = parse_vec_checked(o.v0, lm.geometry.dim, "--v0");
  geolab::IntegratorConfig cfg = make_integ(o.tol);
  if (o.fixed_step > 0.0) cfg.fixed_step = o.fixed_step;

  const geolab::Trajectory tr = geolab::integrate_geodesic(lm.geometry, {x0, v0, 0.0}, o.s_end, cfg);

  json r = base_report("integrate");
  r["model"] = lm.name;
  r["kind"] = geolab::to_string(lm.kind);
  r["coordinates"] = lm.coordinates;
  r["x0"] = vec_json(x0);
  r["v0"] = vec_json(v0);
  r["s_end"] = o.s_end;
  r["termination"] = geolab::to_string(tr.termination);
  r["samples"] = tr.samples.size();
  r["steps"] = {{"accepted", tr.stats.accepted}, {"rejected", tr.stats.rejected}};
  const geolab::GeodesicState& fin = tr.back();
  r["end"] = {{"s", fin.s}, {"x", vec_json(fin.pos)}, {"v", vec_json(fin.vel)}};
  if (lm.geometry.has_metric() && !tr.energy_series.empty()) {
    r["energy"] = {{"initial", tr.energy_series.front()},
                   {"final", tr.energy_series.back()},
                   {"relative_drift", geolab::relative_energy_drift(lm.geometry, tr)}};
  }
  if (!o.csv.empty())
    write_text(o.csv, geolab::trajectory_csv(tr, lm.geometry.has_metric()), "--csv");
  emit(r, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// connect

struct ConnectOpts {
  std::string model, p, q, v_lo, v_hi, out;
  double s_max = 10.0;
  double tol = 1e-6;
  int multistart = 8;
  int grid = 0;
  int max_winding = 0;
  int max_solutions = 0;
};

int run_connect(const ConnectOpts& o) {
  const geolab::LoadedModel lm = geolab::load_model(o.model);
  geolab::ShootingProblem prob;
  prob.model = lm.geometry;
  prob.p = parse_vec_checked(o.p, lm.geometry.dim, "--p");
  prob.q = parse_vec_checked(o.q, lm.geometry.dim, "--q");
  if (o.s_max <= 0.0) bad("--s-max: must be positive");
  prob.s_max = o.s_max;
  prob.tol_endpoint = o.tol;
  prob.multistart = o.multistart;
  prob.grid_per_axis = o.grid;
  prob.max_solutions = o.max_solutions;
  if (!lm.geometry.periods.empty()) {
    prob.lattice = lm.geometry.periods;
    prob.max_winding = o.max_winding;
  } else if (o.max_winding > 0) {
    bad("--max-winding: model has no periodic coordinates");
  }

  double reach = (prob.q - prob.p).norm();
  for (double per : prob.lattice) reach += o.max_winding * per;
  const double vmax = std::max(1.0, 2.0 * reach / prob.s_max);
  prob.v_lo = o.v_lo.empty() ? Vec::Constant(lm.geometry.dim, -vmax)
                             : parse_vec_checked(o.v_lo, lm.geometry.dim, "--v-lo");
  prob.v_hi = o.v_hi.empty() ? Vec::Constant(lm.geometry.dim, vmax)
                             : parse_vec_checked(o.v_hi, lm.geometry.dim, "--v-hi");

  const geolab::ConnectivityReport rep = geolab::shoot_connect(prob);

  json r = base_report("connect");
  r["model"] = lm.name;
  r["p"] = vec_json(prob.p);
  r["q"] = vec_json(prob.q);
  r["s_max"] = prob.s_max;
  r["tol_endpoint"] = prob.tol_endpoint;
  r["v_lo"] = vec_json(prob.v_lo);
  r["v_hi"] = vec_json(prob.v_hi);
  r["max_winding"] = prob.max_winding;
  r["status"] = geolab::to_string(rep.status);
  r["verdict_source"] = geolab::to_string(rep.verdict_source);
  json sols = json::array();
  for (const auto& s : rep.solutions) sols.push_back(solution_json(s, false));
  r["solutions"] = sols;
  if (!rep.diagnostics.empty()) r["diagnostics"] = rep.diagnostics;
  emit(r, o.out);
  return rep.status == geolab::ConnectStatus::Connected ? 0 : 2;
}

// ---------------------------------------------------------------------------
// raster

struct RasterOpts {
  std::string model, p, lo, hi, out, csv;
  int directions = 64;
  double s_max = 10.0;
  double cell = 0.25;
  double tol = 0.0;
};

int run_raster(const RasterOpts& o) {
  const geolab::LoadedModel lm = geolab::load_model(o.model);
  const Vec p = parse_vec_checked(o.p, lm.geometry.dim, "--p");
  const Vec lo = o.lo.empty() ? Vec(p.array() - o.s_max)
                              : parse_vec_checked(o.lo, lm.geometry.dim, "--lo");
  const Vec hi = o.hi.empty() ? Vec(p.array() + o.s_max)
                              : parse_vec_checked(o.hi, lm.geometry.dim, "--hi");
  if (((hi - lo).array() <= 0.0).any()) bad("--lo/--hi: box must have positive extent");
  if (o.cell <= 0.0) bad("--cell: must be positive");

  const geolab::RasterGrid grid =
      geolab::reachability_raster(lm.geometry, p, o.directions, o.s_max, o.cell, lo, hi,
                                  make_integ(o.tol > 0.0 ? o.tol : 1e-8));

  long total = 1;
  for (int d : grid.dims) total *= d;
  json r = base_report("raster");
  r["model"] = lm.name;
  r["p"] = vec_json(p);
  r["directions"] = o.directions;
  r["s_max"] = o.s_max;
  r["cell"] = grid.cell;
  r["lo"] = vec_json(grid.lo);
  r["hi"] = vec_json(grid.hi);
  r["dims"] = grid.dims;
  r["cells"] = total;
  r["hit_cells"] = grid.hit_count();
  r["fill_fraction"] = static_cast<double>(grid.hit_count()) / static_cast<double>(total);
  if (!o.csv.empty()) write_text(o.csv, grid.csv(), "--csv");
  emit(r, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// desitter

struct DesitterOpts {
  std::string p, q, out;
};

int run_desitter(const DesitterOpts& o) {
  const Vec P = parse_vec(o.p, "--p");
  const Vec Q = parse_vec(o.q, "--q");
  if (P.size() != Q.size()) bad("--q: dimension differs from --p");
  if (P.size() < 3) bad("--p: ambient dimension must be at least 3 (S^n_1, n >= 2)");

  const geolab::ConnectivityReport rep = geolab::desitter_connect_report(P, Q);

  json r = base_report("desitter");
  r["p"] = vec_json(P);
  r["q"] = vec_json(Q);
  r["inner"] = geolab::desitter_inner(P, Q);
  r["status"] = geolab::to_string(rep.status);
  r["verdict_source"] = geolab::to_string(rep.verdict_source);
  if (rep.status == geolab::ConnectStatus::Connected) {
    const auto g = geolab::desitter_geodesic(P, Q);
    const char* kind = "constant";
    switch (g->kind) {
      case geolab::DesitterArc::Constant: kind = "constant"; break;
      case geolab::DesitterArc::Trig: kind = "trigonometric"; break;
      case geolab::DesitterArc::Null: kind = "null"; break;
      case geolab::DesitterArc::Hyperbolic: kind = "hyperbolic"; break;
    }
    r["arc"] = kind;
  }
  json sols = json::array();
  for (const auto& s : rep.solutions) sols.push_back(solution_json(s, false));
  r["solutions"] = sols;
  if (!rep.diagnostics.empty()) r["diagnostics"] = rep.diagnostics;
  emit(r, o.out);
  return rep.status == geolab::ConnectStatus::Connected ? 0 : 2;
}

// ---------------------------------------------------------------------------
// multiwarped connect | causal | criterion

struct MwConnectOpts {
  std::string model, z, w, out;
  int max_winding = 1;
  double tol = 1e-6;
  int grid = 9;
  int max_combos = 512;
  double length_cap = 0.0;
};

const geolab::MultiwarpedModel& require_multiwarped(const geolab::LoadedModel& lm) {
  if (lm.kind != geolab::ModelKind::Multiwarped || !lm.multiwarped)
    bad("--model: expected a multiwarped model, got kind '" + geolab::to_string(lm.kind) + "'");
  return *lm.multiwarped;
}

int run_mw_connect(const MwConnectOpts& o, bool causal) {
  const geolab::LoadedModel lm = geolab::load_model(o.model);
  const geolab::MultiwarpedModel& m = require_multiwarped(lm);
  const geolab::MultiwarpedPoint z = parse_mw_point(o.z, m, "--z");
  const geolab::MultiwarpedPoint w = parse_mw_point(o.w, m, "--w");

  geolab::MultiwarpSolveOptions opts;
  opts.max_winding = o.max_winding;
  opts.tol_endpoint = o.tol;
  opts.simplex_grid = o.grid;
  opts.max_combos = o.max_combos;
  opts.length_cap = o.length_cap;

  const geolab::ConnectivityReport rep =
      causal ? geolab::causal_connect(m, z, w, opts) : geolab::solve_connection(m, z, w, opts);

  json r = base_report(causal ? "multiwarped causal" : "multiwarped connect");
  r["model"] = lm.name;
  r["z"] = o.z;
  r["w"] = o.w;
  r["max_winding"] = o.max_winding;
  r["tol_endpoint"] = o.tol;
  r["status"] = geolab::to_string(rep.status);
  r["verdict_source"] = geolab::to_string(rep.verdict_source);
  r["solution_count"] = rep.solutions.size();
  json sols = json::array();
  for (const auto& s : rep.solutions) sols.push_back(solution_json(s, true));
  r["solutions"] = sols;
  if (!rep.diagnostics.empty()) r["diagnostics"] = rep.diagnostics;
  emit(r, o.out);
  return rep.status == geolab::ConnectStatus::Connected ? 0 : 2;
}

struct MwCriterionOpts {
  std::string model, out;
  double c_probe = 1.0;
};

int run_mw_criterion(const MwCriterionOpts& o) {
  const geolab::LoadedModel lm = geolab::load_model(o.model);
  const geolab::MultiwarpedModel& m = require_multiwarped(lm);
  if (o.c_probe <= 0.0) bad("--c-probe: must be positive");

  const geolab::CriterionReport rep = geolab::check_integral_criterion(m, o.c_probe);

  json r = base_report("multiwarped criterion");
  r["model"] = lm.name;
  r["c_probe"] = o.c_probe;
  r["interval"] = {endpoint_json(m.t_lo), endpoint_json(m.t_hi)};
  json fibers = json::array();
  for (std::size_t i = 0; i < rep.toward_lo.size(); ++i) {
    json f;
    f["fiber"] = m.fibers[i].name;
    f["toward_lo"] = geolab::to_string(rep.toward_lo[i]);
    f["toward_hi"] = geolab::to_string(rep.toward_hi[i]);
    f["tail_lo"] = rep.tail_lo[i];
    f["tail_hi"] = rep.tail_hi[i];
    fibers.push_back(f);
  }
  r["fibers"] = fibers;
  if (!rep.note.empty()) r["note"] = rep.note;
  emit(r, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// convexity classify | audit | connect

std::vector<Vec> sampled_seeds(const geolab::DomainSpec& dom, const std::string& lo_text,
                               const std::string& hi_text, int samples, std::uint64_t seed,
                               const std::string& who) {
  if (lo_text.empty() || hi_text.empty())
    bad(who + ": provide --points, or a sampling box via --lo and --hi");
  const int d = dom.ambient.dim;
  const Vec lo = parse_vec_checked(lo_text, d, "--lo");
  const Vec hi = parse_vec_checked(hi_text, d, "--hi");
  if (((hi - lo).array() <= 0.0).any()) bad("--lo/--hi: box must have positive extent");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    Vec x(d);
    for (int a = 0; a < d; ++a) x[a] = lo[a] + (hi[a] - lo[a]) * uni(gen);
    out.push_back(x);
  }
  return out;
}

struct CvxClassifyOpts {
  std::string domain, points, lo, hi, out;
  int samples = 32;
  int directions = 16;
  double tie_tol = 1e-9;
  std::uint64_t seed = 1;
};

int run_cvx_classify(const CvxClassifyOpts& o) {
  const geolab::LoadedDomain ld = geolab::load_domain(o.domain);
  const int d = ld.domain.ambient.dim;
  const std::vector<Vec> seeds =
      o.points.empty() ? sampled_seeds(ld.domain, o.lo, o.hi, o.samples, o.seed, "classify")
                       : parse_point_list(o.points, d, "--points");

  const auto reports = geolab::classify_boundary(ld.domain, seeds, o.directions, o.tie_tol);

  int n_strict = 0, n_convex = 0, n_nonconvex = 0;
  json pts = json::array();
  for (const auto& bp : reports) {
    switch (bp.cls) {
      case geolab::BoundaryClass::StrictlyConvex: ++n_strict; break;
      case geolab::BoundaryClass::Convex: ++n_convex; break;
      case geolab::BoundaryClass::NonConvex: ++n_nonconvex; break;
    }
    pts.push_back({{"point", vec_json(bp.point)},
                   {"class", geolab::to_string(bp.cls)},
                   {"margin", bp.margin}});
  }
  const char* overall = n_nonconvex > 0 ? "non-convex" : (n_convex > 0 ? "convex" : "strictly-convex");

  json r = base_report("convexity classify");
  r["domain"] = ld.model.name;
  r["phi"] = ld.phi_text;
  r["directions"] = o.directions;
  r["tie_tol"] = o.tie_tol;
  r["overall"] = overall;
  r["counts"] = {{"strictly-convex", n_strict}, {"convex", n_convex}, {"non-convex", n_nonconvex}};
  r["points"] = pts;
  emit(r, o.out);
  return 0;
}

struct CvxAuditOpts {
  std::string domain, points, lo, hi, levels, out;
  int samples = 64;
  int directions = 16;
  std::uint64_t seed = 1;
};

int run_cvx_audit(const CvxAuditOpts& o) {
  const geolab::LoadedDomain ld = geolab::load_domain(o.domain);
  const int d = ld.domain.ambient.dim;
  const std::vector<Vec> seeds =
      o.points.empty() ? sampled_seeds(ld.domain, o.lo, o.hi, o.samples, o.seed, "audit")
                       : parse_point_list(o.points, d, "--points");
  const std::vector<double> levels =
      o.levels.empty() ? std::vector<double>{0.2, 0.1, 0.05, 0.025, 0.0125}
                       : parse_double_list(o.levels, "--levels");
  for (double l : levels)
    if (l <= 0.0) bad("--levels: levels must be positive (interior level sets)");

  const geolab::ConditionAudit audit =
      geolab::audit_domain_conditions(ld.domain, seeds, levels, o.directions);

  json r = base_report("convexity audit");
  r["domain"] = ld.model.name;
  r["phi"] = ld.phi_text;
  r["directions"] = o.directions;
  json lv = json::array();
  for (const auto& s : audit.levels)
    lv.push_back({{"level", s.level},
                  {"grad_min", s.grad_min},
                  {"grad_max", s.grad_max},
                  {"M_tangent", s.M_tangent},
                  {"M_alldir", s.M_alldir},
                  {"samples", s.samples}});
  r["levels"] = lv;
  r["grad_bounds_ok"] = audit.grad_bounds_ok;
  r["grad_lower"] = audit.grad_lower;
  r["grad_upper"] = audit.grad_upper;
  r["M_tangent"] = audit.M_tangent;
  r["M_alldir"] = audit.M_alldir;
  r["flow_first"] = audit.flow_first;
  r["flow_second"] = audit.flow_second;
  if (!audit.notes.empty()) r["notes"] = audit.notes;
  emit(r, o.out);
  return 0;
}

struct CvxConnectOpts {
  std::string domain, p, q, center, out, csv;
  int n_nodes = 200;
  double eps0 = 0.0;
  int stages = 8;
  int max_iter = 600;
  double grad_tol = 1e-8;
  int winding = std::numeric_limits<int>::min();  // sentinel: chord seed
};

// Polar arc from p to q around the given center, winding k extra turns;
// nodes that hug the boundary are nudged to the phi = 2e-2 level.
geolab::PathVariable winding_seed(const geolab::DomainSpec& dom, const Vec& p, const Vec& q,
                                  int k, int n_nodes, const Vec& center) {
  const Vec dp = p - center, dq = q - center;
  const double rp = dp.norm(), rq = dq.norm();
  if (rp < 1e-12 || rq < 1e-12) bad("--winding: endpoint coincides with --center");
  const double thp = std::atan2(dp[1], dp[0]);
  double dth = std::atan2(dq[1], dq[0]) - thp;
  dth -= 2.0 * M_PI * std::floor(dth / (2.0 * M_PI) + 0.5);  // principal branch
  const double total = dth + 2.0 * M_PI * k;
  geolab::PathVariable path;
  path.p = p;
  path.q = q;
  const int segs = n_nodes + 1;
  for (int i = 1; i <= n_nodes; ++i) {
    const double u = static_cast<double>(i) / segs;
    const double r = rp + (rq - rp) * u;
    const double th = thp + total * u;
    Vec x = center + r * Vec(Eigen::Vector2d(std::cos(th), std::sin(th)));
    if (dom.phi(x) <= 1e-2) x = geolab::project_to_level(dom, x, 2e-2);
    path.nodes.push_back(x);
  }
  return path;
}

int run_cvx_connect(const CvxConnectOpts& o) {
  const geolab::LoadedDomain ld = geolab::load_domain(o.domain);
  const int d = ld.domain.ambient.dim;

  geolab::PenalizedProblem prob;
  prob.domain = ld.domain;
  prob.p = parse_vec_checked(o.p, d, "--p");
  prob.q = parse_vec_checked(o.q, d, "--q");
  if (!prob.domain.inside(prob.p))
    bad("--p: point lies outside the domain (phi = " + std::to_string(prob.domain.phi(prob.p)) + ")");
  if (!prob.domain.inside(prob.q))
    bad("--q: point lies outside the domain (phi = " + std::to_string(prob.domain.phi(prob.q)) + ")");
  if (o.n_nodes < 1) bad("--n-nodes: need at least one interior node");
  prob.nodes = o.n_nodes;
  prob.max_iter = o.max_iter;
  prob.grad_tol = o.grad_tol;
  if (o.eps0 > 0.0) {
    prob.eps_schedule.clear();
    double eps = o.eps0;
    for (int k = 0; k < o.stages; ++k, eps *= 0.25) prob.eps_schedule.push_back(eps);
  }

  const bool use_winding = o.winding != std::numeric_limits<int>::min();
  geolab::DomainConnectionReport rep;
  if (use_winding) {
    if (d != 2) bad("--winding: polar-arc seeds require a 2-dimensional chart");
    const Vec center =
        o.center.empty() ? Vec(Vec::Zero(2)) : parse_vec_checked(o.center, 2, "--center");
    rep = geolab::connect_in_domain(
        prob, winding_seed(prob.domain, prob.p, prob.q, o.winding, prob.nodes, center));
  } else {
    rep = geolab::connect_in_domain(prob);
  }

  json r = base_report("convexity connect");
  r["domain"] = ld.model.name;
  r["phi"] = ld.phi_text;
  r["p"] = vec_json(prob.p);
  r["q"] = vec_json(prob.q);
  r["n_nodes"] = prob.nodes;
  if (use_winding) r["winding"] = o.winding;
  r["status"] = geolab::to_string(rep.status);
  r["action"] = rep.action;
  r["min_phi"] = rep.min_phi;
  r["residual"] = rep.residual;
  json stages = json::array();
  for (const auto& st : rep.stages)
    stages.push_back({{"eps", st.eps},
                      {"f", st.f},
                      {"min_phi", st.min_phi},
                      {"grad_norm", st.grad_norm},
                      {"iterations", st.iterations}});
  r["stages"] = stages;
  if (!rep.diagnostics.empty()) r["diagnostics"] = rep.diagnostics;
  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv << "k";
    for (int a = 0; a < d; ++a) csv << ",x" << a;
    csv << "\n";
    for (int k = 0; k <= rep.path.segment_count(); ++k) {
      csv << k;
      const Vec& x = rep.path.point(k);
      for (int a = 0; a < d; ++a) csv << "," << std::setprecision(17) << x[a];
      csv << "\n";
    }
    write_text(o.csv, csv.str(), "--csv");
  }
  emit(r, o.out);
  return rep.status == geolab::ConnectStatus::Connected ? 0 : 2;
}

// ---------------------------------------------------------------------------
// stationary split | audit

const geolab::StationaryModel& require_stationary(const geolab::LoadedModel& lm) {
  if (lm.kind != geolab::ModelKind::Stationary || !lm.stationary)
    bad("--model: expected a stationary model, got kind '" + geolab::to_string(lm.kind) + "'");
  return *lm.stationary;
}

struct StSplitOpts {
  std::string model, p, q, out;
  int n_nodes = 32;
};

int run_st_split(const StSplitOpts& o) {
  const geolab::LoadedModel lm = geolab::load_model(o.model);
  const geolab::StationaryModel& m = require_stationary(lm);
  const int d = m.spatial_dim() + 1;
  geolab::DiscreteCurve curve;
  curve.p = parse_vec_checked(o.p, d, "--p");
  curve.q = parse_vec_checked(o.q, d, "--q");
  if (o.n_nodes < 0) bad("--n-nodes: must be non-negative");
  const int segs = o.n_nodes + 1;
  for (int i = 1; i <= o.n_nodes; ++i)
    curve.nodes.push_back(curve.p + (curve.q - curve.p) * (static_cast<double>(i) / segs));

  const double f = geolab::curve_action(m, curve);
  const geolab::ActionSplit sp = geolab::split_action(m, curve);
  const double resid = std::abs(f - sp.total()) / std::max(1.0, std::abs(f));

  json r = base_report("stationary split");
  r["model"] = lm.name;
  r["coordinates"] = lm.coordinates;
  r["p"] = vec_json(curve.p);
  r["q"] = vec_json(curve.q);
  r["segments"] = curve.segment_count();
  r["action"] = f;
  r["spatial"] = sp.spatial;
  r["killing"] = sp.killing;
  r["identity_residual"] = resid;
  emit(r, o.out);
  return 0;
}

struct StAuditOpts {
  std::string model, lo, hi, p0, out;
  int per_axis = 12;
};

int run_st_audit(const StAuditOpts& o) {
  const geolab::LoadedModel lm = geolab::load_model(o.model);
  const geolab::StationaryModel& m = require_stationary(lm);
  const int n = m.spatial_dim();
  if (o.lo.empty() || o.hi.empty()) bad("audit: provide the spatial box via --lo and --hi");
  const Vec lo = parse_vec_checked(o.lo, n, "--lo");
  const Vec hi = parse_vec_checked(o.hi, n, "--hi");
  if (((hi - lo).array() <= 0.0).any()) bad("--lo/--hi: box must have positive extent");
  const Vec p0 = o.p0.empty() ? Vec(0.5 * (lo + hi)) : parse_vec_checked(o.p0, n, "--p0");
  if (o.per_axis < 2) bad("--per-axis: need at least 2 nodes per axis");

  const geolab::StationaryConditionsReport rep =
      geolab::audit_stationary_conditions(m, lo, hi, p0, o.per_axis);

  json r = base_report("stationary audit");
  r["model"] = lm.name;
  r["lo"] = vec_json(lo);
  r["hi"] = vec_json(hi);
  r["p0"] = vec_json(p0);
  r["per_axis"] = o.per_axis;
  r["samples"] = rep.samples;
  r["completeness"] = rep.completeness;
  r["completeness_asserted"] = rep.completeness_asserted;
  r["beta"] = {{"inf", rep.beta_inf}, {"sup", rep.beta_sup}};
  r["omega_growth"] = {{"alpha", rep.omega_growth.alpha},
                       {"A", rep.omega_growth.A},
                       {"B", rep.omega_growth.B},
                       {"residual", rep.omega_growth.residual},
                       {"sublinear", rep.omega_growth.sublinear},
                       {"bins", rep.omega_growth.bins}};
  if (!rep.notes.empty()) r["notes"] = rep.notes;
  emit(r, o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// demo: seeded reproductions with built-in assertions

struct DemoOpts {
  std::string out;
  std::uint64_t seed = 1;
};

struct AssertionLog {
  json entries = json::array();
  bool ok = true;

  void check_le(const std::string& name, double value, double bound) {
    const bool pass = value <= bound;
    ok = ok && pass;
    entries.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
  }
  void check_ge(const std::string& name, double value, double bound) {
    const bool pass = value >= bound;
    ok = ok && pass;
    entries.push_back(
        {{"name", name}, {"value", value}, {"bound", bound}, {"relation", "ge"}, {"pass", pass}});
  }
  void check_eq(const std::string& name, const std::string& value, const std::string& want) {
    const bool pass = value == want;
    ok = ok && pass;
    entries.push_back({{"name", name}, {"value", value}, {"expected", want}, {"pass", pass}});
  }
};

int finish_demo(json& r, AssertionLog& log, const std::string& out) {
  r["assertions"] = log.entries;
  r["pass"] = log.ok;
  emit(r, out);
  return log.ok ? 0 : 1;
}

// Bates torus: x stays in a strip of length <= 2 pi along every geodesic.
int run_demo_bates(const DemoOpts& o) {
  const geolab::GeometryModel m = geolab::models::bates_torus();
  std::mt19937_64 gen(o.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> pos(-M_PI, M_PI);
  std::uniform_real_distribution<double> speed(0.5, 1.5);

  geolab::IntegratorConfig cfg;
  cfg.abs_tol = cfg.rel_tol = 1e-9;
  const int count = 1000;
  const double span = 20.0;
  double max_range = 0.0;
  for (int i = 0; i < count; ++i) {
    const Vec x0 = (Vec(2) << pos(gen), pos(gen)).finished();
    const double th = angle(gen), sp = speed(gen);
    const Vec v0 = (Vec(2) << sp * std::cos(th), sp * std::sin(th)).finished();
    double x_min = x0[0], x_max = x0[0];
    for (const double s_end : {span, -span}) {
      const geolab::Termination term = geolab::integrate_observe(
          m, {x0, v0, 0.0}, s_end, cfg,
          [&](const geolab::GeodesicState& st) {
            x_min = std::min(x_min, st.pos[0]);
            x_max = std::max(x_max, st.pos[0]);
            return true;
          });
      if (term != geolab::Termination::SpanComplete) bad("demo bates: integration did not complete");
    }
    max_range = std::max(max_range, x_max - x_min);
  }

  json r = base_report("demo bates");
  r["seed"] = o.seed;
  r["geodesics"] = count;
  r["span"] = {-span, span};
  r["max_x_range"] = max_range;
  AssertionLog log;
  log.check_le("x-range <= 2 pi", max_range, 2.0 * M_PI + 1e-3);
  return finish_demo(r, log, o.out);
}

// Smith torus: det g = -1 everywhere; x-projection bounded; energy conserved.
int run_demo_smith(const DemoOpts& o) {
  const geolab::GeometryModel m = geolab::models::smith_torus();
  std::mt19937_64 gen(o.seed);
  std::uniform_real_distribution<double> pos(-M_PI, M_PI);
  std::uniform_real_distribution<double> vel(-1.5, 1.5);

  double max_det_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec x = (Vec(2) << pos(gen), pos(gen)).finished();
    max_det_err = std::max(max_det_err, std::abs(m.metric(x).determinant() + 1.0));
  }

  const int count = 200;
  const double span = 10.0;
  double max_range = 0.0, max_drift = 0.0;
  int used = 0;
  geolab::IntegratorConfig cfg;  // library defaults: drift-grade tolerances
  while (used < count) {
    const Vec x0 = (Vec(2) << pos(gen), pos(gen)).finished();
    const Vec v0 = (Vec(2) << vel(gen), vel(gen)).finished();
    const double e0 = v0.dot(m.metric(x0) * v0);
    if (std::abs(e0) < 0.1 * v0.squaredNorm()) continue;  // skip near-null launches
    ++used;
    double x_min = x0[0], x_max = x0[0];
    for (const double s_end : {span, -span}) {
      const geolab::Trajectory tr = geolab::integrate_geodesic(m, {x0, v0, 0.0}, s_end, cfg);
      if (tr.termination != geolab::Termination::SpanComplete)
        bad("demo smith: integration did not complete");
      for (const auto& st : tr.samples) {
        x_min = std::min(x_min, st.pos[0]);
        x_max = std::max(x_max, st.pos[0]);
      }
      max_drift = std::max(max_drift, geolab::relative_energy_drift(m, tr) / span);
    }
    max_range = std::max(max_range, x_max - x_min);
  }

  json r = base_report("demo smith");
  r["seed"] = o.seed;
  r["det_samples"] = 10000;
  r["max_det_error"] = max_det_err;
  r["geodesics"] = count;
  r["span"] = {-span, span};
  r["max_x_range"] = max_range;
  r["max_energy_drift_per_s"] = max_drift;
  AssertionLog log;
  log.check_le("det g = -1", max_det_err, 1e-12);
  log.check_le("x-range <= 2 pi", max_range, 2.0 * M_PI + 1e-3);
  log.check_le("energy drift per unit s", max_drift, 1e-7);
  return finish_demo(r, log, o.out);
}

// de Sitter: shooting on the quadric agrees with the closed-form criterion.
int run_demo_pseudosphere(const DemoOpts& o) {
  const auto ps = geolab::models::pseudosphere(2, 1);
  std::mt19937_64 gen(o.seed);
  std::normal_distribution<double> nrm(0.0, 1.0);

  const auto random_point = [&]() {
    for (;;) {
      Vec z(3);
      for (int a = 0; a < 3; ++a) z[a] = nrm(gen);
      const double q = -z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
      if (q > 0.05) return Vec(z / std::sqrt(q));
    }
  };

  const int count = 100;
  int agree = 0, false_pos = 0, reachable = 0;
  for (int i = 0; i < count; ++i) {
    Vec P = random_point(), Q = random_point();
    if (std::abs(geolab::desitter_inner(P, Q) + 1.0) < 0.05) {
      --i;
      continue;
    }
    const bool criterion = geolab::desitter_connectable(P, Q);
    geolab::ShootingProblem prob;
    prob.model = ps.embedded;
    prob.p = P;
    prob.q = Q;
    prob.velocity_map = ps.tangent_basis(P);
    prob.v_lo = Vec::Constant(2, -2.0);
    prob.v_hi = Vec::Constant(2, 2.0);
    prob.s_max = 10.0;
    prob.multistart = 6;
    prob.grid_per_axis = 7;
    prob.max_solutions = 1;
    prob.integ.abs_tol = prob.integ.rel_tol = 1e-9;
    const bool found = geolab::shoot_connect(prob).status == geolab::ConnectStatus::Connected;
    if (found == criterion) ++agree;
    if (found && !criterion) ++false_pos;
    if (criterion) ++reachable;
  }

  json r = base_report("demo pseudosphere");
  r["seed"] = o.seed;
  r["pairs"] = count;
  r["reachable_closed_form"] = reachable;
  r["agreement"] = static_cast<double>(agree) / count;
  r["false_positives"] = false_pos;
  AssertionLog log;
  log.check_ge("shooting agrees with closed form", static_cast<double>(agree) / count, 0.99);
  log.check_le("no shooting success where forbidden", false_pos, 0.0);
  return finish_demo(r, log, o.out);
}

// GRW warp e^t: integral criterion divergent toward -inf, convergent toward
// +inf; a causal connection exists and validates.
int run_demo_grw(const DemoOpts& o) {
  geolab::MultiwarpedModel m;
  m.t_lo = -std::numeric_limits<double>::infinity();
  m.t_hi = std::numeric_limits<double>::infinity();
  m.fibers = {geolab::euclidean_fiber(1)};
  m.warp = {[](double t) { return std::exp(t); }};
  m.warp_d = {[](double t) { return std::exp(t); }};
  m.name = "grw-exp";

  const geolab::CriterionReport crit = geolab::check_integral_criterion(m, 1.0);

  geolab::MultiwarpedPoint z, w;
  z.t = 0.0;
  z.fiber = {Vec::Constant(1, 0.0)};
  w.t = 0.8;
  w.fiber = {Vec::Constant(1, 0.4)};
  geolab::MultiwarpSolveOptions opts;
  const geolab::ConnectivityReport rep = geolab::causal_connect(m, z, w, opts);
  const double err =
      rep.solutions.empty() ? std::numeric_limits<double>::infinity() : rep.solutions[0].endpoint_error;

  json r = base_report("demo grw");
  r["seed"] = o.seed;
  r["warp"] = "exp(t)";
  r["toward_lo"] = geolab::to_string(crit.toward_lo[0]);
  r["toward_hi"] = geolab::to_string(crit.toward_hi[0]);
  r["causal_status"] = geolab::to_string(rep.status);
  r["causal_endpoint_error"] = err;
  AssertionLog log;
  log.check_eq("criterion toward -inf", geolab::to_string(crit.toward_lo[0]), "divergent");
  log.check_eq("criterion toward +inf", geolab::to_string(crit.toward_hi[0]), "convergent");
  log.check_eq("causal connection", geolab::to_string(rep.status), "connected");
  log.check_le("causal endpoint error", err, 1e-6);
  return finish_demo(r, log, o.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "geolab: geodesic connectivity laboratory\n\n"
      "Reports are JSON (schema 1) to stdout, or to --out. Exit codes:\n"
      "  0  completed / connection found\n"
      "  2  not-found or unreachable verdict\n"
      "  1  error (message on stderr)\n\n"
      "Points are comma-separated chart coordinates (--p 0.1,0.2). Multiwarped\n"
      "points are 't;fiber1;fiber2;...' with one comma-separated block per\n"
      "fiber (--z '0;0.3,0.4;1.2'). Stationary chart points put t first.\n\n"
      "CSV outputs (--csv):\n"
      "  integrate          s, x_0..x_{d-1}, v_0..v_{d-1}[, energy]\n"
      "  raster             i_0..i_{d-1}, c_0..c_{d-1}, hit\n"
      "  convexity connect  k, x_0..x_{d-1}  (path nodes, endpoints included)\n"};
  app.require_subcommand(1);
  int rc = 0;

  // integrate
  {
    auto o = std::make_shared<IntegrateOpts>();
    CLI::App* c = app.add_subcommand("integrate", "Integrate one geodesic and report the endpoint");
    c->add_option("--model", o->model, "Model JSON file")->required();
    c->add_option("--x0", o->x0, "Initial chart point")->required();
    c->add_option("--v0", o->v0, "Initial chart velocity")->required();
    c->add_option("--s-max", o->s_end, "Target affine parameter (negative integrates backward)");
    c->add_option("--tol", o->tol, "Integrator abs/rel tolerance (default 1e-10)");
    c->add_option("--fixed-step", o->fixed_step, "Use plain RK4 at this step size");
    c->add_option("--csv", o->csv, "Write the trajectory as CSV to this file");
    c->add_option("--out", o->out, "Write the JSON report here instead of stdout");
    c->callback([o, &rc] { rc = run_integrate(*o); });
  }

  // connect
  {
    auto o = std::make_shared<ConnectOpts>();
    CLI::App* c = app.add_subcommand("connect", "Multistart shooting between two chart points");
    c->add_option("--model", o->model, "Model JSON file")->required();
    c->add_option("--p", o->p, "Start point")->required();
    c->add_option("--q", o->q, "Target point")->required();
    c->add_option("--s-max", o->s_max, "Largest affine parameter searched");
    c->add_option("--tol", o->tol, "Endpoint tolerance");
    c->add_option("--v-lo", o->v_lo, "Velocity box lower corner (default auto)");
    c->add_option("--v-hi", o->v_hi, "Velocity box upper corner (default auto)");
    c->add_option("--multistart", o->multistart, "Candidates refined from the coarse grid");
    c->add_option("--grid", o->grid, "Coarse grid resolution per velocity axis (0 = auto)");
    c->add_option("--max-winding", o->max_winding, "Lattice lifts per periodic axis");
    c->add_option("--max-solutions", o->max_solutions, "Stop after this many solutions (0 = all)");
    c->add_option("--out", o->out, "Write the JSON report here instead of stdout");
    c->callback([o, &rc] { rc = run_connect(*o); });
  }

  // raster
  {
    auto o = std::make_shared<RasterOpts>();
    CLI::App* c = app.add_subcommand("raster", "Reachability raster of the exponential map");
    c->add_option("--model", o->model, "Model JSON file")->required();
    c->add_option("--p", o->p, "Base point")->required();
    c->add_option("--directions", o->directions, "Velocity sphere samples");
    c->add_option("--s-max", o->s_max, "Parameter span per direction");
    c->add_option("--cell", o->cell, "Raster cell size");
    c->add_option("--lo", o->lo, "Box lower corner (default p - s_max)");
    c->add_option("--hi", o->hi, "Box upper corner (default p + s_max)");
    c->add_option("--tol", o->tol, "Integrator tolerance (default 1e-8)");
    c->add_option("--csv", o->csv, "Write the raster long-format CSV to this file");
    c->add_option("--out", o->out, "Write the JSON report here instead of stdout");
    c->callback([o, &rc] { rc = run_raster(*o); });
  }

  // desitter
  {
    auto o = std::make_shared<DesitterOpts>();
    CLI::App* c = app.add_subcommand("desitter", "Closed-form de Sitter connectivity verdict");
    c->add_option("--p", o->p, "Ambient point on the quadric <P,P> = 1")->required();
    c->add_option("--q", o->q, "Ambient target on the quadric")->required();
    c->add_option("--out", o->out, "Write the JSON report here instead of stdout");
    c->callback([o, &rc] { rc = run_desitter(*o); });
  }

  // multiwarped
  {
    CLI::App* mw = app.add_subcommand("multiwarped", "Multiwarped-product solvers");
    mw->require_subcommand(1);
    auto oc = std::make_shared<MwConnectOpts>();
    CLI::App* c = mw->add_subcommand("connect", "Geodesic connection via the fiber reduction");
    c->add_option("--model", oc->model, "Multiwarped model JSON file")->required();
    c->add_option("--z", oc->z, "Start point 't;fiber;...'")->required();
    c->add_option("--w", oc->w, "Target point 't;fiber;...'")->required();
    c->add_option("--max-winding", oc->max_winding, "Fiber geodesic enumeration depth");
    c->add_option("--tol", oc->tol, "Endpoint tolerance");
    c->add_option("--grid", oc->grid, "Simplex scan resolution");
    c->add_option("--max-combos", oc->max_combos, "Fiber combination budget");
    c->add_option("--length-cap", oc->length_cap, "Fiber length cap (0 = auto)");
    c->add_option("--out", oc->out, "Write the JSON report here instead of stdout");
    c->callback([oc, &rc] { rc = run_mw_connect(*oc, false); });

    auto oq = std::make_shared<MwConnectOpts>();
    CLI::App* q = mw->add_subcommand("causal", "Causal (K >= 0) connection search");
    q->add_option("--model", oq->model, "Multiwarped model JSON file")->required();
    q->add_option("--z", oq->z, "Start point 't;fiber;...'")->required();
    q->add_option("--w", oq->w, "Target point 't;fiber;...'")->required();
    q->add_option("--max-winding", oq->max_winding, "Fiber geodesic enumeration depth");
    q->add_option("--tol", oq->tol, "Endpoint tolerance");
    q->add_option("--grid", oq->grid, "Simplex scan resolution");
    q->add_option("--max-combos", oq->max_combos, "Fiber combination budget");
    q->add_option("--length-cap", oq->length_cap, "Fiber length cap (0 = auto)");
    q->add_option("--out", oq->out, "Write the JSON report here instead of stdout");
    q->callback([oq, &rc] { rc = run_mw_connect(*oq, true); });

    auto ok = std::make_shared<MwCriterionOpts>();
    CLI::App* k = mw->add_subcommand("criterion", "Endpoint integral criterion per fiber");
    k->add_option("--model", ok->model, "Multiwarped model JSON file")->required();
    k->add_option("--c-probe", ok->c_probe, "Probe constant c > 0");
    k->add_option("--out", ok->out, "Write the JSON report here instead of stdout");
    k->callback([ok, &rc] { rc = run_mw_criterion(*ok); });
  }

  // convexity
  {
    CLI::App* cv = app.add_subcommand("convexity", "Boundary convexity tools on {phi > 0}");
    cv->require_subcommand(1);

    auto oc = std::make_shared<CvxClassifyOpts>();
    CLI::App* c = cv->add_subcommand("classify", "Classify boundary points by the Hessian form");
    c->add_option("--domain", oc->domain, "Domain JSON file (model + phi)")->required();
    c->add_option("--points", oc->points, "Seed points 'x,y;x,y;...' (projected to phi = 0)");
    c->add_option("--lo", oc->lo, "Sampling box lower corner (with --samples)");
    c->add_option("--hi", oc->hi, "Sampling box upper corner");
    c->add_option("--samples", oc->samples, "Random seeds when --points is absent");
    c->add_option("--directions", oc->directions, "Tangent directions per point");
    c->add_option("--tie-tol", oc->tie_tol, "Margin band treated as zero");
    c->add_option("--seed", oc->seed, "Sampling seed");
    c->add_option("--out", oc->out, "Write the JSON report here instead of stdout");
    c->callback([oc, &rc] { rc = run_cvx_classify(*oc); });

    auto oa = std::make_shared<CvxAuditOpts>();
    CLI::App* a = cv->add_subcommand("audit", "Hypothesis audit on interior level sets");
    a->add_option("--domain", oa->domain, "Domain JSON file (model + phi)")->required();
    a->add_option("--points", oa->points, "Seed points 'x,y;x,y;...'");
    a->add_option("--lo", oa->lo, "Sampling box lower corner (with --samples)");
    a->add_option("--hi", oa->hi, "Sampling box upper corner");
    a->add_option("--samples", oa->samples, "Random seeds when --points is absent");
    a->add_option("--levels", oa->levels, "Interior levels 'a1,a2,...' (default ladder)");
    a->add_option("--directions", oa->directions, "Directions per sample");
    a->add_option("--seed", oa->seed, "Sampling seed");
    a->add_option("--out", oa->out, "Write the JSON report here instead of stdout");
    a->callback([oa, &rc] { rc = run_cvx_audit(*oa); });

    auto on = std::make_shared<CvxConnectOpts>();
    CLI::App* n = cv->add_subcommand("connect", "Penalized-action connector inside the domain");
    n->add_option("--domain", on->domain, "Domain JSON file (model + phi)")->required();
    n->add_option("--p", on->p, "Start point (inside)")->required();
    n->add_option("--q", on->q, "Target point (inside)")->required();
    n->add_option("--n-nodes", on->n_nodes, "Interior path nodes");
    n->add_option("--eps0", on->eps0, "First barrier weight (0 = automatic schedule)");
    n->add_option("--stages", on->stages, "Barrier stages (eps0 / 4^k)");
    n->add_option("--max-iter", on->max_iter, "Optimizer iterations per stage");
    n->add_option("--grad-tol", on->grad_tol, "Stage convergence tolerance");
    n->add_option("--winding", on->winding, "Polar-arc seed winding count (2-D only)");
    n->add_option("--center", on->center, "Winding center (default origin)");
    n->add_option("--csv", on->csv, "Write the final path nodes as CSV to this file");
    n->add_option("--out", on->out, "Write the JSON report here instead of stdout");
    n->callback([on, &rc] { rc = run_cvx_connect(*on); });
  }

  // stationary
  {
    CLI::App* st = app.add_subcommand("stationary", "Stationary-chart diagnostics");
    st->require_subcommand(1);

    auto os = std::make_shared<StSplitOpts>();
    CLI::App* s = st->add_subcommand("split", "Action split along a discrete chord");
    s->add_option("--model", os->model, "Stationary model JSON file")->required();
    s->add_option("--p", os->p, "Start chart point (t first)")->required();
    s->add_option("--q", os->q, "End chart point (t first)")->required();
    s->add_option("--n-nodes", os->n_nodes, "Interior nodes on the chord");
    s->add_option("--out", os->out, "Write the JSON report here instead of stdout");
    s->callback([os, &rc] { rc = run_st_split(*os); });

    auto oa = std::make_shared<StAuditOpts>();
    CLI::App* a = st->add_subcommand("audit", "Lapse bounds and shift growth over a spatial box");
    a->add_option("--model", oa->model, "Stationary model JSON file")->required();
    a->add_option("--lo", oa->lo, "Spatial box lower corner")->required();
    a->add_option("--hi", oa->hi, "Spatial box upper corner")->required();
    a->add_option("--p0", oa->p0, "Growth base point (default box center)");
    a->add_option("--per-axis", oa->per_axis, "Grid nodes per axis");
    a->add_option("--out", oa->out, "Write the JSON report here instead of stdout");
    a->callback([oa, &rc] { rc = run_st_audit(*oa); });
  }

  // demo
  {
    CLI::App* dm = app.add_subcommand("demo", "Seeded reproductions with built-in assertions");
    dm->require_subcommand(1);
    const struct {
      const char* name;
      const char* blurb;
      int (*fn)(const DemoOpts&);
    } demos[] = {
        {"bates", "Affine torus whose geodesics stay in an x-strip of length <= 2 pi",
         run_demo_bates},
        {"smith", "Lorentzian torus: det g = -1, bounded x-projection, conserved energy",
         run_demo_smith},
        {"pseudosphere", "Shooting vs the closed-form de Sitter criterion", run_demo_pseudosphere},
        {"grw", "Warp exp(t): integral criterion verdicts and a causal connection", run_demo_grw},
    };
    for (const auto& d : demos) {
      auto o = std::make_shared<DemoOpts>();
      CLI::App* c = dm->add_subcommand(d.name, d.blurb);
      c->add_option("--seed", o->seed, "Sampling seed");
      c->add_option("--out", o->out, "Write the JSON report here instead of stdout");
      auto fn = d.fn;
      c->callback([o, fn, &rc] { rc = fn(*o); });
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
