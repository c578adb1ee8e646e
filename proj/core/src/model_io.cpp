#include "geolab/model_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geolab/expr.hpp"
#include "json.hpp"

namespace geolab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error("model file: " + msg); }

const json& need(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) fail(std::string("missing field '") + field + "'");
  return *it;
}

int need_int(const json& j, const char* field) {
  const json& v = need(j, field);
  if (!v.is_number_integer()) fail(std::string("field '") + field + "' must be an integer");
  return v.get<int>();
}

std::string instance_label(const json& j, const std::string& fallback) {
  const auto it = j.find("label");
  if (it == j.end()) return fallback;
  if (!it->is_string()) fail("field 'label' must be a string");
  return it->get<std::string>();
}

Expr parse_expr(const json& v, const std::string& field, const std::vector<std::string>& vars) {
  if (!v.is_string()) fail("field '" + field + "' must be an expression string");
  try {
    return Expr::parse(v.get<std::string>(), vars);
  } catch (const ExprError& e) {
    fail("field '" + field + "': " + e.what());
  }
}

std::vector<std::string> coord_names(int dim, bool time_first) {
  std::vector<std::string> names;
  int k = 1;
  if (time_first) {
    names.push_back("t");
    --dim;
  }
  for (; k <= dim; ++k) names.push_back("x" + std::to_string(k));
  return names;
}

// interval endpoint: a number, or the strings "inf" / "-inf"
double endpoint(const json& v, const char* field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(std::string("field '") + field + "' entries must be numbers or \"inf\"/\"-inf\"");
}

LoadedModel parse_model_json(const json& j);

LoadedModel parse_flat(const json& j) {
  LoadedModel out;
  const int dim = need_int(j, "dim");
  if (dim < 1) fail("field 'dim' must be positive");
  const int index = j.value("index", 0);
  if (index < 0 || index > dim) fail("field 'index' must lie in [0, dim]");
  out.geometry = models::flat(dim, index);
  out.name = instance_label(j, out.geometry.name);
  out.geometry.name = out.name;
  out.coordinates = coord_names(dim, false);
  return out;
}

LoadedModel parse_pseudosphere(const json& j) {
  LoadedModel out;
  const int n = need_int(j, "n");
  const int nu = need_int(j, "nu");
  if (n < 1) fail("field 'n' must be positive");
  if (nu < 0 || nu > n) fail("field 'nu' must lie in [0, n]");
  out.kind = ModelKind::Pseudosphere;
  out.pseudosphere = models::pseudosphere(n, nu);
  out.geometry = out.pseudosphere->chart;
  out.name = instance_label(j, out.geometry.name);
  out.geometry.name = out.name;
  out.coordinates = coord_names(n, false);
  return out;
}

LoadedModel parse_diagonal(const json& j) {
  LoadedModel out;
  const json& cj = need(j, "coeffs");
  if (!cj.is_array() || cj.empty()) fail("field 'coeffs' must be a non-empty array");
  const int dim = static_cast<int>(cj.size());
  const std::vector<std::string> vars = coord_names(dim, false);
  std::vector<Expr> coeffs;
  for (int i = 0; i < dim; ++i)
    coeffs.push_back(parse_expr(cj[static_cast<std::size_t>(i)],
                                "coeffs[" + std::to_string(i) + "]", vars));
  const int index = j.value("index", 0);
  if (index < 0 || index > dim) fail("field 'index' must lie in [0, dim]");

  GeometryModel g;
  g.dim = dim;
  g.index = index;
  g.metric = [coeffs, dim](const Vec& x) {
    Mat G = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) G(i, i) = coeffs[static_cast<std::size_t>(i)].eval(x.data(), dim);
    return G;
  };
  if (j.contains("domain")) {
    const Expr dexpr = parse_expr(j["domain"], "domain", vars);
    g.domain = [dexpr, dim](const Vec& x) { return dexpr.eval(x.data(), dim) > 0.0; };
  }
  if (j.contains("periods")) {
    const json& pj = j["periods"];
    if (!pj.is_array() || static_cast<int>(pj.size()) != dim)
      fail("field 'periods' must be an array of length dim");
    for (const json& v : pj) {
      if (!v.is_number()) fail("field 'periods' entries must be numbers");
      g.periods.push_back(v.get<double>());
    }
  }
  out.name = instance_label(j, "diagonal");
  g.name = out.name;
  out.geometry = g;
  out.coordinates = vars;
  return out;
}

FiberOracle parse_fiber(const json& j, int i) {
  const std::string ctx = "fibers[" + std::to_string(i) + "]";
  if (!j.is_object()) fail(ctx + " must be an object");
  const json& tj = need(j, "type");
  if (!tj.is_string()) fail(ctx + ".type must be a string");
  const std::string type = tj.get<std::string>();
  if (type == "euclidean") {
    const int dim = need_int(j, "dim");
    if (dim < 1) fail(ctx + ".dim must be positive");
    return euclidean_fiber(dim);
  }
  if (type == "circle") return circle_fiber(j.value("radius", 1.0));
  if (type == "torus") {
    const json& pj = need(j, "periods");
    if (!pj.is_array() || pj.empty()) fail(ctx + ".periods must be a non-empty array");
    std::vector<double> periods;
    for (const json& v : pj) {
      if (!v.is_number()) fail(ctx + ".periods entries must be numbers");
      periods.push_back(v.get<double>());
    }
    return torus_fiber(periods);
  }
  if (type == "sphere") return sphere_fiber();
  fail(ctx + ".type '" + type + "' unknown (euclidean, circle, torus, sphere)");
}

LoadedModel parse_multiwarped(const json& j) {
  LoadedModel out;
  MultiwarpedModel mw;
  const json& ij = need(j, "interval");
  if (!ij.is_array() || ij.size() != 2) fail("field 'interval' must be [lo, hi]");
  mw.t_lo = endpoint(ij[0], "interval");
  mw.t_hi = endpoint(ij[1], "interval");
  if (!(mw.t_lo < mw.t_hi)) fail("field 'interval' must be increasing");

  const json& fj = need(j, "fibers");
  if (!fj.is_array() || fj.empty()) fail("field 'fibers' must be a non-empty array");
  for (int i = 0; i < static_cast<int>(fj.size()); ++i)
    mw.fibers.push_back(parse_fiber(fj[static_cast<std::size_t>(i)], i));

  const json& wj = need(j, "warps");
  if (!wj.is_array() || wj.size() != fj.size())
    fail("field 'warps' must be an array matching 'fibers'");
  const std::vector<std::string> tvar = {"t"};
  std::vector<Expr> warps;
  for (int i = 0; i < static_cast<int>(wj.size()); ++i)
    warps.push_back(parse_expr(wj[static_cast<std::size_t>(i)],
                               "warps[" + std::to_string(i) + "]", tvar));
  std::vector<Expr> warps_d;
  const bool analytic_d = j.contains("warps_d");
  if (analytic_d) {
    const json& dj = j["warps_d"];
    if (!dj.is_array() || dj.size() != wj.size())
      fail("field 'warps_d' must be an array matching 'warps'");
    for (int i = 0; i < static_cast<int>(dj.size()); ++i)
      warps_d.push_back(parse_expr(dj[static_cast<std::size_t>(i)],
                                   "warps_d[" + std::to_string(i) + "]", tvar));
  }
  for (int i = 0; i < static_cast<int>(warps.size()); ++i) {
    const Expr e = warps[static_cast<std::size_t>(i)];
    mw.warp.push_back([e](double t) { return e(t); });
    if (analytic_d) {
      const Expr de = warps_d[static_cast<std::size_t>(i)];
      mw.warp_d.push_back([de](double t) { return de(t); });
    } else {
      mw.warp_d.push_back([e](double t) {
        const double h = 1e-6 * std::max(1.0, std::abs(t));
        return (e(t - 2 * h) - 8.0 * e(t - h) + 8.0 * e(t + h) - e(t + 2 * h)) / (12.0 * h);
      });
    }
  }
  out.kind = ModelKind::Multiwarped;
  out.name = instance_label(j, "multiwarped");
  mw.name = out.name;
  out.geometry = mw.chart();
  out.multiwarped = std::move(mw);
  out.coordinates = coord_names(out.geometry.dim, true);
  return out;
}

LoadedModel parse_stationary(const json& j) {
  LoadedModel out;
  LoadedModel base = parse_model_json(need(j, "g0"));
  if (base.kind != ModelKind::Geometry || base.geometry.index != 0)
    fail("field 'g0' must be a Riemannian chart model (flat or diagonal with index 0)");
  StationaryModel st;
  st.base = base.geometry;
  const int n = st.base.dim;
  const std::vector<std::string> vars = coord_names(n, false);

  const Expr be = parse_expr(need(j, "beta"), "beta", vars);
  st.beta = [be, n](const Vec& x) { return be.eval(x.data(), n); };

  const json& oj = need(j, "omega");
  if (!oj.is_array() || static_cast<int>(oj.size()) != n)
    fail("field 'omega' must be an array of length dim(g0)");
  std::vector<Expr> oe;
  for (int i = 0; i < n; ++i)
    oe.push_back(parse_expr(oj[static_cast<std::size_t>(i)],
                            "omega[" + std::to_string(i) + "]", vars));
  st.omega = [oe, n](const Vec& x) {
    Vec w(n);
    for (int i = 0; i < n; ++i) w(i) = oe[static_cast<std::size_t>(i)].eval(x.data(), n);
    return w;
  };
  st.base_complete_asserted = j.value("complete", false);
  out.kind = ModelKind::Stationary;
  out.name = instance_label(j, "stationary");
  st.name = out.name;
  out.geometry = st.chart();
  out.stationary = std::move(st);
  out.coordinates = coord_names(n + 1, true);
  return out;
}

LoadedModel parse_model_json(const json& j) {
  if (!j.is_object()) fail("root must be an object {\"name\": ..., params}");
  const json& nj = need(j, "name");
  if (!nj.is_string()) fail("field 'name' must be a string");
  const std::string name = nj.get<std::string>();
  if (name == "flat") return parse_flat(j);
  if (name == "pseudosphere") return parse_pseudosphere(j);
  if (name == "bates-torus") {
    LoadedModel out;
    out.geometry = models::bates_torus();
    out.name = instance_label(j, out.geometry.name);
    out.geometry.name = out.name;
    out.coordinates = coord_names(2, false);
    return out;
  }
  if (name == "smith-torus") {
    LoadedModel out;
    out.geometry = models::smith_torus();
    out.name = instance_label(j, out.geometry.name);
    out.geometry.name = out.name;
    out.coordinates = coord_names(2, false);
    return out;
  }
  if (name == "diagonal") return parse_diagonal(j);
  if (name == "multiwarped") return parse_multiwarped(j);
  if (name == "stationary") return parse_stationary(j);
  fail("unknown model kind '" + name +
       "' (flat, pseudosphere, bates-torus, smith-torus, diagonal, multiwarped, stationary)");
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string(what) + ": invalid JSON: " + e.what());
  }
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string(what) + ": cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

LoadedDomain parse_domain_json(const json& j, const std::optional<std::string>& base_dir) {
  if (!j.is_object()) fail("domain root must be an object {\"model\": ..., \"phi\": ...}");
  const json& mj = need(j, "model");
  LoadedDomain out;
  if (mj.is_string()) {
    if (!base_dir)
      fail("field 'model' is a path string; use load_domain so it can be resolved");
    std::filesystem::path p(mj.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(*base_dir) / p;
    out.model = load_model(p.string());
  } else {
    out.model = parse_model_json(mj);
  }
  const Expr pe = parse_expr(need(j, "phi"), "phi", out.model.coordinates);
  out.phi_text = pe.text();
  out.domain.ambient = out.model.geometry;
  const int dim = out.model.geometry.dim;
  out.domain.phi = [pe, dim](const Vec& x) { return pe.eval(x.data(), dim); };
  return out;
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Geometry: return "geometry";
    case ModelKind::Pseudosphere: return "pseudosphere";
    case ModelKind::Multiwarped: return "multiwarped";
    case ModelKind::Stationary: return "stationary";
  }
  return "?";
}

LoadedModel parse_model(const std::string& json_text) {
  try {
    return parse_model_json(parse_text(json_text, "model file"));
  } catch (const json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

LoadedModel load_model(const std::string& path) {
  try {
    return parse_model_json(parse_text(read_file(path, "model file"), "model file"));
  } catch (const json::exception& e) {
    throw Error("model file '" + path + "': " + e.what());
  }
}

LoadedDomain parse_domain(const std::string& json_text) {
  try {
    return parse_domain_json(parse_text(json_text, "domain file"), std::nullopt);
  } catch (const json::exception& e) {
    throw Error(std::string("domain file: ") + e.what());
  }
}

LoadedDomain load_domain(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  try {
    return parse_domain_json(parse_text(read_file(path, "domain file"), "domain file"),
                             dir.empty() ? std::string(".") : dir);
  } catch (const json::exception& e) {
    throw Error("domain file '" + path + "': " + e.what());
  }
}

}  // namespace geolab
