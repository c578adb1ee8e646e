#pragma once
// Model and domain files (JSON syntax).
//
// A model file is an object {"name": <kind>, ...params}; scalar functions
// are expression strings (see expr.hpp for the grammar). Kinds:
//   flat          {dim, index=0}
//   pseudosphere  {n, nu}
//   bates-torus   {}
//   smith-torus   {}
//   diagonal      {coeffs: [expr...], index=0, periods?, domain?: expr > 0}
//   multiwarped   {interval: [lo, hi] (numbers or "inf"/"-inf"),
//                  fibers: [{type: euclidean|circle|torus|sphere, ...}...],
//                  warps: [expr over t...], warps_d?: [expr...]}
//   stationary    {g0: <nested Riemannian model>, beta: expr,
//                  omega: [expr...], complete=false}
// Every kind accepts an optional "label" naming the instance.
//
// Expression variables: chart coordinates are x1..xd; charts whose first
// coordinate is time (multiwarped, stationary) use t, x1..x_{d-1}. The
// beta/omega expressions of a stationary model range over the spatial
// coordinates x1..xn only.
//
// A domain file is {"model": <model object, or a path string relative to the
// domain file>, "phi": <expr over the model's chart coordinates>}; the
// domain is {phi > 0} with boundary {phi = 0}.

#include <optional>
#include <string>
#include <vector>

#include "geolab/convexity.hpp"
#include "geolab/geometry.hpp"
#include "geolab/models.hpp"
#include "geolab/multiwarp.hpp"
#include "geolab/stationary.hpp"

namespace geolab {

enum class ModelKind { Geometry, Pseudosphere, Multiwarped, Stationary };

std::string to_string(ModelKind k);

// One parsed model file. `geometry` always carries the chart, whatever the
// kind, so generic consumers (integration, shooting) need not dispatch; the
// optionals keep the richer structure for kind-specific front ends.
struct LoadedModel {
  ModelKind kind = ModelKind::Geometry;
  std::string name;
  GeometryModel geometry;
  std::optional<models::Pseudosphere> pseudosphere;
  std::optional<MultiwarpedModel> multiwarped;
  std::optional<StationaryModel> stationary;
  std::vector<std::string> coordinates;  // expression variable names, chart order
};

// Throws Error with a message naming the offending field.
LoadedModel parse_model(const std::string& json_text);
LoadedModel load_model(const std::string& path);

struct LoadedDomain {
  LoadedModel model;
  DomainSpec domain;  // ambient = model.geometry, phi from the file
  std::string phi_text;
};

// parse_domain requires an inline model object ("model" as a path string
// needs the file location and is only available through load_domain).
LoadedDomain parse_domain(const std::string& json_text);
LoadedDomain load_domain(const std::string& path);

}  // namespace geolab
