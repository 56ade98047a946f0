#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ferro/scenarios.hpp"

namespace ferro {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so that typos do not silently fall back to
// defaults.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void get(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

Vec3 get_vec3(const json& obj, const char* key, const Vec3& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  std::vector<double> v;
  get(obj, key, v, where);
  if (v.size() != 3) throw ConfigError(where + "." + key + ": expected 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

void parse_material(const json& j, MaterialParams& p) {
  const std::string w = "material";
  check_keys(j, w,
             {"youngs", "poisson", "permittivity", "permittivity_flavor", "d31", "d33", "d15", "E0",
              "P0", "S0", "m", "h0", "hardening", "eps_d", "eps_d_rel", "eps_h", "eps_h_rel",
              "permittivity_mode", "permittivity_unpoled", "permittivity_poled"});
  get(j, "youngs", p.youngs, w);
  get(j, "poisson", p.poisson, w);
  get(j, "permittivity", p.permittivity, w);
  get(j, "d31", p.d31, w);
  get(j, "d33", p.d33, w);
  get(j, "d15", p.d15, w);
  get(j, "E0", p.E0, w);
  get(j, "P0", p.P0, w);
  get(j, "S0", p.S0, w);
  get(j, "m", p.m, w);
  get(j, "h0", p.h0, w);
  get(j, "permittivity_unpoled", p.permittivity_unpoled, w);
  get(j, "permittivity_poled", p.permittivity_poled, w);
  if (j.contains("eps_d") && j.contains("eps_d_rel"))
    throw ConfigError("material: give eps_d or eps_d_rel, not both");
  get(j, "eps_d", p.eps_d, w);
  if (j.contains("eps_d_rel")) {
    double r = 0.0;
    get(j, "eps_d_rel", r, w);
    p.eps_d = r * p.P0;
  } else if (!j.contains("eps_d") && j.contains("P0")) {
    p.eps_d = 1e-4 * p.P0;
  }
  get(j, "eps_h", p.eps_h, w);
  if (j.contains("eps_h_rel")) {
    double r = 0.0;
    get(j, "eps_h_rel", r, w);
    p.eps_h = r * p.P0;
  }
  std::string s;
  if (j.contains("hardening")) {
    get(j, "hardening", s, w);
    if (s == "power") p.law = HardeningLaw::Power;
    else if (s == "log") p.law = HardeningLaw::Log;
    else throw ConfigError("material.hardening: expected power or log, got '" + s + "'");
  }
  if (j.contains("permittivity_flavor")) {
    get(j, "permittivity_flavor", s, w);
    if (s == "strain") p.flavor = PermittivityFlavor::Strain;
    else if (s == "stress") p.flavor = PermittivityFlavor::Stress;
    else throw ConfigError("material.permittivity_flavor: expected strain or stress, got '" + s + "'");
  }
  if (j.contains("permittivity_mode")) {
    get(j, "permittivity_mode", s, w);
    if (s == "constant") p.permittivity_mode = PermittivityMode::Constant;
    else if (s == "interpolated") p.permittivity_mode = PermittivityMode::Interpolated;
    else throw ConfigError("material.permittivity_mode: expected constant or interpolated");
  }
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Point: return "point";
    case Scenario::RepolingCube: return "repoling_cube";
    case Scenario::HolePlate: return "hole_plate";
  }
  return "?";
}

void RunConfig::validate() const {
  if (order < 1 || order > 2) throw ConfigError("order must be 1 or 2");
  if (steps < 1) throw ConfigError("load.steps must be >= 1");
  if (max_bisections < 0) throw ConfigError("load.max_bisections must be >= 0");
  if (output.vtk_every < 1) throw ConfigError("output.vtk_every must be >= 1");
  try {
    material.validate();
    newton.validate();
    if (!factors.empty()) LoadProgram{factors, max_bisections}.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  switch (scenario) {
    case Scenario::Point:
      if (point.history.empty() && (point.steps_per_quarter < 1 || point.cycles < 1 ||
                                    !(point.amplitude_ratio > 0.0)))
        throw ConfigError("point: need a history or positive amplitude, steps and cycles");
      if (!(point.axis.norm() > 0.0)) throw ConfigError("point.axis must be nonzero");
      break;
    case Scenario::RepolingCube:
      if (!(repoling.theta_deg >= 0.0 && repoling.theta_deg <= 180.0))
        throw ConfigError("repoling.theta_deg must lie in [0, 180]");
      if (!(repoling.edge > 0.0) || repoling.cells < 1 || !(repoling.field_ratio > 0.0) ||
          repoling.poling_steps < 1)
        throw ConfigError("repoling: edge, cells, field_ratio and poling_steps must be positive");
      break;
    case Scenario::HolePlate: {
      const auto& g = hole_plate.geometry;
      if (!(g.hole_radius > 0.0 && g.hole_radius < g.half_width) || !(g.half_thickness > 0.0))
        throw ConfigError("hole_plate: need 0 < hole_radius < half_width and half_thickness > 0");
      if (hole_plate.voltages.empty()) throw ConfigError("hole_plate.voltages is empty");
      double prev = 0.0;
      for (double v : hole_plate.voltages) {
        if (!(v > prev)) throw ConfigError("hole_plate.voltages must increase strictly from 0");
        prev = v;
      }
      break;
    }
  }
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"scenario", "mesh", "order", "hdiv", "material", "newton", "load", "output", "point",
              "repoling", "hole_plate"});
  RunConfig c;
  if (!j.contains("scenario")) throw ConfigError("config: missing 'scenario'");
  std::string s;
  get(j, "scenario", s, "config");
  if (s == "point") c.scenario = Scenario::Point;
  else if (s == "repoling_cube") c.scenario = Scenario::RepolingCube;
  else if (s == "hole_plate") c.scenario = Scenario::HolePlate;
  else throw ConfigError("config.scenario: expected point, repoling_cube or hole_plate, got '" + s + "'");

  get(j, "mesh", c.mesh_file, "config");
  get(j, "order", c.order, "config");
  if (j.contains("hdiv")) {
    get(j, "hdiv", s, "config");
    if (s == "reduced") c.variant = HdivVariant::Reduced;
    else if (s == "full") c.variant = HdivVariant::Full;
    else throw ConfigError("config.hdiv: expected reduced or full");
  }
  if (j.contains("material")) parse_material(j["material"], c.material);

  if (j.contains("newton")) {
    const json& n = j["newton"];
    check_keys(n, "newton",
               {"max_iterations", "rel_tolerance", "abs_tolerance", "backtrack", "max_backtracks",
                "armijo", "threads"});
    get(n, "max_iterations", c.newton.max_iterations, "newton");
    get(n, "rel_tolerance", c.newton.rel_tolerance, "newton");
    get(n, "abs_tolerance", c.newton.abs_tolerance, "newton");
    get(n, "backtrack", c.newton.backtrack, "newton");
    get(n, "max_backtracks", c.newton.max_backtracks, "newton");
    get(n, "armijo", c.newton.armijo, "newton");
    get(n, "threads", c.newton.threads, "newton");
  }
  if (j.contains("load")) {
    const json& l = j["load"];
    check_keys(l, "load", {"steps", "factors", "max_bisections"});
    get(l, "steps", c.steps, "load");
    get(l, "factors", c.factors, "load");
    get(l, "max_bisections", c.max_bisections, "load");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"directory", "vtk", "vtk_every"});
    get(o, "directory", c.output.directory, "output");
    get(o, "vtk", c.output.vtk, "output");
    get(o, "vtk_every", c.output.vtk_every, "output");
  }
  if (j.contains("point")) {
    const json& p = j["point"];
    check_keys(p, "point", {"axis", "amplitude_ratio", "steps_per_quarter", "cycles", "history", "stress_free"});
    c.point.axis = get_vec3(p, "axis", c.point.axis, "point");
    get(p, "amplitude_ratio", c.point.amplitude_ratio, "point");
    get(p, "steps_per_quarter", c.point.steps_per_quarter, "point");
    get(p, "cycles", c.point.cycles, "point");
    get(p, "history", c.point.history, "point");
    get(p, "stress_free", c.point.stress_free, "point");
  }
  if (j.contains("repoling")) {
    const json& r = j["repoling"];
    check_keys(r, "repoling", {"theta_deg", "edge", "cells", "field_ratio", "poling_steps"});
    get(r, "theta_deg", c.repoling.theta_deg, "repoling");
    get(r, "edge", c.repoling.edge, "repoling");
    get(r, "cells", c.repoling.cells, "repoling");
    get(r, "field_ratio", c.repoling.field_ratio, "repoling");
    get(r, "poling_steps", c.repoling.poling_steps, "repoling");
  }
  if (j.contains("hole_plate")) {
    const json& h = j["hole_plate"];
    check_keys(h, "hole_plate",
               {"half_width", "half_thickness", "hole_radius", "n_angular", "n_radial", "n_layers",
                "grading", "voltages"});
    auto& g = c.hole_plate.geometry;
    get(h, "half_width", g.half_width, "hole_plate");
    get(h, "half_thickness", g.half_thickness, "hole_plate");
    get(h, "hole_radius", g.hole_radius, "hole_plate");
    get(h, "n_angular", g.n_angular, "hole_plate");
    get(h, "n_radial", g.n_radial, "hole_plate");
    get(h, "n_layers", g.n_layers, "hole_plate");
    get(h, "grading", g.grading, "hole_plate");
    get(h, "voltages", c.hole_plate.voltages, "hole_plate");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

}  // namespace ferro
