#include "ferro/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ferro/log.hpp"

namespace ferro {

namespace {

std::string out_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output.directory) / name).string();
}

void prepare_output(const RunConfig& c) {
  if (c.output.directory.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(c.output.directory, ec);
  if (ec) throw OutputError("cannot create output directory '" + c.output.directory + "': " + ec.message());
}

LoadProgram make_program(const RunConfig& c) {
  LoadProgram p;
  p.factors = c.factors.empty() ? uniform_factors(c.steps) : c.factors;
  p.max_bisections = c.max_bisections;
  p.thermodynamic_checks = true;
  return p;
}

struct Box {
  Vec3 lo, hi;
};

Box bounding_box(const Mesh& mesh) {
  Box b{mesh.vertex(0), mesh.vertex(0)};
  for (const Vec3& v : mesh.vertices()) {
    b.lo = b.lo.cwiseMin(v);
    b.hi = b.hi.cwiseMax(v);
  }
  return b;
}

double region_area(const Mesh& mesh, const std::string& tag) {
  double a = 0.0;
  for (int f : mesh.region_faces(tag)) a += mesh.face(f).area;
  return a;
}

std::shared_ptr<const Mesh> require_regions(std::shared_ptr<const Mesh> mesh,
                                            std::initializer_list<const char*> tags) {
  for (const char* t : tags)
    if (!mesh->has_region(t))
      throw ConfigError(std::string("mesh lacks the boundary region '") + t + "'");
  return mesh;
}

StepCallback step_logger(const RunConfig& c, const Discretization& disc, const Material& mat,
                         int nsteps) {
  const bool vtk = !c.output.directory.empty() && c.output.vtk;
  return [&c, &disc, &mat, nsteps, vtk](const StepRecord& r, const SystemState& s) {
    log(LogLevel::Info, "step ", r.step, "/", nsteps, " lambda=", r.lambda, " iterations=", r.iterations,
        " residual=", r.residual, " substeps=", r.substeps);
    if (r.dissipation < 0.0 || r.potential > 0.0)
      log(LogLevel::Warn, "step ", r.step, ": dissipation ", r.dissipation, " J, incremental potential ",
          r.potential, " J");
    if (vtk && (r.step % c.output.vtk_every == 0 || r.step == nsteps)) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%04d.vtk", r.step);
      save_vtk(out_path(c, name), disc, mat, s.x, "step " + std::to_string(r.step));
    }
  };
}

void write_initial_vtk(const RunConfig& c, const Discretization& disc, const Material& mat,
                       const Eigen::VectorXd& x) {
  if (!c.output.directory.empty() && c.output.vtk)
    save_vtk(out_path(c, "step_0000.vtk"), disc, mat, x, "initial state");
}

}  // namespace

std::vector<Vec3> point_history(const RunConfig& c) {
  const Vec3 axis = c.point.axis.normalized();
  std::vector<Vec3> h;
  if (!c.point.history.empty()) {
    for (double e : c.point.history) h.push_back(e * axis);
    return h;
  }
  const double A = c.point.amplitude_ratio * c.material.E0;
  const int q = c.point.steps_per_quarter;
  for (int cyc = 0; cyc < c.point.cycles; ++cyc) {
    for (int i = 1; i <= q; ++i) h.push_back(A * i / q * axis);           // 0 -> A
    for (int i = q - 1; i >= -q; --i) h.push_back(A * i / q * axis);      // A -> -A
    for (int i = -q + 1; i <= 0; ++i) h.push_back(A * i / q * axis);      // -A -> 0
  }
  return h;
}

std::vector<PointResult> scenario_point(const RunConfig& c) {
  c.validate();
  const Material mat(c.material);
  const Vec3 axis = c.point.axis.normalized();
  const auto res = run_pointwise_driver(mat, point_history(c), c.point.stress_free);
  if (!c.output.directory.empty()) {
    prepare_output(c);
    // a unit vector normal to the axis for the transverse strain
    const Vec3 t = std::abs(axis.x()) < 0.9 ? axis.cross(Vec3::UnitX()).normalized()
                                             : axis.cross(Vec3::UnitY()).normalized();
    CsvTable de{{"E_V_per_m", "D_C_per_m2", "Pi_C_per_m2", "newton_iterations"}, {}};
    CsvTable se{{"E_V_per_m", "S_axial", "S_transverse"}, {}};
    for (const auto& r : res) {
      de.add_row({r.Evec.dot(axis), r.D.dot(axis), r.Pi.dot(axis), double(r.iterations)});
      se.add_row({r.Evec.dot(axis), axis.dot(r.S * axis), t.dot(r.S * t)});
    }
    save_csv(out_path(c, "de_curve.csv"), de);
    save_csv(out_path(c, "se_curve.csv"), se);
  }
  return res;
}

RepolingSetup repoling_setup(const RunConfig& c) {
  c.validate();
  RepolingSetup s;
  const double L = c.repoling.edge;
  const int n = c.repoling.cells;
  s.mesh = require_regions(
      c.mesh_file.empty() ? std::make_shared<Mesh>(box_mesh(Vec3::Zero(), Vec3(L, L, L), {n, n, n}))
                          : std::make_shared<Mesh>(load_mesh(c.mesh_file)),
      {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"});
  const Box box = bounding_box(*s.mesh);
  const Vec3 ext = box.hi - box.lo;

  auto mat = std::make_shared<Material>(c.material);
  s.material = mat;
  const MaterialParams& p = c.material;

  // 3-2-1 supports: the cube is otherwise free
  BoundarySetup bc;
  bc.insulated = {"xmin", "xmax", "ymin", "ymax"};
  bc.fixed_points = {{box.lo, {true, true, true}},
                     {box.lo + Vec3(ext.x(), 0, 0), {false, true, true}},
                     {box.lo + Vec3(0, ext.y(), 0), {false, false, true}}};
  s.disc = std::make_shared<Discretization>(*s.mesh, c.order, bc, c.variant);

  const double pr = remanent_polarization(*mat, 2.0 * p.E0, c.repoling.poling_steps, true);
  const double th = c.repoling.theta_deg * std::numbers::pi / 180.0;
  s.pi0 = pr * Vec3(std::sin(th), 0.0, std::cos(th));
  log(LogLevel::Info, "initial remanent polarization ", pr, " C/m^2 at ", c.repoling.theta_deg, " deg");

  // E = -grad phi: the field points along +z for a negative top potential
  s.loads.electrodes = {{"zmin", 0.0}, {"zmax", -c.repoling.field_ratio * p.E0 * ext.z()}};
  const Vec3 pi0 = s.pi0;
  s.loads.surface_charge = [pi0](const Vec3&, const Vec3& nrm) { return pi0.dot(nrm); };

  const Discretization& disc = *s.disc;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(disc.num_dofs());
  disc.set_field(x, Field::D, interpolate_hdiv(disc.space(Field::D), [&](const Vec3&) { return pi0; }));
  disc.set_field(x, Field::Pi, project(disc.space(Field::Pi), VectorFunction([&](const Vec3&) { return pi0; })));

  // displacement of the remanent strain with Pi held fixed
  BoundarySetup frozen = bc;
  frozen.freeze_polarization = true;
  const Discretization fd(*s.mesh, c.order, frozen, c.variant);
  SystemState st{x, x, 0.0};
  const NewtonReport rep = newton_step_solve(fd, *mat, s.loads, st, c.newton);
  log(LogLevel::Info, "frozen-polarization initial solve: ", rep.iterations, " iterations");
  s.initial = st.x;
  return s;
}

FieldRun scenario_repoling_cube(const RunConfig& c) {
  prepare_output(c);
  RepolingSetup s = repoling_setup(c);
  FieldRun run;
  run.mesh = s.mesh;
  run.disc = s.disc;
  run.material = s.material;
  run.loads = s.loads;
  run.initial_polarization = s.pi0;
  const Discretization& disc = *s.disc;

  const LoadProgram prog = make_program(c);
  write_initial_vtk(c, disc, *s.material, s.initial);
  run.history = run_load_program(disc, *s.material, s.loads, s.initial, prog, c.newton,
                                 step_logger(c, disc, *s.material, int(prog.factors.size())));

  const double area = region_area(*s.mesh, "zmax");
  const double q0 = region_charge(disc, s.initial, "zmax");
  run.curve.header = {"E_over_E0", "dD_z_C_per_m2"};
  run.curve.add_row({0.0, 0.0});
  for (size_t i = 0; i < run.history.steps.size(); ++i) {
    const double q = region_charge(disc, run.history.states[i + 1], "zmax");
    run.curve.add_row({run.history.steps[i].lambda * c.repoling.field_ratio, (q - q0) / area});
  }
  return run;
}

double max_polarization(const Discretization& disc, const Eigen::VectorXd& x, int* element) {
  static const Vec3 corners[4] = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  const FESpace& P = disc.space(Field::Pi);
  const Eigen::VectorXd pi = disc.field(x, Field::Pi);
  double best = -1.0;
  for (int e = 0; e < disc.mesh().num_elements(); ++e)
    for (const Vec3& r : corners) {
      const double v = evaluate_field(P, pi, e, r).norm();
      if (v > best) {
        best = v;
        if (element) *element = e;
      }
    }
  return best;
}

FieldRun scenario_hole_plate(const RunConfig& c) {
  c.validate();
  prepare_output(c);
  FieldRun run;
  run.mesh = require_regions(c.mesh_file.empty()
                                 ? std::make_shared<Mesh>(hole_plate_mesh(c.hole_plate.geometry))
                                 : std::make_shared<Mesh>(load_mesh(c.mesh_file)),
                             {"xmin", "ymin", "zmin", "xmax", "ymax", "zmax", "hole"});
  // symmetry planes x = 0 and z = 0 are mirror planes (u.n = 0, D.n = 0); the
  // field runs along y, so y = 0 is the mid-potential equipotential with u_y = 0
  BoundarySetup bc;
  bc.fixed = {{"xmin", {true, false, false}}, {"ymin", {false, true, false}}, {"zmin", {false, false, true}}};
  bc.insulated = {"xmin", "zmin", "xmax", "zmax", "hole"};
  run.disc = std::make_shared<Discretization>(*run.mesh, c.order, bc, c.variant);
  run.material = std::make_shared<Material>(c.material);
  const Discretization& disc = *run.disc;

  const double vmax = c.hole_plate.voltages.back();
  run.loads.electrodes = {{"ymin", 0.0}, {"ymax", -0.5 * vmax}};
  LoadProgram prog;
  for (double v : c.hole_plate.voltages) prog.factors.push_back(v / vmax);
  prog.factors.back() = 1.0;
  prog.max_bisections = c.max_bisections;
  prog.thermodynamic_checks = true;

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(disc.num_dofs());
  write_initial_vtk(c, disc, *run.material, x0);
  run.history = run_load_program(disc, *run.material, run.loads, x0, prog, c.newton,
                                 step_logger(c, disc, *run.material, int(prog.factors.size())));

  run.curve.header = {"voltage_V", "max_Pi_C_per_m2", "charge_C"};
  run.curve.add_row({0.0, 0.0, 0.0});
  for (size_t i = 0; i < run.history.steps.size(); ++i) {
    const Eigen::VectorXd& x = run.history.states[i + 1];
    // one eighth of the specimen: the full electrode carries 4 times the charge
    run.curve.add_row({run.history.steps[i].lambda * vmax, max_polarization(disc, x),
                       4.0 * region_charge(disc, x, "ymax")});
  }
  return run;
}

void run_scenario(const RunConfig& c) {
  log(LogLevel::Info, "scenario ", scenario_name(c.scenario), ", k = ", c.order, ", linear solver ",
      linear_solver_name());
  if (c.scenario == Scenario::Point) {
    const auto res = scenario_point(c);
    log(LogLevel::Info, "point driver: ", res.size(), " steps");
    return;
  }
  const FieldRun run =
      c.scenario == Scenario::RepolingCube ? scenario_repoling_cube(c) : scenario_hole_plate(c);
  if (!c.output.directory.empty()) {
    save_csv(out_path(c, "curve.csv"), run.curve);
    std::ofstream f(out_path(c, "newton_log.csv"));
    if (!f) throw OutputError("cannot write newton_log.csv");
    write_newton_log(f, run.history.steps);
  }
}

}  // namespace ferro
