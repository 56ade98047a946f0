#ifndef FERRO_SCENARIOS_HPP
#define FERRO_SCENARIOS_HPP

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ferro/output.hpp"
#include "ferro/solver.hpp"

namespace ferro {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { Point, RepolingCube, HolePlate };

/// Homogeneous-field hysteresis: either an explicit field history along
/// `axis` or `cycles` full cycles 0 -> +A -> -A -> 0 with A = amplitude_ratio E0.
struct PointConfig {
  Vec3 axis = Vec3::UnitZ();
  double amplitude_ratio = 2.0;
  int steps_per_quarter = 20;
  int cycles = 1;
  std::vector<double> history;  // V/m, overrides the cycle when non-empty
  bool stress_free = true;
};

/// Pre-poled cube: Pi0 at angle theta from the z axis in the xz plane, then
/// the field along z is ramped to field_ratio E0.
struct RepolingConfig {
  double theta_deg = 90.0;
  double edge = 5e-3;  // m
  int cells = 4;       // box cells per edge, 6 tets each
  double field_ratio = 2.0;
  /// Steps of the 0-D run that fixes the initial remanent magnitude.
  int poling_steps = 20;
};

/// One eighth of the plate with a hole; total potential difference between
/// the two electroded faces per load step.
struct HolePlateConfig {
  HolePlateGeometry geometry;
  std::vector<double> voltages = {5e3, 8e3, 9e3, 10e3, 15e3};  // V
};

struct OutputConfig {
  std::string directory;  // empty: no files
  bool vtk = true;
  int vtk_every = 1;
};

struct RunConfig {
  Scenario scenario = Scenario::Point;
  std::string mesh_file;  // optional, replaces the built-in mesh
  int order = 1;
  HdivVariant variant = HdivVariant::Reduced;
  MaterialParams material = pzt5h();
  NewtonSettings newton;
  int steps = 20;               // uniform load factors unless `factors` is set
  std::vector<double> factors;  // explicit load factors
  int max_bisections = 4;
  OutputConfig output;
  PointConfig point;
  RepolingConfig repoling;
  HolePlateConfig hole_plate;

  void validate() const;
};

/// Parses the JSON run configuration; unknown keys are errors.  Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
const char* scenario_name(Scenario s);

/// Field history of the point scenario.
std::vector<Vec3> point_history(const RunConfig& config);

/// Runs the 0-D driver; writes de_curve.csv and se_curve.csv if an output
/// directory is set.
std::vector<PointResult> scenario_point(const RunConfig& config);

/// A finite-element scenario run and its history.  The mesh outlives the
/// discretization that refers to it.
struct FieldRun {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const Discretization> disc;
  std::shared_ptr<const Material> material;
  LoadData loads;
  LoadHistory history;
  CsvTable curve;
  Vec3 initial_polarization = Vec3::Zero();
};

/// Builds the initial state of the repoling cube: uniform Pi0 = D0, u0 from a
/// solve with Pi frozen, and the fixed surface charge Pi0.n on insulated faces.
struct RepolingSetup {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const Discretization> disc;
  std::shared_ptr<const Material> material;
  LoadData loads;
  Eigen::VectorXd initial;
  Vec3 pi0 = Vec3::Zero();
};
RepolingSetup repoling_setup(const RunConfig& config);

/// Repoling cube; curve columns E_over_E0 and dD_z_C_per_m2 (change of the
/// mean normal displacement on the top electrode).
FieldRun scenario_repoling_cube(const RunConfig& config);

/// Plate with hole under the five-step voltage program; curve columns
/// voltage_V, max_Pi_C_per_m2, charge_C.
FieldRun scenario_hole_plate(const RunConfig& config);

/// Runs the configured scenario and writes its outputs.
void run_scenario(const RunConfig& config);

/// Maximum of |Pi| over elements sampled at the element vertices; `element`
/// receives the arg max.
double max_polarization(const Discretization& disc, const Eigen::VectorXd& x, int* element = nullptr);

}  // namespace ferro

#endif  // FERRO_SCENARIOS_HPP
