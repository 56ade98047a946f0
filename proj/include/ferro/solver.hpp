#ifndef FERRO_SOLVER_HPP
#define FERRO_SOLVER_HPP

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ferro/assembly.hpp"

namespace ferro {

class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Name of the sparse direct solvers in use (LDL^T, then the LU fallback).
const char* linear_solver_name();

/// Direct solve of the symmetric indefinite system A x = b: diagonal
/// equilibration, sparse LDL^T with iterative refinement, and a pivoted sparse
/// LU if the LDL^T backward error exceeds 1e-9.  Throws LinearSolveError on
/// singular matrices.
Eigen::VectorXd solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b);

struct NewtonSettings {
  int max_iterations = 100;
  double rel_tolerance = 1e-8;   // on the scaled residual, relative to the first iterate
  double abs_tolerance = 1e-10;  // relative to sqrt(E0 P0 |Omega|)
  double backtrack = 0.5;
  int max_backtracks = 20;
  double armijo = 1e-4;
  int threads = 1;

  void validate() const;
};

struct NewtonReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double residual = 0.0;
  std::vector<double> history;  // scaled residual norm per accepted iterate
};

/// Scaled residual norm: entries divided by sqrt|K_ii|, or for rows with a
/// zero diagonal (the multiplier) by sqrt(sum_j K_ij^2 / |K_jj|).
Eigen::VectorXd residual_scaling(const SparseMatrix& K);

/// Solves the incremental equation at state.lambda starting from state.x
/// (state.x0 is the previous converged state).  Newton with backtracking on
/// the scaled residual norm; throws NewtonError on failure, leaving state.x at
/// the last iterate.
NewtonReport newton_step_solve(const Discretization& disc, const Material& material,
                               const LoadData& loads, SystemState& state,
                               const NewtonSettings& settings = {});

struct LoadProgram {
  std::vector<double> factors;  // strictly increasing, ending at 1
  int max_bisections = 4;
  /// Evaluate dissipation and the incremental potential after every step.
  bool thermodynamic_checks = false;

  void validate() const;
};

struct StepRecord {
  int step = 0;
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;
  int substeps = 1;
  double dissipation = 0.0;        // int phi_eps(dPi) over the step (if checked)
  double dissipation_power = 0.0;  // int Ehat . dPi
  double potential = 0.0;          // incremental potential at the converged increment
};

struct LoadHistory {
  std::vector<Eigen::VectorXd> states;  // states[0] is the initial state
  std::vector<StepRecord> steps;
};

using StepCallback = std::function<void(const StepRecord&, const SystemState&)>;

/// Runs the load program from a converged initial state.  Steps that fail are
/// bisected up to max_bisections levels; each sub-step is a full incremental
/// step.  Throws NewtonError if a step fails at maximum depth.
LoadHistory run_load_program(const Discretization& disc, const Material& material,
                             const LoadData& loads, const Eigen::VectorXd& initial,
                             const LoadProgram& program, const NewtonSettings& settings = {},
                             const StepCallback& on_step = {});

/// Equidistant factors 1/n, 2/n, ..., 1.
std::vector<double> uniform_factors(int n);

/// CSV with header "step,lambda,iterations,residual,substeps,dissipation_J,potential_J".
void write_newton_log(std::ostream& out, const std::vector<StepRecord>& steps);

}  // namespace ferro

#endif  // FERRO_SOLVER_HPP
