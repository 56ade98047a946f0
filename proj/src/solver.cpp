#include "ferro/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/OrderingMethods>
#ifdef FERRO_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

namespace ferro {

const char* linear_solver_name() {
#ifdef FERRO_HAVE_UMFPACK
  return "ldlt+umfpack";
#else
  return "ldlt+sparselu";
#endif
}

Eigen::VectorXd residual_scaling(const SparseMatrix& K) {
  const int n = static_cast<int>(K.rows());
  Eigen::VectorXd diag = K.diagonal().cwiseAbs();
  Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd schur = Eigen::VectorXd::Zero(n);
  // K is symmetric, so columns stand in for rows.
  for (int j = 0; j < K.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(K, j); it; ++it) {
      const int i = static_cast<int>(it.row());
      if (i == j || diag(j) == 0.0) continue;
      schur(i) += it.value() * it.value() / diag(j);
    }
  }
  for (int i = 0; i < n; ++i) {
    const double d = diag(i) > 0.0 ? diag(i) : schur(i);
    if (d > 0.0) s(i) = 1.0 / std::sqrt(d);
  }
  return s;
}

namespace {

double backward_error(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                      double normA) {
  const double r = (A * x - b).lpNorm<Eigen::Infinity>();
  const double scale = normA * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  return scale > 0.0 ? r / scale : r;
}

}  // namespace

namespace {

// Solves the equilibrated system with factorization `F`; returns false if the
// factorization fails or the refined backward error stays above 1e-9.
template <typename Factor>
bool try_solve(Factor& F, const SparseMatrix& As, const Eigen::VectorXd& bs, double normA,
               Eigen::VectorXd& y, double& err) {
  F.compute(As);
  if (F.info() != Eigen::Success) return false;
  y = F.solve(bs);
  if (F.info() != Eigen::Success || !y.allFinite()) return false;
  err = backward_error(As, y, bs, normA);
  for (int refine = 0; refine < 3 && err > 1e-13; ++refine) {
    const Eigen::VectorXd res = bs - As * y;
    y += F.solve(res);
    err = backward_error(As, y, bs, normA);
  }
  return y.allFinite() && err <= 1e-9;
}

}  // namespace

Eigen::VectorXd solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw LinearSolveError("solve_linear: dimension mismatch");
  if (A.rows() == 0) return Eigen::VectorXd();

  // Symmetric diagonal equilibration; the fields carry very different units.
  const Eigen::VectorXd s = residual_scaling(A);
  SparseMatrix As = s.asDiagonal() * A * s.asDiagonal();
  As.makeCompressed();
  const Eigen::VectorXd bs = s.cwiseProduct(b);
  double normA = 0.0;
  {
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(As.rows());
    for (int j = 0; j < As.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(As, j); it; ++it) rowsum(it.row()) += std::abs(it.value());
    normA = rowsum.maxCoeff();
  }

  Eigen::VectorXd y;
  double err = std::numeric_limits<double>::infinity();
  // Sparse LDL^T with a fill-reducing ordering and no pivoting; the
  // equilibrated saddle-point systems factor stably in practice, and the
  // backward-error check catches the cases that do not.
  {
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    if (try_solve(ldlt, As, bs, normA, y, err)) return s.cwiseProduct(y);
  }
#ifdef FERRO_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMatrix> lu;
#else
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
  if (try_solve(lu, As, bs, normA, y, err)) return s.cwiseProduct(y);
  std::ostringstream msg;
  msg << "solve_linear: matrix is singular (" << linear_solver_name() << ", backward error " << err << ")";
  throw LinearSolveError(msg.str());
}

void NewtonSettings::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("NewtonSettings: max_iterations < 1");
  if (!(rel_tolerance > 0.0) || !(abs_tolerance > 0.0))
    throw std::invalid_argument("NewtonSettings: tolerances must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0))
    throw std::invalid_argument("NewtonSettings: backtrack factor must lie in (0, 1)");
  if (max_backtracks < 0) throw std::invalid_argument("NewtonSettings: max_backtracks < 0");
  if (!(armijo > 0.0 && armijo < 1.0))
    throw std::invalid_argument("NewtonSettings: armijo constant must lie in (0, 1)");
  if (threads < 1) throw std::invalid_argument("NewtonSettings: threads < 1");
}

namespace {

double domain_volume(const Mesh& mesh) {
  double v = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) v += mesh.element_volume(e);
  return v;
}

}  // namespace

NewtonReport newton_step_solve(const Discretization& disc, const Material& material,
                               const LoadData& loads, SystemState& state,
                               const NewtonSettings& settings) {
  settings.validate();
  if (state.x.size() != disc.num_dofs() || state.x0.size() != disc.num_dofs())
    throw std::invalid_argument("newton_step_solve: state size does not match the discretization");

  AssemblyOptions opt;
  opt.threads = settings.threads;
  const EssentialValues ev = apply_essential_bcs(disc, loads);
  ev.impose(state.x);

  const MaterialParams& p = material.params();
  const double energy_scale = p.E0 * p.P0 * domain_volume(disc.mesh());
  const double abs_tol = settings.abs_tolerance * std::sqrt(energy_scale);
  const std::vector<char>& constrained = disc.constrained();
  const int phi0 = disc.offset(Field::Phi);
  const int nphi = disc.num_dofs(Field::Phi);

  Eigen::VectorXd r;
  SparseMatrix K;
  assemble_system(disc, material, loads, state, &r, &K, opt);
  // The scaling is frozen for the step so that norms stay comparable.
  const Eigen::VectorXd scale = residual_scaling(K);
  auto norm = [&](const Eigen::VectorXd& v) { return v.cwiseProduct(scale).norm(); };

  NewtonReport rep;
  double rnorm = norm(r);
  rep.initial_residual = rnorm;
  rep.residual = rnorm;
  rep.history.push_back(rnorm);
  const double target = std::max(settings.rel_tolerance * rnorm, abs_tol);
  if (rnorm <= abs_tol) return rep;

  auto energy = [&](const Eigen::VectorXd& x) {
    return incremental_energy(disc, material, loads, SystemState{x, state.x0, state.lambda});
  };
  double f = energy(state.x);

  struct Trial {
    bool ok = false;
    Eigen::VectorXd x, r;
    double norm = 0.0, f = 0.0;
  };

  // Backtracking along dx.  With `objective` the test is Armijo on the
  // incremental energy, falling back to a residual decrease once energy
  // differences reach round-off; otherwise it is a decrease of the scaled
  // residual norm.
  auto line_search = [&](const Eigen::VectorXd& dx, bool objective) {
    Trial t;
    const double slope = r.dot(dx);
    double alpha = 1.0;
    for (int b = 0; b <= settings.max_backtracks; ++b, alpha *= settings.backtrack) {
      SystemState trial{state.x + alpha * dx, state.x0, state.lambda};
      Eigen::VectorXd rt;
      double ft = 0.0;
      try {
        assemble_system(disc, material, loads, trial, &rt, nullptr, opt);
        if (objective) ft = energy(trial.x);
      } catch (const MaterialDomainError&) {
        continue;
      }
      const double n = norm(rt);
      if (!std::isfinite(n)) continue;
      const bool drop = n <= (1.0 - settings.armijo * alpha) * rnorm;
      bool accept = drop;
      if (objective) {
        const bool armijo = ft <= f + settings.armijo * alpha * slope;
        const bool noise = std::abs(ft - f) <= 1e-10 * (std::abs(f) + energy_scale);
        accept = armijo || (drop && noise);
      }
      if (accept) {
        t.ok = true;
        t.x = std::move(trial.x);
        t.r = std::move(rt);
        t.norm = n;
        t.f = ft;
        return t;
      }
    }
    return t;
  };

  auto direction = [&](const SparseMatrix& A) -> Eigen::VectorXd {
    try {
      return solve_linear(A, -r);
    } catch (const LinearSolveError&) {
      return Eigen::VectorXd();
    }
  };

  for (int it = 1; it <= settings.max_iterations; ++it) {
    Trial t;
    const double phi_norm = r.segment(phi0, nphi).cwiseProduct(scale.segment(phi0, nphi)).norm();
    const bool feasible = phi_norm <= std::max(1e-6 * rnorm, target);
    if (!feasible) {
      // restore the discrete Gauss law first; the constraint is linear
      Eigen::VectorXd dx = direction(K);
      if (dx.size()) t = line_search(dx, false);
    } else {
      // Newton on the constraint manifold.  Where the free energy is not
      // convex (switching) the consistent step may ascend; then the tangent
      // with flipped pointwise curvature is used, shifted if necessary.
      Eigen::VectorXd dx = direction(K);
      if (dx.size() && r.dot(dx) < 0.0) t = line_search(dx, true);
      if (!t.ok) {
        AssemblyOptions convex = opt;
        convex.convexify = true;
        SparseMatrix Kc;
        assemble_system(disc, material, loads, state, nullptr, &Kc, convex);
        for (double tau : {0.0, 1e-4, 1e-2, 1.0}) {
          SparseMatrix A = Kc;
          if (tau > 0.0)
            for (int i = 0; i < phi0; ++i)
              if (!constrained[i]) A.coeffRef(i, i) += tau * std::abs(Kc.coeff(i, i));
          dx = direction(A);
          if (!dx.size() || !(r.dot(dx) < 0.0)) continue;
          t = line_search(dx, true);
          if (t.ok) break;
        }
      }
      if (!t.ok) {
        // near the kink of the dissipation the consistent tangent can point
        // far outside the inner branch; the stiff one stays inside
        AssemblyOptions stiff = opt;
        stiff.stiff_dissipation = true;
        SparseMatrix Ks;
        assemble_system(disc, material, loads, state, nullptr, &Ks, stiff);
        dx = direction(Ks);
        if (dx.size() && r.dot(dx) < 0.0) t = line_search(dx, true);
      }
    }
    rep.iterations = it;
    if (!t.ok) {
      std::ostringstream msg;
      msg << "Newton: line search failed at iteration " << it << " (lambda = " << state.lambda
          << ", scaled residual " << rnorm << ")";
      throw NewtonError(msg.str(), it, rnorm);
    }
    state.x = std::move(t.x);
    r = std::move(t.r);
    rnorm = t.norm;
    f = feasible ? t.f : energy(state.x);
    rep.residual = rnorm;
    rep.history.push_back(rnorm);
    if (rnorm <= target) return rep;
    assemble_system(disc, material, loads, state, nullptr, &K, opt);
  }
  std::ostringstream msg;
  msg << "Newton: no convergence in " << settings.max_iterations << " iterations (lambda = "
      << state.lambda << ", scaled residual " << rnorm << ", target " << target << ")";
  throw NewtonError(msg.str(), settings.max_iterations, rnorm);
}

void LoadProgram::validate() const {
  if (factors.empty()) throw std::invalid_argument("LoadProgram: no load factors");
  double prev = 0.0;
  for (double f : factors) {
    if (!(f > prev)) throw std::invalid_argument("LoadProgram: factors must increase strictly from 0");
    prev = f;
  }
  if (std::abs(factors.back() - 1.0) > 1e-12)
    throw std::invalid_argument("LoadProgram: the last factor must be 1");
  if (max_bisections < 0) throw std::invalid_argument("LoadProgram: max_bisections < 0");
}

std::vector<double> uniform_factors(int n) {
  if (n < 1) throw std::invalid_argument("uniform_factors: n < 1");
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = static_cast<double>(i + 1) / n;
  return f;
}

LoadHistory run_load_program(const Discretization& disc, const Material& material,
                             const LoadData& loads, const Eigen::VectorXd& initial,
                             const LoadProgram& program, const NewtonSettings& settings,
                             const StepCallback& on_step) {
  program.validate();
  if (initial.size() != disc.num_dofs())
    throw std::invalid_argument("run_load_program: initial state size does not match");

  LoadHistory hist;
  hist.states.push_back(initial);
  Eigen::VectorXd x = initial;
  double lambda = 0.0;

  for (std::size_t i = 0; i < program.factors.size(); ++i) {
    StepRecord rec;
    rec.step = static_cast<int>(i) + 1;
    rec.lambda = program.factors[i];
    rec.substeps = 0;
    const Eigen::VectorXd x_start = x;

    std::function<void(double, double, int)> advance = [&](double from, double to, int depth) {
      SystemState s{x, x, to};
      try {
        NewtonReport r = newton_step_solve(disc, material, loads, s, settings);
        rec.iterations += r.iterations;
        rec.residual = r.residual;
      } catch (const NewtonError& err) {
        rec.iterations += err.iterations();
        if (depth >= program.max_bisections) {
          std::ostringstream msg;
          msg << "load step " << rec.step << " failed after " << depth
              << " bisections: " << err.what();
          throw NewtonError(msg.str(), rec.iterations, err.residual());
        }
        const double mid = 0.5 * (from + to);
        advance(from, mid, depth + 1);
        advance(mid, to, depth + 1);
        return;
      }
      if (program.thermodynamic_checks) {
        const DissipationSummary d = dissipation(disc, material, s);
        rec.dissipation += d.phi_eps;
        rec.dissipation_power += d.power;
        rec.potential += incremental_potential(disc, material, loads, s);
      }
      x = s.x;
      ++rec.substeps;
    };
    advance(lambda, rec.lambda, 0);
    lambda = rec.lambda;

    hist.states.push_back(x);
    hist.steps.push_back(rec);
    if (on_step) on_step(rec, SystemState{x, x_start, lambda});
  }
  return hist;
}

void write_newton_log(std::ostream& out, const std::vector<StepRecord>& steps) {
  out << "step,lambda,iterations,residual,substeps,dissipation_J,potential_J\n";
  out.precision(10);
  for (const StepRecord& s : steps)
    out << s.step << ',' << s.lambda << ',' << s.iterations << ',' << s.residual << ','
        << s.substeps << ',' << s.dissipation << ',' << s.potential << '\n';
}

}  // namespace ferro
