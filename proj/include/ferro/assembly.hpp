#ifndef FERRO_ASSEMBLY_HPP
#define FERRO_ASSEMBLY_HPP

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ferro/material.hpp"
#include "ferro/mesh.hpp"
#include "ferro/quadrature.hpp"
#include "ferro/spaces.hpp"

namespace ferro {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Field { U = 0, D = 1, Pi = 2, Phi = 3 };

enum class HdivVariant {
  Reduced,  // divergence in P0, piecewise constant multiplier
  Full      // full BDM_k, multiplier of order k - 1
};

/// Which boundary parts carry essential conditions.  Faces that are neither
/// insulated nor listed as electrodes in the loads are grounded electrodes.
struct BoundarySetup {
  std::vector<FixedRegion> fixed;
  std::vector<FixedPoint> fixed_points;
  std::vector<std::string> insulated;  // D.n prescribed
  /// Hold Pi at its current value (all Pi dofs constrained).
  bool freeze_polarization = false;
};

/// The four spaces u (H1, degree k+1), D (H(div), degree k), Pi (L2 vector,
/// degree k) and the multiplier phi, stacked in one global vector
/// [u | D | Pi | phi].  Holds a reference to the mesh, which must outlive it.
class Discretization {
 public:
  Discretization(const Mesh& mesh, int k, const BoundarySetup& bc,
                 HdivVariant variant = HdivVariant::Reduced);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return k_; }
  HdivVariant variant() const { return variant_; }
  const BoundarySetup& boundary() const { return bc_; }

  const FESpace& space(Field f) const { return spaces_[static_cast<int>(f)]; }
  int offset(Field f) const { return offsets_[static_cast<int>(f)]; }
  int num_dofs() const { return offsets_[4]; }
  int num_dofs(Field f) const { return space(f).num_dofs(); }

  /// Global indices of the local dofs of element e, fields concatenated.
  std::vector<int> element_dofs(int e) const;
  /// Constrained-dof mask over the global vector.
  const std::vector<char>& constrained() const { return constrained_; }

  Eigen::VectorXd field(const Eigen::VectorXd& x, Field f) const {
    return x.segment(offset(f), num_dofs(f));
  }
  void set_field(Eigen::VectorXd& x, Field f, const Eigen::VectorXd& v) const {
    x.segment(offset(f), num_dofs(f)) = v;
  }

  const QuadratureRule& rule() const { return rule_; }
  const ReferenceTable& reference(Field f) const { return refs_[static_cast<int>(f)]; }

 private:
  const Mesh* mesh_;
  int k_;
  HdivVariant variant_;
  BoundarySetup bc_;
  std::vector<FESpace> spaces_;
  std::array<int, 5> offsets_{};
  std::vector<char> constrained_;
  QuadratureRule rule_;
  std::array<ReferenceTable, 4> refs_;
};

/// Surface charge density at a boundary point with the face's outward normal.
using SurfaceCharge = std::function<double(const Vec3& x, const Vec3& normal)>;

struct Electrode {
  std::string tag;
  double potential = 0.0;  // V at load factor 1
};

struct SurfaceTraction {
  std::string tag;
  Vec3 traction = Vec3::Zero();  // N/m^2 at load factor 1
};

/// External loads.  Body force, tractions and electrode potentials scale with
/// the load factor; the surface charge on insulated faces does not.
struct LoadData {
  Vec3 body_force = Vec3::Zero();
  std::vector<SurfaceTraction> tractions;
  std::vector<Electrode> electrodes;
  /// Normal charge density D.n (outward) on insulated faces; empty means 0.
  SurfaceCharge surface_charge;
};

/// Current iterate x at load factor lambda and the converged state x0 of the
/// previous step.
struct SystemState {
  Eigen::VectorXd x;
  Eigen::VectorXd x0;
  double lambda = 0.0;
};

/// Prescribed values of constrained dofs.
struct EssentialValues {
  std::vector<int> dofs;
  std::vector<double> values;
  void impose(Eigen::VectorXd& x) const;
};

struct AssemblyOptions {
  int threads = 1;
  /// Replace the dissipation Hessian by its inner-branch value E0/eps I (a
  /// fallback tangent for Newton near the kink of phi_eps).
  bool stiff_dissipation = false;
  /// Flip negative eigenvalues of the pointwise Hessian (diagonally scaled),
  /// giving a positive semidefinite tangent for descent steps in regions
  /// where the free energy is not convex.
  bool convexify = false;
};

/// Zero displacements on fixed regions and the face moments of the surface
/// charge on insulated faces.  Throws AssemblyError if a face is both
/// insulated and an electrode or a load refers to a missing region.
EssentialValues apply_essential_bcs(const Discretization& disc, const LoadData& loads);

/// Linear form of the external work at load factor lambda: body force and
/// tractions on u, minus lambda V0 D.n on electrodes.
Eigen::VectorXd external_work_vector(const Discretization& disc, const LoadData& loads,
                                     double lambda);

/// Residual of the multiplier-augmented incremental equation; rows of
/// constrained dofs are zero.  Material-domain violations are rethrown with
/// the element and quadrature point.
Eigen::VectorXd assemble_residual(const Discretization& disc, const Material& material,
                                  const LoadData& loads, const SystemState& state,
                                  const AssemblyOptions& opt = {});

/// Consistent tangent; constrained rows and columns are replaced by identity.
SparseMatrix assemble_tangent(const Discretization& disc, const Material& material,
                              const LoadData& loads, const SystemState& state,
                              const AssemblyOptions& opt = {});

/// Residual and tangent in one element loop; either output may be null.
void assemble_system(const Discretization& disc, const Material& material, const LoadData& loads,
                     const SystemState& state, Eigen::VectorXd* residual, SparseMatrix* tangent,
                     const AssemblyOptions& opt = {});

/// Incremental Lagrangian Psi(x) - Psi(x0) + Phi_eps(Pi - Pi0) - W_ext(x - x0)
/// - int phi div(D - D0); its gradient is the (unconstrained) residual.
double incremental_potential(const Discretization& disc, const Material& material,
                             const LoadData& loads, const SystemState& state);

/// The same objective without the multiplier term (equal to it whenever the
/// discrete Gauss law holds).
double incremental_energy(const Discretization& disc, const Material& material,
                          const LoadData& loads, const SystemState& state);

struct DissipationSummary {
  double phi_eps = 0.0;  // int phi_eps(Pi - Pi0)
  double power = 0.0;    // int Ehat . (Pi - Pi0)
};

DissipationSummary dissipation(const Discretization& disc, const Material& material,
                               const SystemState& state);

/// max over elements and `samples` random points per element of |div D|.
double max_divergence(const Discretization& disc, const Eigen::VectorXd& x, int samples = 10,
                      unsigned seed = 1);
/// max over elements of the L2 norm of D divided by sqrt(volume), a field
/// magnitude to scale divergence checks.
double field_magnitude(const Discretization& disc, const Eigen::VectorXd& x, Field f);

/// Outward flux of D through all faces of a region.
double region_charge(const Discretization& disc, const Eigen::VectorXd& x, const std::string& tag);
/// int rho_P ds over insulated faces (outward convention).
double insulated_charge(const Discretization& disc, const LoadData& loads);

/// Pointwise constitutive state at a reference point of element e.
ConstitutiveState evaluate_state(const Discretization& disc, const Eigen::VectorXd& x, int e,
                                 const Vec3& ref);

}  // namespace ferro

#endif  // FERRO_ASSEMBLY_HPP
