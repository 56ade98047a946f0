#ifndef FERRO_SPACES_HPP
#define FERRO_SPACES_HPP

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ferro/basis.hpp"
#include "ferro/mesh.hpp"
#include "ferro/quadrature.hpp"

namespace ferro {

enum class SpaceKind { H1Vector, Hdiv, L2Vector, L2Scalar };

const char* to_string(SpaceKind kind);

/// Displacement components held at zero on a boundary region.
struct FixedRegion {
  std::string tag;
  std::array<bool, 3> components{true, true, true};
};

/// Displacement components held at zero at the mesh vertex nearest to `point`.
struct FixedPoint {
  Vec3 point = Vec3::Zero();
  std::array<bool, 3> components{true, true, true};
};

/// Per-element basis functions mapped to physical coordinates, with global
/// orientation signs already applied.  `n` counts local dofs.
///
/// Scalar-shape spaces (H1 vector, L2) store the scalar shapes once; local dof
/// 3 * i + c of a vector space is shape i times unit vector e_c.
struct BasisTable {
  int n = 0;
  int num_shapes = 0;
  Eigen::MatrixXd shape;                 // points x shapes
  std::vector<Eigen::Matrix3Xd> grad;    // per point, 3 x shapes (H1 only)
  std::vector<Eigen::Matrix3Xd> vec;     // per point, 3 x n (Hdiv only)
  Eigen::MatrixXd div;                   // points x n (Hdiv only)
};

/// Reference-element tabulation at fixed points, reused for every element.
struct ReferenceTable {
  std::vector<Vec3> points;
  Eigen::MatrixXd shape;                 // points x shapes
  std::vector<Eigen::Matrix3Xd> grad;    // reference gradients
  std::vector<Eigen::Matrix3Xd> vec;     // reference H(div) values
  Eigen::MatrixXd div;                   // reference divergence
};

/// Basis and dof map of one field.  Immutable after construction apart from
/// the constraint set, which is fixed by the builders.
class FESpace {
 public:
  FESpace(const Mesh& mesh, SpaceKind kind, int order, bool reduced = true);

  SpaceKind kind() const { return kind_; }
  int order() const { return order_; }
  const Mesh& mesh() const { return *mesh_; }
  int num_dofs() const { return num_dofs_; }
  int local_size() const { return local_size_; }
  int components() const;

  const std::vector<int>& element_dofs(int e) const { return dofs_[e]; }
  const std::vector<double>& element_signs(int e) const { return signs_[e]; }

  bool is_constrained(int dof) const { return constrained_[dof] != 0; }
  const std::vector<char>& constrained() const { return constrained_; }
  int num_constrained() const;
  void constrain(int dof) { constrained_[dof] = 1; }

  const ScalarBasis* scalar_basis() const { return scalar_.get(); }
  const HdivBasis* hdiv_basis() const { return hdiv_.get(); }

  /// Global dofs of the face moments of face f in canonical order (H(div)).
  std::vector<int> face_dofs(int f) const;
  int dofs_per_face() const;
  /// Number of global scalar shapes of an H1 space (dofs / 3).
  int num_shapes() const;

  ReferenceTable reference_table(const std::vector<Vec3>& ref_points) const;
  void map_table(int e, const ReferenceTable& ref, BasisTable& out) const;
  BasisTable tabulate(int e, const std::vector<Vec3>& ref_points) const;

 private:
  void build_h1();
  void build_hdiv();
  void build_l2();

  const Mesh* mesh_;
  SpaceKind kind_;
  int order_;
  int num_dofs_ = 0;
  int local_size_ = 0;
  std::vector<std::vector<int>> dofs_;
  std::vector<std::vector<double>> signs_;
  std::vector<char> constrained_;
  std::shared_ptr<const ScalarBasis> scalar_;
  std::shared_ptr<const HdivBasis> hdiv_;
};

/// Continuous vector polynomials of degree k + 1.  Dofs on `fixed` regions
/// and points are constrained (to zero unless the caller prescribes values).
FESpace build_h1_vector_space(const Mesh& mesh, int k, const std::vector<FixedRegion>& fixed,
                              const std::vector<FixedPoint>& points = {});
FESpace build_h1_vector_space(const Mesh& mesh, int k, const std::vector<std::string>& fixed);

/// Normal-continuous vector fields of degree k.  All face dofs on
/// `insulated` regions are constrained.
FESpace build_hdiv_space(const Mesh& mesh, int k, const std::vector<std::string>& insulated,
                         bool reduced = true);

/// Fully discontinuous polynomials of degree `order` with 1 or 3 components.
FESpace build_l2_space(const Mesh& mesh, int order, int components);

/// Basis table at reference points of element `e`.
BasisTable evaluate_basis(const FESpace& space, int e, const std::vector<Vec3>& ref_points);

/// Values of a discrete field at a reference point of element `e`.  Vector
/// spaces return 3 components, scalar spaces 1.
Eigen::VectorXd evaluate_field(const FESpace& space, const Eigen::VectorXd& coeffs, int e,
                               const Vec3& ref);
/// Divergence of an H(div) field (constant for the reduced space).
double evaluate_divergence(const FESpace& space, const Eigen::VectorXd& coeffs, int e,
                           const Vec3& ref);
/// Physical gradient (3 x 3, row = component) of an H1 vector field.
Mat3 evaluate_gradient(const FESpace& space, const Eigen::VectorXd& coeffs, int e,
                       const Vec3& ref);

using VectorFunction = std::function<Vec3(const Vec3&)>;
using ScalarFunction = std::function<double(const Vec3&)>;

/// Canonical interpolant of a vector field into an H(div) space (face and
/// interior moments).
Eigen::VectorXd interpolate_hdiv(const FESpace& space, const VectorFunction& field);

/// L2 projection of a vector field (H1 vector, L2 vector) or scalar field
/// (L2 scalar).  Element-local for L2 spaces, global for H1.
Eigen::VectorXd project(const FESpace& space, const VectorFunction& field);
Eigen::VectorXd project(const FESpace& space, const ScalarFunction& field);

/// Face moments of a normal-charge density: entries match face_dofs(f).
/// Exact for densities that are polynomial of degree <= k on the face.
Eigen::VectorXd face_charge_moments(const FESpace& space, int f, const ScalarFunction& rho);

/// Net flux of D through face f along the face's global normal.
double face_flux(const FESpace& space, const Eigen::VectorXd& coeffs, int f);

}  // namespace ferro

#endif  // FERRO_SPACES_HPP
