#ifndef FERRO_BASIS_HPP
#define FERRO_BASIS_HPP

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace ferro {

/// Reference-entity association of a local shape function.
struct ShapeEntity {
  int dim = 3;     // 0 vertex, 1 edge, 2 face, 3 interior
  int local = 0;   // local vertex / edge / face index
  int index = 0;   // position among the functions of that entity
  bool odd = false;  // changes sign when the entity orientation flips
};

/// Hierarchical scalar basis of total degree p <= 3 on the reference tet:
/// barycentric vertex functions, edge functions lambda_a lambda_b L(lambda_b -
/// lambda_a) with L in {1, t} (the integrated-Legendre kernels up to scaling),
/// and the face bubble lambda_a lambda_b lambda_c.  p = 0 is the constant.
/// Edge functions are defined with the local orientation a < b; odd ones must
/// be sign-corrected by the caller for a global orientation.
class ScalarBasis {
 public:
  explicit ScalarBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(entities_.size()); }
  const std::vector<ShapeEntity>& entities() const { return entities_; }

  void eval(const Eigen::Vector3d& ref, double* values, Eigen::Vector3d* grads) const;

 private:
  int degree_;
  std::vector<ShapeEntity> entities_;
};

/// Normal-continuous vector basis of degree k on the reference tet.
///
/// Degrees of freedom are face moments of v.n against the face polynomials
/// {lambda_a} (k = 1) or {lambda_a, lambda_a lambda_b} (k = 2), keyed by the
/// face vertices so that they are invariant under vertex permutations, plus
/// interior moments against an L2-orthonormal basis of the local bubbles.
/// With `reduced` the local space is restricted to fields with constant
/// divergence, leaving 2(k+1)(k+2) face and k(k-1)(2k+5)/6 interior dofs.
/// For k = 1 both variants coincide.
class HdivBasis {
 public:
  struct Dof {
    int face = -1;  // local face, -1 for interior
    int a = -1;     // local vertex keys; b = -1 for vertex moments
    int b = -1;
    int interior = -1;
  };

  HdivBasis(int k, bool reduced);

  int order() const { return k_; }
  bool reduced() const { return reduced_; }
  int size() const { return static_cast<int>(dofs_.size()); }
  int face_dofs_per_face() const { return k_ == 1 ? 3 : 6; }
  int num_interior() const { return size() - 4 * face_dofs_per_face(); }
  const std::vector<Dof>& dofs() const { return dofs_; }

  void eval(const Eigen::Vector3d& ref, Eigen::Vector3d* values, double* div) const;
  /// Reference test functions of the interior moments (num_interior of them).
  void eval_interior_tests(const Eigen::Vector3d& ref, Eigen::Vector3d* values) const;

  /// Face test function q for a dof key, evaluated from barycentrics.
  static double face_weight(const Dof& dof, const std::array<double, 4>& lambda);

 private:
  int k_;
  bool reduced_;
  std::vector<std::array<int, 3>> monomials_;
  Eigen::MatrixXd coeffs_;   // (3 * monomials) x size
  Eigen::MatrixXd bubbles_;  // (3 * monomials) x num_interior
  std::vector<Dof> dofs_;
};

std::array<double, 4> barycentric(const Eigen::Vector3d& ref);

/// Reference coordinates of the four tet vertices.
const std::array<Eigen::Vector3d, 4>& reference_vertices();

}  // namespace ferro

#endif  // FERRO_BASIS_HPP
