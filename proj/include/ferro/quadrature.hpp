#ifndef FERRO_QUADRATURE_HPP
#define FERRO_QUADRATURE_HPP

#include <vector>

#include <Eigen/Dense>

namespace ferro {

/// Points and weights on a reference simplex.  Tet rules integrate over
/// {x, y, z >= 0, x + y + z <= 1} (volume 1/6); triangle rules over
/// {x, y >= 0, x + y <= 1} (area 1/2), with points stored as (x, y, 0).
struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  int degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

/// Gauss-Jacobi nodes and weights on [0, 1] for the weight (1 - t)^alpha.
/// Exact for polynomials of degree 2n - 1.
void gauss_jacobi(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed-coordinate (conical product) rule exact to `degree`.
QuadratureRule tet_rule(int degree);
QuadratureRule triangle_rule(int degree);

}  // namespace ferro

#endif  // FERRO_QUADRATURE_HPP
