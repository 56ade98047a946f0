#include "ferro/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ferro {

void gauss_jacobi(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1 || alpha < 0) throw std::invalid_argument("gauss_jacobi: bad arguments");
  // Golub-Welsch on [-1, 1] with weight (1 - x)^alpha (beta = 0)
  const double a = alpha, b = 0.0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * i + a + b;
    jac(i, i) = (i == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (i + 1 < n) {
      const double k = i + 1;
      const double t = 2.0 * k + a + b;
      const double off =
          std::sqrt(4.0 * k * (k + a) * (k + b) * (k + a + b) / (t * t * (t + 1.0) * (t - 1.0)));
      jac(i, i + 1) = jac(i + 1, i) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  // mu0 = int_{-1}^{1} (1 - x)^alpha dx
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = eig.eigenvalues()[i];
    const double v0 = eig.eigenvectors()(0, i);
    nodes[i] = 0.5 * (1.0 + x);
    weights[i] = mu0 * v0 * v0 / std::pow(2.0, a + 1.0);
  }
}

QuadratureRule tet_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("tet_rule: negative degree");
  const int n = degree / 2 + 1;
  std::vector<double> xa, wa, xb, wb, xc, wc;
  gauss_jacobi(n, 0, xa, wa);
  gauss_jacobi(n, 1, xb, wb);
  gauss_jacobi(n, 2, xc, wc);
  QuadratureRule rule;
  rule.degree = degree;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double z = xc[k];
        const double y = xb[j] * (1.0 - z);
        const double x = xa[i] * (1.0 - xb[j]) * (1.0 - z);
        rule.points.emplace_back(x, y, z);
        rule.weights.push_back(wa[i] * wb[j] * wc[k]);
      }
  return rule;
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_rule: negative degree");
  const int n = degree / 2 + 1;
  std::vector<double> xa, wa, xb, wb;
  gauss_jacobi(n, 0, xa, wa);
  gauss_jacobi(n, 1, xb, wb);
  QuadratureRule rule;
  rule.degree = degree;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double y = xb[j];
      const double x = xa[i] * (1.0 - y);
      rule.points.emplace_back(x, y, 0.0);
      rule.weights.push_back(wa[i] * wb[j]);
    }
  return rule;
}

}  // namespace ferro
