#include "ferro/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "ferro/mesh.hpp"
#include "ferro/quadrature.hpp"

namespace ferro {

namespace {

const std::array<Eigen::Vector3d, 4> kBaryGrad = {
    Eigen::Vector3d(-1.0, -1.0, -1.0), Eigen::Vector3d(1.0, 0.0, 0.0),
    Eigen::Vector3d(0.0, 1.0, 0.0), Eigen::Vector3d(0.0, 0.0, 1.0)};

double monomial(const std::array<int, 3>& m, const Eigen::Vector3d& x) {
  return std::pow(x[0], m[0]) * std::pow(x[1], m[1]) * std::pow(x[2], m[2]);
}

}  // namespace

std::array<double, 4> barycentric(const Eigen::Vector3d& ref) {
  return {1.0 - ref[0] - ref[1] - ref[2], ref[0], ref[1], ref[2]};
}

const std::array<Eigen::Vector3d, 4>& reference_vertices() {
  static const std::array<Eigen::Vector3d, 4> v = {
      Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(1.0, 0.0, 0.0),
      Eigen::Vector3d(0.0, 1.0, 0.0), Eigen::Vector3d(0.0, 0.0, 1.0)};
  return v;
}

// --- hierarchical scalar basis -------------------------------------------------

ScalarBasis::ScalarBasis(int degree) : degree_(degree) {
  if (degree < 0 || degree > 3) {
    throw std::invalid_argument("ScalarBasis: degree " + std::to_string(degree) +
                                " not supported (0..3)");
  }
  if (degree == 0) {
    entities_.push_back({3, 0, 0, false});
    return;
  }
  for (int v = 0; v < 4; ++v) entities_.push_back({0, v, 0, false});
  for (int e = 0; e < 6; ++e) {
    for (int j = 0; j + 2 <= degree; ++j) entities_.push_back({1, e, j, j % 2 == 1});
  }
  if (degree >= 3) {
    for (int f = 0; f < 4; ++f) entities_.push_back({2, f, 0, false});
  }
}

void ScalarBasis::eval(const Eigen::Vector3d& ref, double* values, Eigen::Vector3d* grads) const {
  if (degree_ == 0) {
    if (values) values[0] = 1.0;
    if (grads) grads[0].setZero();
    return;
  }
  const auto l = barycentric(ref);
  int n = 0;
  for (int v = 0; v < 4; ++v, ++n) {
    if (values) values[n] = l[v];
    if (grads) grads[n] = kBaryGrad[v];
  }
  for (int e = 0; e < 6 && degree_ >= 2; ++e) {
    const int a = kTetEdgeVertices[e][0], b = kTetEdgeVertices[e][1];
    const double q = l[a] * l[b];
    const Eigen::Vector3d dq = l[b] * kBaryGrad[a] + l[a] * kBaryGrad[b];
    if (values) values[n] = q;
    if (grads) grads[n] = dq;
    ++n;
    if (degree_ >= 3) {
      const double s = l[b] - l[a];
      if (values) values[n] = q * s;
      if (grads) grads[n] = s * dq + q * (kBaryGrad[b] - kBaryGrad[a]);
      ++n;
    }
  }
  if (degree_ >= 3) {
    for (int f = 0; f < 4; ++f, ++n) {
      const auto& fv = kTetFaceVertices[f];
      const double la = l[fv[0]], lb = l[fv[1]], lc = l[fv[2]];
      if (values) values[n] = la * lb * lc;
      if (grads) {
        grads[n] = lb * lc * kBaryGrad[fv[0]] + la * lc * kBaryGrad[fv[1]] +
                   la * lb * kBaryGrad[fv[2]];
      }
    }
  }
}

// --- normal-continuous basis ---------------------------------------------------

double HdivBasis::face_weight(const Dof& dof, const std::array<double, 4>& lambda) {
  if (dof.b < 0) return lambda[dof.a];
  return lambda[dof.a] * lambda[dof.b];
}

HdivBasis::HdivBasis(int k, bool reduced) : k_(k), reduced_(reduced) {
  if (k < 1 || k > 2) {
    throw std::invalid_argument("HdivBasis: order " + std::to_string(k) +
                                " not supported (1..2)");
  }
  for (int d = 0; d <= k; ++d)
    for (int i = d; i >= 0; --i)
      for (int j = d - i; j >= 0; --j) monomials_.push_back({i, j, d - i - j});
  const int nm = static_cast<int>(monomials_.size());
  const int nfull = 3 * nm;

  // value of full basis function c * nm + m is monomial m times e_c
  auto full_value = [&](const Eigen::Vector3d& x) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, nfull);
    for (int m = 0; m < nm; ++m) {
      const double p = monomial(monomials_[m], x);
      for (int c = 0; c < 3; ++c) v(c, c * nm + m) = p;
    }
    return v;
  };

  // local space: all of P_k^3, or the fields with constant divergence
  Eigen::MatrixXd space = Eigen::MatrixXd::Identity(nfull, nfull);
  if (reduced && k >= 2) {
    std::vector<int> nonconst;
    for (int m = 0; m < nm; ++m) {
      const auto& e = monomials_[m];
      if (e[0] + e[1] + e[2] >= 1 && e[0] + e[1] + e[2] <= k - 1) nonconst.push_back(m);
    }
    Eigen::MatrixXd constraint = Eigen::MatrixXd::Zero(nonconst.size(), nfull);
    for (size_t r = 0; r < nonconst.size(); ++r) {
      const auto& target = monomials_[nonconst[r]];
      for (int c = 0; c < 3; ++c)
        for (int m = 0; m < nm; ++m) {
          auto e = monomials_[m];
          if (e[c] == 0) continue;
          const double factor = e[c];
          --e[c];
          if (e == target) constraint(r, c * nm + m) += factor;
        }
    }
    space = Eigen::FullPivLU<Eigen::MatrixXd>(constraint).kernel();
  }
  const int nv = static_cast<int>(space.cols());

  const QuadratureRule vol = tet_rule(2 * k);
  const QuadratureRule tri = triangle_rule(2 * k);
  const auto& rv = reference_vertices();

  // face moments
  std::vector<Dof> face_dofs;
  for (int f = 0; f < 4; ++f) {
    const auto& fv = kTetFaceVertices[f];
    for (int a : fv) face_dofs.push_back({f, a, -1, -1});
    if (k == 2) {
      face_dofs.push_back({f, fv[0], fv[1], -1});
      face_dofs.push_back({f, fv[1], fv[2], -1});
      face_dofs.push_back({f, fv[0], fv[2], -1});
    }
  }
  const int nface = static_cast<int>(face_dofs.size());
  Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(nface, nfull);
  for (int r = 0; r < nface; ++r) {
    const auto& fv = kTetFaceVertices[face_dofs[r].face];
    const Eigen::Vector3d A = rv[fv[0]], B = rv[fv[1]], C = rv[fv[2]];
    Eigen::Vector3d n = (B - A).cross(C - A);
    const double jac = n.norm();
    n /= jac;
    if (n.dot(A - rv[face_dofs[r].face]) < 0.0) n = -n;
    for (int q = 0; q < tri.size(); ++q) {
      const Eigen::Vector3d x = A + tri.points[q][0] * (B - A) + tri.points[q][1] * (C - A);
      const double w = tri.weights[q] * jac * face_weight(face_dofs[r], barycentric(x));
      moments.row(r) += w * (n.transpose() * full_value(x));
    }
  }

  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nfull, nfull);
  for (int q = 0; q < vol.size(); ++q) {
    const Eigen::MatrixXd v = full_value(vol.points[q]);
    mass += vol.weights[q] * v.transpose() * v;
  }

  // local bubbles: zero normal moments on every face; orthonormalise in L2
  const Eigen::MatrixXd restricted = moments * space;
  Eigen::MatrixXd bubbles = Eigen::FullPivLU<Eigen::MatrixXd>(restricted).kernel();
  if (bubbles.cols() == 1 && bubbles.norm() == 0.0) bubbles.resize(nv, 0);
  if (nface + bubbles.cols() != nv) {
    throw std::logic_error("HdivBasis: face moments are not unisolvent");
  }
  Eigen::MatrixXd interior(0, nfull);
  if (bubbles.cols() > 0) {
    const Eigen::MatrixXd full_bubbles = space * bubbles;
    const Eigen::MatrixXd gram = full_bubbles.transpose() * mass * full_bubbles;
    const Eigen::MatrixXd linv =
        Eigen::LLT<Eigen::MatrixXd>(gram).matrixL().solve(
            Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
    bubbles_ = full_bubbles * linv.transpose();
    interior = bubbles_.transpose() * mass;
  }

  Eigen::MatrixXd dofmat(nv, nv);
  dofmat << restricted, interior * space;
  coeffs_ = space * dofmat.inverse();

  dofs_ = face_dofs;
  for (int j = 0; j < bubbles.cols(); ++j) dofs_.push_back({-1, -1, -1, j});
}

void HdivBasis::eval_interior_tests(const Eigen::Vector3d& ref, Eigen::Vector3d* values) const {
  const int nm = static_cast<int>(monomials_.size());
  Eigen::VectorXd p(nm);
  for (int m = 0; m < nm; ++m) p[m] = monomial(monomials_[m], ref);
  for (int j = 0; j < bubbles_.cols(); ++j) {
    for (int c = 0; c < 3; ++c) values[j][c] = bubbles_.col(j).segment(c * nm, nm).dot(p);
  }
}

void HdivBasis::eval(const Eigen::Vector3d& ref, Eigen::Vector3d* values, double* div) const {
  const int nm = static_cast<int>(monomials_.size());
  Eigen::VectorXd p(nm);
  Eigen::MatrixXd dp(3, nm);
  for (int m = 0; m < nm; ++m) {
    const auto& e = monomials_[m];
    p[m] = monomial(e, ref);
    for (int c = 0; c < 3; ++c) {
      if (e[c] == 0) {
        dp(c, m) = 0.0;
      } else {
        auto d = e;
        --d[c];
        dp(c, m) = e[c] * monomial(d, ref);
      }
    }
  }
  for (int i = 0; i < size(); ++i) {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    double dv = 0.0;
    for (int c = 0; c < 3; ++c) {
      const auto col = coeffs_.col(i).segment(c * nm, nm);
      v[c] = col.dot(p);
      dv += col.dot(dp.row(c).transpose());
    }
    if (values) values[i] = v;
    if (div) div[i] = dv;
  }
}

}  // namespace ferro
