#include "ferro/spaces.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace ferro {

namespace {

// canonical position of a face moment key within the sorted face triple
int canonical_face_index(int pa, int pb) {
  if (pb < 0) return pa;
  if (pa > pb) std::swap(pa, pb);
  if (pa == 0 && pb == 1) return 3;
  if (pa == 1 && pb == 2) return 4;
  return 5;
}

double canonical_face_weight(int c, double l0, double l1, double l2) {
  switch (c) {
    case 0: return l0;
    case 1: return l1;
    case 2: return l2;
    case 3: return l0 * l1;
    case 4: return l1 * l2;
    default: return l0 * l2;
  }
}

int position_in(const std::array<int, 3>& sorted, int v) {
  for (int i = 0; i < 3; ++i)
    if (sorted[i] == v) return i;
  throw std::logic_error("vertex not on face");
}

}  // namespace

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::H1Vector: return "h1-vector";
    case SpaceKind::Hdiv: return "hdiv";
    case SpaceKind::L2Vector: return "l2-vector";
    case SpaceKind::L2Scalar: return "l2-scalar";
  }
  return "?";
}

FESpace::FESpace(const Mesh& mesh, SpaceKind kind, int order, bool reduced)
    : mesh_(&mesh), kind_(kind), order_(order) {
  switch (kind) {
    case SpaceKind::H1Vector:
      if (order < 1 || order > 3) {
        throw std::invalid_argument("h1 space: polynomial degree " + std::to_string(order) +
                                    " not supported (k must be 1 or 2)");
      }
      scalar_ = std::make_shared<ScalarBasis>(order);
      build_h1();
      break;
    case SpaceKind::Hdiv:
      if (order < 1 || order > 2) {
        throw std::invalid_argument("hdiv space: order " + std::to_string(order) +
                                    " not supported (1 or 2)");
      }
      hdiv_ = std::make_shared<HdivBasis>(order, reduced);
      build_hdiv();
      break;
    case SpaceKind::L2Vector:
    case SpaceKind::L2Scalar:
      if (order < 0) throw std::invalid_argument("l2 space: negative order");
      scalar_ = std::make_shared<ScalarBasis>(order);
      build_l2();
      break;
  }
  constrained_.assign(num_dofs_, 0);
}

int FESpace::components() const {
  return (kind_ == SpaceKind::L2Scalar) ? 1 : 3;
}

int FESpace::num_constrained() const {
  return static_cast<int>(std::count(constrained_.begin(), constrained_.end(), 1));
}

int FESpace::num_shapes() const {
  return kind_ == SpaceKind::H1Vector ? num_dofs_ / 3 : 0;
}

int FESpace::dofs_per_face() const {
  return hdiv_ ? hdiv_->face_dofs_per_face() : 0;
}

std::vector<int> FESpace::face_dofs(int f) const {
  if (kind_ != SpaceKind::Hdiv) throw std::logic_error("face_dofs: not an hdiv space");
  const int n = dofs_per_face();
  std::vector<int> out(n);
  for (int c = 0; c < n; ++c) out[c] = f * n + c;
  return out;
}

void FESpace::build_h1() {
  const Mesh& m = *mesh_;
  const int p = order_;
  const int nv = m.num_vertices(), ne = m.num_edges();
  const int nshapes = nv + ne * (p - 1) + (p >= 3 ? m.num_faces() : 0);
  num_dofs_ = 3 * nshapes;
  const auto& ents = scalar_->entities();
  local_size_ = 3 * static_cast<int>(ents.size());
  dofs_.resize(m.num_elements());
  signs_.resize(m.num_elements());
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& t = m.tet(e);
    auto& d = dofs_[e];
    auto& s = signs_[e];
    d.resize(local_size_);
    s.resize(local_size_);
    for (size_t i = 0; i < ents.size(); ++i) {
      const auto& en = ents[i];
      int shape = 0;
      double sign = 1.0;
      if (en.dim == 0) {
        shape = t[en.local];
      } else if (en.dim == 1) {
        shape = nv + m.element_edges(e)[en.local] * (p - 1) + en.index;
        const auto& lv = kTetEdgeVertices[en.local];
        if (en.odd && t[lv[0]] > t[lv[1]]) sign = -1.0;
      } else {
        shape = nv + ne * (p - 1) + m.element_faces(e)[en.local];
      }
      for (int c = 0; c < 3; ++c) {
        d[3 * i + c] = 3 * shape + c;
        s[3 * i + c] = sign;
      }
    }
  }
}

void FESpace::build_hdiv() {
  const Mesh& m = *mesh_;
  const int nfd = hdiv_->face_dofs_per_face();
  const int nint = hdiv_->num_interior();
  const int face_block = m.num_faces() * nfd;
  num_dofs_ = face_block + m.num_elements() * nint;
  local_size_ = hdiv_->size();
  dofs_.resize(m.num_elements());
  signs_.resize(m.num_elements());
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto& t = m.tet(e);
    auto& d = dofs_[e];
    auto& s = signs_[e];
    d.resize(local_size_);
    s.resize(local_size_);
    for (int i = 0; i < local_size_; ++i) {
      const auto& dof = hdiv_->dofs()[i];
      if (dof.face < 0) {
        d[i] = face_block + e * nint + dof.interior;
        s[i] = 1.0;
        continue;
      }
      const int gf = m.element_faces(e)[dof.face];
      const Face& face = m.face(gf);
      const int pa = position_in(face.vertices, t[dof.a]);
      const int pb = dof.b < 0 ? -1 : position_in(face.vertices, t[dof.b]);
      d[i] = gf * nfd + canonical_face_index(pa, pb);
      s[i] = (face.elements[0] == e) ? 1.0 : -1.0;
    }
  }
}

void FESpace::build_l2() {
  const Mesh& m = *mesh_;
  const int ncomp = components();
  const int nshape = scalar_->size();
  local_size_ = nshape * ncomp;
  num_dofs_ = m.num_elements() * local_size_;
  dofs_.resize(m.num_elements());
  signs_.assign(m.num_elements(), std::vector<double>(local_size_, 1.0));
  for (int e = 0; e < m.num_elements(); ++e) {
    auto& d = dofs_[e];
    d.resize(local_size_);
    for (int i = 0; i < local_size_; ++i) d[i] = e * local_size_ + i;
  }
}

ReferenceTable FESpace::reference_table(const std::vector<Vec3>& pts) const {
  ReferenceTable ref;
  ref.points = pts;
  const int np = static_cast<int>(pts.size());
  if (kind_ == SpaceKind::Hdiv) {
    const int n = hdiv_->size();
    ref.vec.resize(np);
    ref.div.resize(np, n);
    std::vector<Vec3> v(n);
    std::vector<double> dv(n);
    for (int q = 0; q < np; ++q) {
      hdiv_->eval(pts[q], v.data(), dv.data());
      ref.vec[q].resize(3, n);
      for (int i = 0; i < n; ++i) {
        ref.vec[q].col(i) = v[i];
        ref.div(q, i) = dv[i];
      }
    }
    return ref;
  }
  const int n = scalar_->size();
  ref.shape.resize(np, n);
  ref.grad.resize(np);
  std::vector<double> val(n);
  std::vector<Vec3> g(n);
  for (int q = 0; q < np; ++q) {
    scalar_->eval(pts[q], val.data(), g.data());
    ref.grad[q].resize(3, n);
    for (int i = 0; i < n; ++i) {
      ref.shape(q, i) = val[i];
      ref.grad[q].col(i) = g[i];
    }
  }
  return ref;
}

void FESpace::map_table(int e, const ReferenceTable& ref, BasisTable& out) const {
  const AffineMap geo = mesh_->element_geometry(e);
  const int np = static_cast<int>(ref.points.size());
  const auto& sg = signs_[e];
  out.n = local_size_;
  if (kind_ == SpaceKind::Hdiv) {
    out.num_shapes = 0;
    out.vec.resize(np);
    out.div.resize(np, local_size_);
    const Mat3 piola = geo.jacobian / geo.det;
    const Eigen::Map<const Eigen::RowVectorXd> srow(sg.data(), local_size_);
    for (int q = 0; q < np; ++q) {
      out.vec[q].noalias() = piola * ref.vec[q];
      for (int i = 0; i < local_size_; ++i) out.vec[q].col(i) *= sg[i];
      out.div.row(q) = ref.div.row(q).cwiseProduct(srow) / geo.det;
    }
    return;
  }
  const int ns = static_cast<int>(ref.shape.cols());
  const int ncomp = local_size_ / ns;
  out.num_shapes = ns;
  out.shape = ref.shape;
  for (int i = 0; i < ns; ++i) {
    if (sg[i * ncomp] < 0) out.shape.col(i) *= -1.0;
  }
  out.grad.resize(np);
  for (int q = 0; q < np; ++q) {
    out.grad[q].noalias() = geo.inverse_transpose * ref.grad[q];
    for (int i = 0; i < ns; ++i)
      if (sg[i * ncomp] < 0) out.grad[q].col(i) *= -1.0;
  }
}

BasisTable FESpace::tabulate(int e, const std::vector<Vec3>& pts) const {
  BasisTable t;
  map_table(e, reference_table(pts), t);
  return t;
}

// --- builders -----------------------------------------------------------------

FESpace build_h1_vector_space(const Mesh& mesh, int k, const std::vector<FixedRegion>& fixed,
                              const std::vector<FixedPoint>& points) {
  if (k < 1 || k > 2) {
    throw std::invalid_argument("build_h1_vector_space: k = " + std::to_string(k) +
                                " not supported (1 or 2)");
  }
  FESpace space(mesh, SpaceKind::H1Vector, k + 1);
  const int p = k + 1;
  const int nv = mesh.num_vertices(), ne = mesh.num_edges();
  for (const auto& region : fixed) {
    for (int gf : mesh.region_faces(region.tag)) {
      const Face& face = mesh.face(gf);
      const int e = face.elements[0];
      const int opposite = face.local_index[0];
      std::vector<int> shapes(face.vertices.begin(), face.vertices.end());
      for (int j = 0; j < 6; ++j) {
        const auto& lv = kTetEdgeVertices[j];
        if (lv[0] == opposite || lv[1] == opposite) continue;
        for (int i = 0; i < p - 1; ++i) shapes.push_back(nv + mesh.element_edges(e)[j] * (p - 1) + i);
      }
      if (p >= 3) shapes.push_back(nv + ne * (p - 1) + gf);
      for (int s : shapes)
        for (int c = 0; c < 3; ++c)
          if (region.components[c]) space.constrain(3 * s + c);
    }
  }
  for (const auto& pt : points) {
    const int v = mesh.nearest_vertex(pt.point);
    for (int c = 0; c < 3; ++c)
      if (pt.components[c]) space.constrain(3 * v + c);
  }
  return space;
}

FESpace build_h1_vector_space(const Mesh& mesh, int k, const std::vector<std::string>& fixed) {
  std::vector<FixedRegion> regions;
  for (const auto& tag : fixed) regions.push_back({tag, {true, true, true}});
  return build_h1_vector_space(mesh, k, regions);
}

FESpace build_hdiv_space(const Mesh& mesh, int k, const std::vector<std::string>& insulated,
                         bool reduced) {
  FESpace space(mesh, SpaceKind::Hdiv, k, reduced);
  for (const auto& tag : insulated) {
    for (int gf : mesh.region_faces(tag))
      for (int d : space.face_dofs(gf)) space.constrain(d);
  }
  return space;
}

FESpace build_l2_space(const Mesh& mesh, int order, int components) {
  if (components != 1 && components != 3) {
    throw std::invalid_argument("build_l2_space: components must be 1 or 3");
  }
  return FESpace(mesh, components == 1 ? SpaceKind::L2Scalar : SpaceKind::L2Vector, order);
}

BasisTable evaluate_basis(const FESpace& space, int e, const std::vector<Vec3>& ref_points) {
  return space.tabulate(e, ref_points);
}

// --- field evaluation -----------------------------------------------------------

Eigen::VectorXd evaluate_field(const FESpace& space, const Eigen::VectorXd& coeffs, int e,
                               const Vec3& ref) {
  const BasisTable t = space.tabulate(e, {ref});
  const auto& dofs = space.element_dofs(e);
  if (space.kind() == SpaceKind::Hdiv) {
    Vec3 v = Vec3::Zero();
    for (int i = 0; i < t.n; ++i) v += coeffs[dofs[i]] * t.vec[0].col(i);
    return v;
  }
  const int ncomp = space.components();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ncomp);
  for (int i = 0; i < t.num_shapes; ++i)
    for (int c = 0; c < ncomp; ++c) v[c] += coeffs[dofs[i * ncomp + c]] * t.shape(0, i);
  return v;
}

double evaluate_divergence(const FESpace& space, const Eigen::VectorXd& coeffs, int e,
                           const Vec3& ref) {
  if (space.kind() != SpaceKind::Hdiv) throw std::logic_error("evaluate_divergence: not hdiv");
  const BasisTable t = space.tabulate(e, {ref});
  const auto& dofs = space.element_dofs(e);
  double d = 0.0;
  for (int i = 0; i < t.n; ++i) d += coeffs[dofs[i]] * t.div(0, i);
  return d;
}

Mat3 evaluate_gradient(const FESpace& space, const Eigen::VectorXd& coeffs, int e,
                       const Vec3& ref) {
  if (space.kind() != SpaceKind::H1Vector) throw std::logic_error("evaluate_gradient: not h1");
  const BasisTable t = space.tabulate(e, {ref});
  const auto& dofs = space.element_dofs(e);
  Mat3 g = Mat3::Zero();
  for (int i = 0; i < t.num_shapes; ++i)
    for (int c = 0; c < 3; ++c) g.row(c) += coeffs[dofs[3 * i + c]] * t.grad[0].col(i).transpose();
  return g;
}

// --- interpolation and projection ------------------------------------------------

Eigen::VectorXd face_charge_moments(const FESpace& space, int f, const ScalarFunction& rho) {
  const Mesh& mesh = space.mesh();
  const Face& face = mesh.face(f);
  const int nfd = space.dofs_per_face();
  const QuadratureRule tri = triangle_rule(2 * space.order() + 2);
  const Vec3& x0 = mesh.vertex(face.vertices[0]);
  const Vec3& x1 = mesh.vertex(face.vertices[1]);
  const Vec3& x2 = mesh.vertex(face.vertices[2]);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nfd);
  for (int q = 0; q < tri.size(); ++q) {
    const double s = tri.points[q][0], t = tri.points[q][1];
    const Vec3 x = x0 + s * (x1 - x0) + t * (x2 - x0);
    const double w = tri.weights[q] * 2.0 * face.area * rho(x);
    for (int c = 0; c < nfd; ++c) out[c] += w * canonical_face_weight(c, 1.0 - s - t, s, t);
  }
  return out;
}

Eigen::VectorXd interpolate_hdiv(const FESpace& space, const VectorFunction& field) {
  if (space.kind() != SpaceKind::Hdiv) throw std::logic_error("interpolate_hdiv: not hdiv");
  const Mesh& mesh = space.mesh();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(space.num_dofs());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 n = mesh.face(f).normal;
    const Eigen::VectorXd mom =
        face_charge_moments(space, f, [&](const Vec3& p) { return field(p).dot(n); });
    const auto dofs = space.face_dofs(f);
    for (size_t c = 0; c < dofs.size(); ++c) x[dofs[c]] = mom[c];
  }
  const HdivBasis& basis = *space.hdiv_basis();
  const int nint = basis.num_interior();
  if (nint == 0) return x;
  const QuadratureRule rule = tet_rule(2 * space.order() + 2);
  std::vector<Vec3> tests(nint);
  const int first_interior = static_cast<int>(basis.dofs().size()) - nint;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const AffineMap geo = mesh.element_geometry(e);
    const Mat3 pull = geo.det * geo.jacobian.inverse();
    const auto& dofs = space.element_dofs(e);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec3 vhat = pull * field(geo.map(rule.points[q]));
      basis.eval_interior_tests(rule.points[q], tests.data());
      for (int j = 0; j < nint; ++j) x[dofs[first_interior + j]] += rule.weights[q] * vhat.dot(tests[j]);
    }
  }
  return x;
}

namespace {

template <typename Eval>
Eigen::VectorXd project_impl(const FESpace& space, int ncomp, Eval eval) {
  const Mesh& mesh = space.mesh();
  const int deg = space.scalar_basis()->degree();
  const QuadratureRule rule = tet_rule(2 * deg + 2);
  const ReferenceTable ref = space.reference_table(rule.points);
  const int ns = space.scalar_basis()->size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(space.num_dofs());

  if (space.kind() == SpaceKind::H1Vector) {
    const int nshape = space.num_shapes();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nshape, 3);
    BasisTable t;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      space.map_table(e, ref, t);
      const AffineMap geo = mesh.element_geometry(e);
      const auto& dofs = space.element_dofs(e);
      for (int q = 0; q < rule.size(); ++q) {
        const double w = rule.weights[q] * geo.det;
        const Eigen::VectorXd val = eval(geo.map(rule.points[q]));
        for (int i = 0; i < ns; ++i) {
          const int si = dofs[3 * i] / 3;
          for (int c = 0; c < 3; ++c) rhs(si, c) += w * val[c] * t.shape(q, i);
          for (int j = 0; j < ns; ++j)
            trip.emplace_back(si, dofs[3 * j] / 3, w * t.shape(q, i) * t.shape(q, j));
        }
      }
    }
    Eigen::SparseMatrix<double> mass(nshape, nshape);
    mass.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(mass);
    if (solver.info() != Eigen::Success) throw std::runtime_error("project: mass matrix singular");
    const Eigen::MatrixXd sol = solver.solve(rhs);
    for (int s = 0; s < nshape; ++s)
      for (int c = 0; c < 3; ++c) x[3 * s + c] = sol(s, c);
    return x;
  }

  BasisTable t;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    space.map_table(e, ref, t);
    const AffineMap geo = mesh.element_geometry(e);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ns, ns);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ns, ncomp);
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * geo.det;
      const Eigen::VectorXd val = eval(geo.map(rule.points[q]));
      const Eigen::VectorXd phi = t.shape.row(q).transpose();
      m.noalias() += w * phi * phi.transpose();
      rhs.noalias() += w * phi * val.transpose();
    }
    const Eigen::MatrixXd sol = m.ldlt().solve(rhs);
    const auto& dofs = space.element_dofs(e);
    for (int i = 0; i < ns; ++i)
      for (int c = 0; c < ncomp; ++c) x[dofs[i * ncomp + c]] = sol(i, c);
  }
  return x;
}

}  // namespace

Eigen::VectorXd project(const FESpace& space, const VectorFunction& field) {
  if (space.kind() == SpaceKind::Hdiv) return interpolate_hdiv(space, field);
  if (space.kind() == SpaceKind::L2Scalar) throw std::logic_error("project: scalar space");
  return project_impl(space, 3, [&](const Vec3& x) -> Eigen::VectorXd { return field(x); });
}

Eigen::VectorXd project(const FESpace& space, const ScalarFunction& field) {
  if (space.kind() != SpaceKind::L2Scalar) throw std::logic_error("project: not a scalar space");
  return project_impl(space, 1, [&](const Vec3& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, field(x));
  });
}

double face_flux(const FESpace& space, const Eigen::VectorXd& coeffs, int f) {
  const auto dofs = space.face_dofs(f);
  return coeffs[dofs[0]] + coeffs[dofs[1]] + coeffs[dofs[2]];
}

}  // namespace ferro
