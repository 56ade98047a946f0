#include "ferro/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace ferro {

// --- discretization ----------------------------------------------------------------

Discretization::Discretization(const Mesh& mesh, int k, const BoundarySetup& bc,
                               HdivVariant variant)
    : mesh_(&mesh), k_(k), variant_(variant), bc_(bc) {
  if (k < 1 || k > 2) {
    throw std::invalid_argument("discretization: order k = " + std::to_string(k) +
                                " not supported (1 or 2)");
  }
  for (const auto& tag : bc.insulated) {
    if (!mesh.has_region(tag)) throw AssemblyError("unknown insulated region '" + tag + "'");
  }
  for (const auto& r : bc.fixed) {
    if (!mesh.has_region(r.tag)) throw AssemblyError("unknown fixed region '" + r.tag + "'");
  }
  const bool reduced = variant == HdivVariant::Reduced;
  spaces_.push_back(build_h1_vector_space(mesh, k, bc.fixed, bc.fixed_points));
  spaces_.push_back(build_hdiv_space(mesh, k, bc.insulated, reduced));
  spaces_.push_back(build_l2_space(mesh, k, 3));
  spaces_.push_back(build_l2_space(mesh, reduced ? 0 : k - 1, 1));

  offsets_[0] = 0;
  for (int f = 0; f < 4; ++f) offsets_[f + 1] = offsets_[f] + spaces_[f].num_dofs();
  constrained_.assign(num_dofs(), 0);
  for (int f = 0; f < 4; ++f) {
    const auto& mask = spaces_[f].constrained();
    for (size_t i = 0; i < mask.size(); ++i) constrained_[offsets_[f] + i] = mask[i];
  }
  if (bc.freeze_polarization)
    std::fill(constrained_.begin() + offsets_[2], constrained_.begin() + offsets_[3], 1);

  // integrands are non-polynomial through psi^i and |Pi|; fixed rule
  rule_ = tet_rule(2 * (k + 1) + 2);
  for (int f = 0; f < 4; ++f) refs_[f] = spaces_[f].reference_table(rule_.points);
}

std::vector<int> Discretization::element_dofs(int e) const {
  std::vector<int> out;
  for (int f = 0; f < 4; ++f) {
    for (int d : spaces_[f].element_dofs(e)) out.push_back(offsets_[f] + d);
  }
  return out;
}

void EssentialValues::impose(Eigen::VectorXd& x) const {
  for (size_t i = 0; i < dofs.size(); ++i) x[dofs[i]] = values[i];
}

// --- boundary data ------------------------------------------------------------------

namespace {

void check_loads(const Discretization& disc, const LoadData& loads) {
  const Mesh& mesh = disc.mesh();
  const auto& ins = disc.boundary().insulated;
  std::set<std::string> seen;
  for (const auto& el : loads.electrodes) {
    if (!mesh.has_region(el.tag)) throw AssemblyError("unknown electrode region '" + el.tag + "'");
    if (std::find(ins.begin(), ins.end(), el.tag) != ins.end()) {
      throw AssemblyError("region '" + el.tag + "' is both an electrode and insulated");
    }
    if (!seen.insert(el.tag).second) {
      throw AssemblyError("electrode region '" + el.tag + "' listed twice");
    }
  }
  for (const auto& t : loads.tractions) {
    if (!mesh.has_region(t.tag)) throw AssemblyError("unknown traction region '" + t.tag + "'");
  }
}

}  // namespace

EssentialValues apply_essential_bcs(const Discretization& disc, const LoadData& loads) {
  check_loads(disc, loads);
  EssentialValues ev;
  const auto& mask = disc.constrained();
  // displacements: zero
  const int ou = disc.offset(Field::U);
  for (int i = 0; i < disc.num_dofs(Field::U); ++i) {
    if (mask[ou + i]) {
      ev.dofs.push_back(ou + i);
      ev.values.push_back(0.0);
    }
  }
  // normal charge on insulated faces
  const FESpace& D = disc.space(Field::D);
  const int od = disc.offset(Field::D);
  const Mesh& mesh = disc.mesh();
  for (const auto& tag : disc.boundary().insulated) {
    for (int f : mesh.region_faces(tag)) {
      const auto dofs = D.face_dofs(f);
      Eigen::VectorXd mom = Eigen::VectorXd::Zero(dofs.size());
      if (loads.surface_charge) {
        const Vec3 n = mesh.face(f).normal;
        mom = face_charge_moments(D, f, [&](const Vec3& y) { return loads.surface_charge(y, n); });
      }
      for (size_t c = 0; c < dofs.size(); ++c) {
        ev.dofs.push_back(od + dofs[c]);
        ev.values.push_back(mom[c]);
      }
    }
  }
  return ev;
}

Eigen::VectorXd external_work_vector(const Discretization& disc, const LoadData& loads,
                                     double lambda) {
  check_loads(disc, loads);
  const Mesh& mesh = disc.mesh();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc.num_dofs());
  const FESpace& U = disc.space(Field::U);
  const int ou = disc.offset(Field::U);

  if (loads.body_force.squaredNorm() > 0.0) {
    const QuadratureRule& rule = disc.rule();
    const ReferenceTable& ref = disc.reference(Field::U);
    const int ns = U.scalar_basis()->size();
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const double det = mesh.element_geometry(e).det;
      const auto& dofs = U.element_dofs(e);
      for (int q = 0; q < rule.size(); ++q) {
        const double w = rule.weights[q] * det * lambda;
        for (int i = 0; i < ns; ++i)
          for (int c = 0; c < 3; ++c) out[ou + dofs[3 * i + c]] += w * ref.shape(q, i) * loads.body_force[c];
      }
    }
  }

  if (!loads.tractions.empty()) {
    const ScalarBasis& sb = *U.scalar_basis();
    const QuadratureRule tri = triangle_rule(2 * sb.degree());
    std::vector<double> vals(sb.size());
    std::vector<Vec3> grads(sb.size());
    for (const auto& t : loads.tractions) {
      for (int f : mesh.region_faces(t.tag)) {
        const Face& face = mesh.face(f);
        const int e = face.elements[0];
        const AffineMap geo = mesh.element_geometry(e);
        const auto& dofs = U.element_dofs(e);
        const Vec3& x0 = mesh.vertex(face.vertices[0]);
        const Vec3& x1 = mesh.vertex(face.vertices[1]);
        const Vec3& x2 = mesh.vertex(face.vertices[2]);
        for (int q = 0; q < tri.size(); ++q) {
          const double s = tri.points[q][0], r = tri.points[q][1];
          const Vec3 x = x0 + s * (x1 - x0) + r * (x2 - x0);
          sb.eval(geo.pullback(x), vals.data(), grads.data());
          const double w = tri.weights[q] * 2.0 * face.area * lambda;
          for (int i = 0; i < sb.size(); ++i)
            for (int c = 0; c < 3; ++c) out[ou + dofs[3 * i + c]] += w * vals[i] * t.traction[c];
        }
      }
    }
  }

  // electrodes: -lambda V0 int dD.n; only the vertex-keyed face moments carry flux
  const FESpace& D = disc.space(Field::D);
  const int od = disc.offset(Field::D);
  for (const auto& el : loads.electrodes) {
    for (int f : mesh.region_faces(el.tag)) {
      const auto dofs = D.face_dofs(f);
      for (int c = 0; c < 3; ++c) out[od + dofs[c]] -= lambda * el.potential;
    }
  }
  return out;
}

// --- element kernel ---------------------------------------------------------------------

namespace {

struct ElementTables {
  BasisTable u, d, pi, phi;
};

struct ElementWork {
  std::vector<int> dofs;
  Eigen::VectorXd r;
  Eigen::MatrixXd k;
  double energy = 0.0;
};

// Mandel strain rows of the local u dofs at point q
void strain_matrix(const BasisTable& u, int q, Eigen::Ref<Eigen::MatrixXd> B) {
  static const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  const double r2 = std::sqrt(0.5);  // sqrt2 * 1/2
  const auto& g = u.grad[q];
  for (int i = 0; i < u.num_shapes; ++i) {
    for (int c = 0; c < 3; ++c) {
      const int col = 3 * i + c;
      for (int I = 0; I < 6; ++I) {
        const int a = pairs[I][0], b = pairs[I][1];
        if (I < 3) {
          B(I, col) = (c == a) ? g(a, i) : 0.0;
        } else {
          B(I, col) = r2 * ((c == a ? g(b, i) : 0.0) + (c == b ? g(a, i) : 0.0));
        }
      }
    }
  }
}

class ElementKernel {
 public:
  ElementKernel(const Discretization& disc, const Material& mat, const AssemblyOptions& opt)
      : disc_(disc), mat_(mat), opt_(opt) {
    nu_ = disc.space(Field::U).local_size();
    nd_ = disc.space(Field::D).local_size();
    np_ = disc.space(Field::Pi).local_size();
    nf_ = disc.space(Field::Phi).local_size();
    n_ = nu_ + nd_ + np_ + nf_;
  }

  int size() const { return n_; }

  /// want: 0 energy only, 1 residual, 2 residual + tangent.  `multiplier`
  /// adds the phi div(D - D0) term to the energy.
  void run(int e, const SystemState& s, int want, bool multiplier, ElementWork& w) {
    const Mesh& mesh = disc_.mesh();
    const double det = mesh.element_geometry(e).det;
    disc_.space(Field::U).map_table(e, disc_.reference(Field::U), t_.u);
    disc_.space(Field::D).map_table(e, disc_.reference(Field::D), t_.d);
    disc_.space(Field::Pi).map_table(e, disc_.reference(Field::Pi), t_.pi);
    disc_.space(Field::Phi).map_table(e, disc_.reference(Field::Phi), t_.phi);

    w.dofs = disc_.element_dofs(e);
    Eigen::VectorXd xl(n_), x0l(n_);
    for (int i = 0; i < n_; ++i) {
      xl[i] = s.x[w.dofs[i]];
      x0l[i] = s.x0[w.dofs[i]];
    }
    if (want >= 1) w.r.setZero(n_);
    if (want >= 2) w.k.setZero(n_, n_);
    w.energy = 0.0;

    const int od = nu_, op = nu_ + nd_, of = nu_ + nd_ + np_;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(12, op + np_);  // rows [S, D, Pi]
    Eigen::VectorXd divrow(nd_), phirow(nf_);
    StateVector g;
    StateMatrix H;
    const QuadratureRule& rule = disc_.rule();
    const int nps = t_.pi.num_shapes;

    for (int q = 0; q < rule.size(); ++q) {
      q_ = q;
      const double wq = rule.weights[q] * det;
      strain_matrix(t_.u, q, B.block(0, 0, 6, nu_));
      B.block(6, od, 3, nd_) = t_.d.vec[q];
      B.block(9, op, 3, np_).setZero();
      for (int i = 0; i < nps; ++i)
        for (int c = 0; c < 3; ++c) B(9 + c, op + 3 * i + c) = t_.pi.shape(q, i);
      divrow = t_.d.div.row(q).transpose();
      phirow = t_.phi.shape.row(q).transpose();

      const StateVector z = B * xl.head(op + np_);
      const StateVector z0 = B * x0l.head(op + np_);
      const Vec3 dpi = z.tail<3>() - z0.tail<3>();
      const double divdD = divrow.dot(xl.segment(od, nd_) - x0l.segment(od, nd_));
      const double phi = phirow.dot(xl.segment(of, nf_));

      double psi, psi0;
      try {
        psi = mat_.energy(z, want >= 1 ? &g : nullptr, want >= 2 ? &H : nullptr);
        psi0 = want == 0 ? mat_.energy(z0, nullptr, nullptr) : 0.0;
      } catch (const MaterialDomainError& err) {
        std::ostringstream msg;
        msg << err.what() << " (element " << e << ", quadrature point " << q << ")";
        throw MaterialDomainError(msg.str());
      }

      if (want == 0) {
        w.energy += wq * (psi - psi0 + mat_.phi_eps(dpi));
        if (multiplier) w.energy -= wq * phi * divdD;
        continue;
      }
      g.tail<3>() += mat_.dphi_eps(dpi);
      w.r.head(op + np_).noalias() += wq * B.transpose() * g;
      w.r.segment(od, nd_) -= wq * phi * divrow;
      w.r.segment(of, nf_) -= wq * divdD * phirow;
      if (want >= 2) {
        if (opt_.stiff_dissipation) {
          const MaterialParams& p = mat_.params();
          H.bottomRightCorner<3, 3>() += p.E0 / p.eps_d * Mat3::Identity();
        } else {
          H.bottomRightCorner<3, 3>() += mat_.d2phi_eps(dpi);
        }
        if (opt_.convexify) convexify(H);
        add_btdb(wq, H, B, w.k);
        w.k.block(od, of, nd_, nf_).noalias() -= wq * divrow * phirow.transpose();
        w.k.block(of, od, nf_, nd_).noalias() -= wq * phirow * divrow.transpose();
      }
    }
  }

 private:
  // |H| in the metric of its diagonal: negative curvature flipped, so the
  // tangent stays positive definite where psi loses convexity.
  static void convexify(StateMatrix& H) {
    StateVector d = H.diagonal().cwiseAbs();
    for (int i = 0; i < 12; ++i) d[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 1.0;
    const StateMatrix Hs = d.asDiagonal() * H * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<StateMatrix> eig(Hs);
    if (eig.eigenvalues().minCoeff() >= 0.0) return;
    const StateMatrix A = eig.eigenvectors() * eig.eigenvalues().cwiseAbs().asDiagonal() *
                          eig.eigenvectors().transpose();
    const StateVector inv = d.cwiseInverse();
    H = inv.asDiagonal() * A * inv.asDiagonal();
  }

  // k[0:m, 0:m] += wq B^T H B using the block pattern of B: a strain column
  // has three nonzeros, D rows act on D only, and the Pi rows are shape
  // functions times unit vectors.
  void add_btdb(double wq, const StateMatrix& H, const Eigen::MatrixXd& B, Eigen::MatrixXd& k) {
    // Mandel shear rows holding component a, and the gradient entry they take
    static const int shear[3][2][2] = {{{4, 2}, {5, 1}}, {{3, 2}, {5, 0}}, {{3, 1}, {4, 0}}};
    const int od = nu_, op = nu_ + nd_, m = op + np_;
    const int nps = t_.pi.num_shapes, nus = t_.u.num_shapes;
    const double r2 = std::sqrt(0.5);
    const auto& gu = t_.u.grad[q_];
    // sparse strain columns: three (row, value) pairs each
    su_row_.resize(3 * nu_);
    su_val_.resize(3 * nu_);
    for (int i = 0; i < nus; ++i)
      for (int a = 0; a < 3; ++a) {
        const int c = 3 * (3 * i + a);
        su_row_[c] = a;
        su_val_[c] = gu(a, i);
        for (int s = 0; s < 2; ++s) {
          su_row_[c + 1 + s] = shear[a][s][0];
          su_val_[c + 1 + s] = r2 * gu(shear[a][s][1], i);
        }
      }
    const StateMatrix Hw = wq * H;
    HB_.resize(12, m);
    for (int c = 0; c < nu_; ++c)
      HB_.col(c) = su_val_[3 * c] * Hw.col(su_row_[3 * c]) + su_val_[3 * c + 1] * Hw.col(su_row_[3 * c + 1]) +
                   su_val_[3 * c + 2] * Hw.col(su_row_[3 * c + 2]);
    HB_.middleCols(od, nd_).noalias() = Hw.middleCols<3>(6).lazyProduct(B.block(6, od, 3, nd_));
    for (int i = 0; i < nps; ++i) HB_.middleCols<3>(op + 3 * i) = t_.pi.shape(q_, i) * Hw.rightCols<3>();
    // K = B^T HB, column by column
    for (int j = 0; j < m; ++j) {
      const StateVector t = HB_.col(j);
      double* kc = k.col(j).data();
      for (int c = 0; c < nu_; ++c)
        kc[c] += su_val_[3 * c] * t[su_row_[3 * c]] + su_val_[3 * c + 1] * t[su_row_[3 * c + 1]] +
                 su_val_[3 * c + 2] * t[su_row_[3 * c + 2]];
      for (int c = 0; c < nd_; ++c)
        kc[od + c] += B(6, od + c) * t[6] + B(7, od + c) * t[7] + B(8, od + c) * t[8];
      for (int i = 0; i < nps; ++i) {
        const double N = t_.pi.shape(q_, i);
        kc[op + 3 * i] += N * t[9];
        kc[op + 3 * i + 1] += N * t[10];
        kc[op + 3 * i + 2] += N * t[11];
      }
    }
  }

  const Discretization& disc_;
  const Material& mat_;
  AssemblyOptions opt_;
  Eigen::MatrixXd HB_;
  std::vector<int> su_row_;
  std::vector<double> su_val_;
  int q_ = 0;
  int nu_ = 0, nd_ = 0, np_ = 0, nf_ = 0, n_ = 0;
  ElementTables t_;
};

// Splits the element loop over threads; `body(kernel, e, accum)` accumulates
// into a per-thread object that is merged in thread order.
template <typename Accum, typename Body>
std::vector<Accum> parallel_elements(const Discretization& disc, const Material& mat,
                                     const AssemblyOptions& opt, Accum proto, Body body) {
  const int ne = disc.mesh().num_elements();
  const int nt = std::max(1, std::min(opt.threads, ne));
  std::vector<Accum> acc(nt, proto);
  std::vector<std::exception_ptr> errors(nt);
  auto worker = [&](int t) {
    try {
      ElementKernel kernel(disc, mat, opt);
      const int lo = static_cast<int>(static_cast<long>(ne) * t / nt);
      const int hi = static_cast<int>(static_cast<long>(ne) * (t + 1) / nt);
      for (int e = lo; e < hi; ++e) body(kernel, e, acc[t]);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (nt == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return acc;
}

void check_state(const Discretization& disc, const SystemState& s) {
  if (s.x.size() != disc.num_dofs() || s.x0.size() != disc.num_dofs()) {
    throw AssemblyError("state vector length does not match the discretization");
  }
}

}  // namespace

void assemble_system(const Discretization& disc, const Material& material, const LoadData& loads,
                     const SystemState& state, Eigen::VectorXd* residual, SparseMatrix* tangent,
                     const AssemblyOptions& opt) {
  check_state(disc, state);
  const int N = disc.num_dofs();
  const int want = tangent ? 2 : 1;
  struct Accum {
    Eigen::VectorXd r;
    std::vector<Eigen::Triplet<double>> trip;
  };
  Accum proto;
  proto.r = Eigen::VectorXd::Zero(N);
  const auto& mask = disc.constrained();

  auto acc = parallel_elements(disc, material, opt, proto,
                               [&](ElementKernel& kernel, int e, Accum& a) {
                                 ElementWork w;
                                 kernel.run(e, state, want, false, w);
                                 const int n = kernel.size();
                                 for (int i = 0; i < n; ++i) a.r[w.dofs[i]] += w.r[i];
                                 if (want < 2) return;
                                 for (int j = 0; j < n; ++j) {
                                   if (mask[w.dofs[j]]) continue;
                                   for (int i = 0; i < n; ++i) {
                                     if (mask[w.dofs[i]] || w.k(i, j) == 0.0) continue;
                                     a.trip.emplace_back(w.dofs[i], w.dofs[j], w.k(i, j));
                                   }
                                 }
                               });

  if (residual) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(N);
    for (const auto& a : acc) r += a.r;
    r -= external_work_vector(disc, loads, state.lambda);
    for (int i = 0; i < N; ++i)
      if (mask[i]) r[i] = 0.0;
    *residual = std::move(r);
  }
  if (tangent) {
    size_t total = 0;
    for (const auto& a : acc) total += a.trip.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(total + N);
    for (auto& a : acc) trip.insert(trip.end(), a.trip.begin(), a.trip.end());
    for (int i = 0; i < N; ++i)
      if (mask[i]) trip.emplace_back(i, i, 1.0);
    SparseMatrix K(N, N);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    *tangent = std::move(K);
  }
}

Eigen::VectorXd assemble_residual(const Discretization& disc, const Material& material,
                                  const LoadData& loads, const SystemState& state,
                                  const AssemblyOptions& opt) {
  Eigen::VectorXd r;
  assemble_system(disc, material, loads, state, &r, nullptr, opt);
  return r;
}

SparseMatrix assemble_tangent(const Discretization& disc, const Material& material,
                              const LoadData& loads, const SystemState& state,
                              const AssemblyOptions& opt) {
  SparseMatrix k;
  assemble_system(disc, material, loads, state, nullptr, &k, opt);
  return k;
}

namespace {

double objective(const Discretization& disc, const Material& material, const LoadData& loads,
                 const SystemState& state, bool multiplier) {
  check_state(disc, state);
  AssemblyOptions opt;
  double total = 0.0;
  auto acc = parallel_elements(disc, material, opt, 0.0,
                               [&](ElementKernel& kernel, int e, double& a) {
                                 ElementWork w;
                                 kernel.run(e, state, 0, multiplier, w);
                                 a += w.energy;
                               });
  for (double a : acc) total += a;
  const Eigen::VectorXd l = external_work_vector(disc, loads, state.lambda);
  return total - l.dot(state.x - state.x0);
}

}  // namespace

double incremental_potential(const Discretization& disc, const Material& material,
                             const LoadData& loads, const SystemState& state) {
  return objective(disc, material, loads, state, true);
}

double incremental_energy(const Discretization& disc, const Material& material,
                          const LoadData& loads, const SystemState& state) {
  return objective(disc, material, loads, state, false);
}

// --- diagnostics --------------------------------------------------------------------------

namespace {

ConstitutiveState state_at(const Discretization& disc, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& d, const Eigen::VectorXd& pi, int e,
                           const Vec3& ref) {
  ConstitutiveState s;
  const Mat3 grad = evaluate_gradient(disc.space(Field::U), u, e, ref);
  s.S = 0.5 * (grad + grad.transpose());
  s.D = evaluate_field(disc.space(Field::D), d, e, ref);
  s.Pi = evaluate_field(disc.space(Field::Pi), pi, e, ref);
  return s;
}

}  // namespace

DissipationSummary dissipation(const Discretization& disc, const Material& material,
                               const SystemState& state) {
  check_state(disc, state);
  const Mesh& mesh = disc.mesh();
  const FESpace& P = disc.space(Field::Pi);
  const Eigen::VectorXd u = disc.field(state.x, Field::U);
  const Eigen::VectorXd d = disc.field(state.x, Field::D);
  const Eigen::VectorXd pi = disc.field(state.x, Field::Pi);
  const Eigen::VectorXd pi0 = disc.field(state.x0, Field::Pi);
  const QuadratureRule& rule = disc.rule();
  DissipationSummary out;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double det = mesh.element_geometry(e).det;
    for (int q = 0; q < rule.size(); ++q) {
      const ConstitutiveState st = state_at(disc, u, d, pi, e, rule.points[q]);
      const Vec3 dp = st.Pi - evaluate_field(P, pi0, e, rule.points[q]);
      const double w = rule.weights[q] * det;
      out.phi_eps += w * material.phi_eps(dp);
      out.power += w * material.dpsi(st).Ehat.dot(dp);
    }
  }
  return out;
}

double max_divergence(const Discretization& disc, const Eigen::VectorXd& x, int samples,
                      unsigned seed) {
  const FESpace& D = disc.space(Field::D);
  const Eigen::VectorXd d = disc.field(x, Field::D);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int e = 0; e < disc.mesh().num_elements(); ++e) {
    for (int s = 0; s < samples; ++s) {
      // uniform point in the reference tet via sorted barycentrics
      std::array<double, 3> c{u(rng), u(rng), u(rng)};
      std::sort(c.begin(), c.end());
      const Vec3 ref(c[0], c[1] - c[0], c[2] - c[1]);
      worst = std::max(worst, std::abs(evaluate_divergence(D, d, e, ref)));
    }
  }
  return worst;
}

double field_magnitude(const Discretization& disc, const Eigen::VectorXd& x, Field f) {
  const FESpace& S = disc.space(f);
  const Eigen::VectorXd v = disc.field(x, f);
  const QuadratureRule& rule = disc.rule();
  double worst = 0.0;
  for (int e = 0; e < disc.mesh().num_elements(); ++e) {
    double l2 = 0.0;
    const double det = disc.mesh().element_geometry(e).det;
    for (int q = 0; q < rule.size(); ++q) {
      l2 += rule.weights[q] * det * evaluate_field(S, v, e, rule.points[q]).squaredNorm();
    }
    worst = std::max(worst, std::sqrt(l2 / disc.mesh().element_volume(e)));
  }
  return worst;
}

double region_charge(const Discretization& disc, const Eigen::VectorXd& x, const std::string& tag) {
  const FESpace& D = disc.space(Field::D);
  const Eigen::VectorXd d = disc.field(x, Field::D);
  double total = 0.0;
  for (int f : disc.mesh().region_faces(tag)) total += face_flux(D, d, f);
  return total;
}

double insulated_charge(const Discretization& disc, const LoadData& loads) {
  if (!loads.surface_charge) return 0.0;
  const Mesh& mesh = disc.mesh();
  const QuadratureRule tri = triangle_rule(2 * disc.order() + 2);
  double total = 0.0;
  for (const auto& tag : disc.boundary().insulated) {
    for (int f : mesh.region_faces(tag)) {
      const Face& face = mesh.face(f);
      const Vec3& x0 = mesh.vertex(face.vertices[0]);
      const Vec3& x1 = mesh.vertex(face.vertices[1]);
      const Vec3& x2 = mesh.vertex(face.vertices[2]);
      for (int q = 0; q < tri.size(); ++q) {
        const Vec3 p = x0 + tri.points[q][0] * (x1 - x0) + tri.points[q][1] * (x2 - x0);
        total += tri.weights[q] * 2.0 * face.area * loads.surface_charge(p, face.normal);
      }
    }
  }
  return total;
}

ConstitutiveState evaluate_state(const Discretization& disc, const Eigen::VectorXd& x, int e,
                                 const Vec3& ref) {
  return state_at(disc, disc.field(x, Field::U), disc.field(x, Field::D),
                  disc.field(x, Field::Pi), e, ref);
}

}  // namespace ferro
