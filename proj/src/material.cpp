#include "ferro/material.hpp"

#include <cmath>
#include <sstream>

namespace ferro {

namespace {

constexpr std::array<std::array<int, 2>, 6> kMandelPairs = {
    {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};
const double kSqrt2 = std::sqrt(2.0);

double mandel_weight(int I) { return I < 3 ? 1.0 : kSqrt2; }

int delta(int a, int b) { return a == b ? 1 : 0; }

Mat6 isotropic_stiffness(double youngs, double nu) {
  const double lambda = youngs * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = youngs / (2.0 * (1.0 + nu));
  Mat6 c = 2.0 * mu * Mat6::Identity();
  c.topLeftCorner<3, 3>().array() += lambda;
  return c;
}

bool positive_definite(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (a + a.transpose()));
  return llt.info() == Eigen::Success;
}

}  // namespace

Vec6 to_mandel(const Mat3& s) {
  Vec6 v;
  for (int I = 0; I < 6; ++I) {
    const auto [i, j] = kMandelPairs[I];
    v[I] = I < 3 ? s(i, j) : 0.5 * kSqrt2 * (s(i, j) + s(j, i));
  }
  return v;
}

Mat3 from_mandel(const Vec6& v) {
  Mat3 s;
  for (int I = 0; I < 6; ++I) {
    const auto [i, j] = kMandelPairs[I];
    s(i, j) = s(j, i) = v[I] / mandel_weight(I);
  }
  return s;
}

namespace {
int mandel_index(int i, int j) {
  if (i == j) return i;
  const int s = i + j;  // (1,2) -> 3, (0,2) -> 2, (0,1) -> 1
  return s == 3 ? 3 : s == 2 ? 4 : 5;
}
}  // namespace

double tensor_component(const Mat6& c, int i, int j, int k, int l) {
  const int I = mandel_index(i, j), J = mandel_index(k, l);
  return c(I, J) / (mandel_weight(I) * mandel_weight(J));
}

double tensor_component(const Mat36& d, int k, int i, int j) {
  const int I = mandel_index(i, j);
  return d(k, I) / mandel_weight(I);
}

// --- parameters -------------------------------------------------------------------

void MaterialParams::validate() const {
  auto fail = [](const std::string& msg) { throw MaterialParamError("material: " + msg); };
  if (!(youngs > 0.0)) fail("Young's modulus must be positive");
  if (!(poisson > -1.0 && poisson < 0.5)) fail("Poisson ratio must lie in (-1, 1/2)");
  if (!(P0 > 0.0)) fail("P0 must be positive");
  if (!(E0 > 0.0)) fail("E0 must be positive");
  if (!(S0 > 0.0)) fail("S0 must be positive");
  if (!(h0 > 0.0)) fail("h0 must be positive");
  if (!(eps_d > 0.0)) fail("eps_d must be positive");
  if (!(eps_h >= 0.0 && eps_h < P0)) fail("eps_h must lie in [0, P0)");
  if (law == HardeningLaw::Power && (!(m > 1.0) || m == 2.0)) {
    fail("power-law shape parameter m must be > 1 and != 2");
  }
  if (permittivity_mode == PermittivityMode::Constant && !(permittivity > 0.0)) {
    fail("permittivity must be positive");
  }
  if (permittivity_mode == PermittivityMode::Interpolated &&
      !(permittivity_unpoled > 0.0 && permittivity_poled > 0.0)) {
    fail("interpolated permittivity needs positive unpoled and poled values");
  }
}

MaterialParams pzt5h() { return MaterialParams{}; }

// --- tensors ------------------------------------------------------------------------

namespace {

// d_kij for full poling along unit vector n
Mat36 saturated_coupling(const MaterialParams& p, const Vec3& n) {
  const double d15 = p.shear_coupling();
  const double A = p.d33 - p.d31 - d15;
  Mat36 d;
  for (int k = 0; k < 3; ++k)
    for (int I = 0; I < 6; ++I) {
      const auto [i, j] = kMandelPairs[I];
      const double v = A * n[k] * n[i] * n[j] + p.d31 * n[k] * delta(i, j) +
                       0.5 * d15 * (delta(k, i) * n[j] + delta(k, j) * n[i]);
      d(k, I) = mandel_weight(I) * v;
    }
  return d;
}

}  // namespace

EnergyFormTensors build_tensors(const MaterialParams& p) {
  p.validate();
  EnergyFormTensors t;
  t.cE = isotropic_stiffness(p.youngs, p.poisson);
  t.d_sat = saturated_coupling(p, Vec3::UnitZ());
  t.e_sat = t.d_sat * t.cE;
  if (p.permittivity_mode == PermittivityMode::Interpolated) {
    t.epsS = p.permittivity_poled * Mat3::Identity();
  } else if (p.flavor == PermittivityFlavor::Strain) {
    t.epsS = p.permittivity * Mat3::Identity();
  } else {
    t.epsS = p.permittivity * Mat3::Identity() - t.d_sat * t.cE * t.d_sat.transpose();
  }
  if (!positive_definite(t.epsS)) {
    throw MaterialParamError(
        "material: permittivity at constant strain is not positive definite "
        "(coupling too strong for the given constant-stress permittivity)");
  }
  t.beta = t.epsS.inverse();
  t.h_sat = t.beta * t.e_sat;
  t.cD = t.cE + t.e_sat.transpose() * t.beta * t.e_sat;
  if (!positive_definite(t.cD)) {
    throw MaterialParamError("material: stiffness c^D is not positive definite");
  }
  return t;
}

Mat3 remanent_strain(const Vec3& pi, const MaterialParams& p) {
  const double c = p.S0 / (2.0 * p.P0 * p.P0);
  return c * (3.0 * pi * pi.transpose() - pi.squaredNorm() * Mat3::Identity());
}

// --- material -----------------------------------------------------------------------

Material::Material(const MaterialParams& params) : p_(params), t_(build_tensors(params)) {}

void Material::coupling(const Vec3& pi, Mat36& d, std::array<Mat36, 3>* dd,
                        std::array<std::array<Mat36, 3>, 3>* ddd) const {
  const double P0 = p_.P0;
  const double d31 = p_.d31, d15 = p_.shear_coupling();
  const double A = p_.d33 - d31 - d15;
  const double r = pi.norm();
  const bool at_zero = r == 0.0;
  const Vec3 n = at_zero ? Vec3::Zero() : Vec3(pi / r);

  for (int k = 0; k < 3; ++k)
    for (int I = 0; I < 6; ++I) {
      const auto [i, j] = kMandelPairs[I];
      const double g = r * n[k] * n[i] * n[j];
      const double v = A * g + d31 * pi[k] * delta(i, j) +
                       0.5 * d15 * (delta(k, i) * pi[j] + delta(k, j) * pi[i]);
      d(k, I) = mandel_weight(I) * v / P0;
    }
  if (dd) {
    for (int q = 0; q < 3; ++q) {
      Mat36& out = (*dd)[q];
      for (int k = 0; k < 3; ++k)
        for (int I = 0; I < 6; ++I) {
          const auto [i, j] = kMandelPairs[I];
          // derivative of r n_k n_i n_j; the cone term is dropped at Pi = 0
          const double dg = at_zero ? 0.0
                                    : delta(k, q) * n[i] * n[j] + n[k] * delta(i, q) * n[j] +
                                          n[k] * n[i] * delta(j, q) - 2.0 * n[k] * n[i] * n[j] * n[q];
          const double v = A * dg + d31 * delta(k, q) * delta(i, j) +
                           0.5 * d15 * (delta(k, i) * delta(j, q) + delta(k, j) * delta(i, q));
          out(k, I) = mandel_weight(I) * v / P0;
        }
    }
  }
  if (ddd) {
    for (int q = 0; q < 3; ++q)
      for (int s = 0; s < 3; ++s) {
        Mat36& out = (*ddd)[q][s];
        if (at_zero) {
          out.setZero();
          continue;
        }
        for (int k = 0; k < 3; ++k)
          for (int I = 0; I < 6; ++I) {
            const auto [i, j] = kMandelPairs[I];
            const double t1 = delta(k, q) * (delta(i, s) * n[j] + n[i] * delta(j, s)) +
                              delta(i, q) * (delta(k, s) * n[j] + n[k] * delta(j, s)) +
                              delta(j, q) * (delta(k, s) * n[i] + n[k] * delta(i, s));
            const double t2 =
                (delta(k, q) * n[i] * n[j] + n[k] * delta(i, q) * n[j] + n[k] * n[i] * delta(j, q)) *
                n[s];
            const double t3 = delta(k, s) * n[i] * n[j] * n[q] + n[k] * delta(i, s) * n[j] * n[q] +
                              n[k] * n[i] * delta(j, s) * n[q] + n[k] * n[i] * n[j] * delta(q, s);
            const double t4 = n[k] * n[i] * n[j] * n[q] * n[s];
            const double v = A * (t1 - 2.0 * t2 - 2.0 * t3 + 8.0 * t4) / r;
            out(k, I) = mandel_weight(I) * v / P0;
          }
      }
  }
}

Mat3 Material::beta(const Vec3& pi) const {
  if (p_.permittivity_mode == PermittivityMode::Constant) return t_.beta;
  const double x = pi.norm() / p_.P0;
  const double eps = p_.permittivity_unpoled + (p_.permittivity_poled - p_.permittivity_unpoled) * x;
  return Mat3::Identity() / eps;
}

namespace {

struct Radial {
  double f = 0.0;    // value
  double fr = 0.0;   // f'(r) / r
  double fpp = 0.0;  // f''(r)
};

Radial hardening_radial(const MaterialParams& p, double r) {
  const double P0 = p.P0, h0 = p.h0;
  auto unregularized = [&](double rr) {
    Radial out;
    if (!(rr < P0)) {
      std::ostringstream msg;
      msg << "|Pi| = " << rr << " reaches the saturation polarization P0 = " << P0;
      throw MaterialDomainError(msg.str());
    }
    const double x = rr / P0;
    if (p.law == HardeningLaw::Power) {
      const double m = p.m;
      out.f = h0 * P0 * P0 / ((m - 1.0) * (m - 2.0)) * std::pow(1.0 - x, 2.0 - m) -
              h0 * P0 * rr / (m - 1.0);
      // f' = h0 P0 / (m - 1) [(1 - x)^(1 - m) - 1]
      const double bracket = std::expm1((1.0 - m) * std::log1p(-x));
      out.fr = rr > 0.0 ? h0 * P0 / (m - 1.0) * bracket / rr : h0;
      out.fpp = h0 * std::pow(1.0 - x, -m);
    } else {
      out.f = h0 * P0 * (rr * std::atanh(x) + 0.5 * P0 * std::log1p(-x * x));
      out.fr = rr > 0.0 ? h0 * P0 * std::atanh(x) / rr : h0;
      out.fpp = h0 / (1.0 - x * x);
    }
    return out;
  };
  if (p.eps_h > 0.0) {
    const double rc = P0 - p.eps_h;
    if (r > rc) {
      // quadratic continuation with gradient f'(rc) Pi / rc
      const Radial c = unregularized(rc);
      Radial out;
      out.fr = c.fr;
      out.fpp = c.fr;
      out.f = c.f + 0.5 * c.fr * (r * r - rc * rc);
      return out;
    }
  }
  return unregularized(r);
}

}  // namespace

double Material::hardening(const Vec3& pi, Vec3* grad, Mat3* hess) const {
  const double r = pi.norm();
  const Radial h = hardening_radial(p_, r);
  if (grad) *grad = h.fr * pi;
  if (hess) {
    if (r > 0.0) {
      const Vec3 n = pi / r;
      *hess = h.fpp * n * n.transpose() + h.fr * (Mat3::Identity() - n * n.transpose());
    } else {
      *hess = h.fr * Mat3::Identity();
    }
  }
  return h.f;
}

Vec3 Material::psi_i_prime_regularized(const Vec3& pi) const {
  if (!(p_.eps_h > 0.0)) {
    throw MaterialParamError("psi_i_prime_regularized requires eps_h > 0");
  }
  Vec3 g;
  hardening(pi, &g, nullptr);
  return g;
}

double Material::energy(const StateVector& z, StateVector* grad, StateMatrix* hess) const {
  const Vec6 S = z.head<6>();
  const Vec3 D = z.segment<3>(6);
  const Vec3 pi = z.tail<3>();
  const Mat6& C = t_.cE;

  // remanent strain and its derivatives (Mandel)
  const double c0 = p_.S0 / (2.0 * p_.P0 * p_.P0);
  const Vec6 Si = to_mandel(c0 * (3.0 * pi * pi.transpose() - pi.squaredNorm() * Mat3::Identity()));
  Mat63 G;
  for (int q = 0; q < 3; ++q) {
    const Vec3 eq = Vec3::Unit(q);
    G.col(q) = to_mandel(c0 * (3.0 * (eq * pi.transpose() + pi * eq.transpose()) -
                               2.0 * pi[q] * Mat3::Identity()));
  }

  Mat36 d;
  std::array<Mat36, 3> dd;
  std::array<std::array<Mat36, 3>, 3> ddd;
  coupling(pi, d, (grad || hess) ? &dd : nullptr, hess ? &ddd : nullptr);
  const Mat36 e = d * C;

  const Vec6 a = S - Si;
  const Vec3 w = D - pi - e * a;
  const Mat3 B = beta(pi);
  const Vec6 t = C * a;
  const Vec3 E = B * w;

  Vec3 gi;
  Mat3 Hi;
  const double psi_i = hardening(pi, (grad || hess) ? &gi : nullptr, hess ? &Hi : nullptr);
  const double psi = 0.5 * a.dot(t) + 0.5 * w.dot(E) + psi_i;
  if (!grad && !hess) return psi;

  // permittivity variation with |Pi|
  const bool varying = p_.permittivity_mode == PermittivityMode::Interpolated && pi.norm() > 0.0;
  double bp = 0.0, bpp = 0.0;
  Vec3 n = Vec3::Zero();
  if (varying) {
    const double r = pi.norm();
    n = pi / r;
    const double de = (p_.permittivity_poled - p_.permittivity_unpoled) / p_.P0;
    const double eps = p_.permittivity_unpoled + de * r;
    bp = -de / (eps * eps);
    bpp = 2.0 * de * de / (eps * eps * eps);
  }

  std::array<Mat36, 3> e_p;
  for (int q = 0; q < 3; ++q) e_p[q] = dd[q] * C;
  Mat3 JwPi;
  for (int q = 0; q < 3; ++q) JwPi.col(q) = -Vec3::Unit(q) - e_p[q] * a + e * G.col(q);

  if (grad) {
    grad->head<6>() = t - e.transpose() * E;
    grad->segment<3>(6) = E;
    Vec3 gpi = -G.transpose() * t + JwPi.transpose() * E + gi;
    if (varying) gpi += 0.5 * w.squaredNorm() * bp * n;
    grad->tail<3>() = gpi;
  }
  if (hess) {
    Eigen::Matrix<double, 6, 12> Ja = Eigen::Matrix<double, 6, 12>::Zero();
    Ja.leftCols<6>().setIdentity();
    Ja.rightCols<3>() = -G;
    Eigen::Matrix<double, 3, 12> Jw;
    Jw.leftCols<6>() = -e;
    Jw.block<3, 3>(0, 6).setIdentity();
    Jw.rightCols<3>() = JwPi;
    StateMatrix H = Ja.transpose() * C * Ja + Jw.transpose() * B * Jw;

    // curvature of a(Pi) and w(S, Pi)
    for (int p = 0; p < 3; ++p) {
      const Vec6 ep_E = e_p[p].transpose() * E;
      H.block<6, 1>(0, 9 + p) -= ep_E;
      H.block<1, 6>(9 + p, 0) -= ep_E.transpose();
      for (int q = 0; q < 3; ++q) {
        const Vec3 up = Vec3::Unit(p), uq = Vec3::Unit(q);
        const Vec6 G2 = to_mandel(c0 * (3.0 * (up * uq.transpose() + uq * up.transpose()) -
                                        2.0 * delta(p, q) * Mat3::Identity()));
        const Mat36 e_pq = ddd[p][q] * C;
        const Vec3 w_pq = -e_pq * a + e_p[p] * G.col(q) + e_p[q] * G.col(p) + e * G2;
        H(9 + p, 9 + q) += -t.dot(G2) + E.dot(w_pq);
      }
    }
    if (varying) {
      const Mat3 Pn = Mat3::Identity() - n * n.transpose();
      const Mat3 beta_pq = bpp * n * n.transpose() + bp / pi.norm() * Pn;
      for (int p = 0; p < 3; ++p) {
        const StateVector col = Jw.transpose() * (bp * n[p] * w);
        H.col(9 + p) += col;
        H.row(9 + p) += col.transpose();
      }
      H.bottomRightCorner<3, 3>() += 0.5 * w.squaredNorm() * beta_pq;
    }
    H.bottomRightCorner<3, 3>() += Hi;
    *hess = 0.5 * (H + H.transpose());
  }
  return psi;
}

ConstitutiveState state_from_vector(const StateVector& z) {
  ConstitutiveState s;
  s.S = from_mandel(z.head<6>());
  s.D = z.segment<3>(6);
  s.Pi = z.tail<3>();
  return s;
}

StateVector state_to_vector(const ConstitutiveState& s) {
  StateVector z;
  z.head<6>() = to_mandel(s.S);
  z.segment<3>(6) = s.D;
  z.tail<3>() = s.Pi;
  return z;
}

double Material::psi(const ConstitutiveState& s) const {
  return energy(state_to_vector(s), nullptr, nullptr);
}

ConjugateForces Material::dpsi(const ConstitutiveState& s) const {
  StateVector g;
  energy(state_to_vector(s), &g, nullptr);
  return {from_mandel(g.head<6>()), g.segment<3>(6), -g.tail<3>()};
}

HessianBlocks Material::d2psi(const ConstitutiveState& s) const {
  StateMatrix h;
  energy(state_to_vector(s), nullptr, &h);
  HessianBlocks b;
  b.SS = h.topLeftCorner<6, 6>();
  b.SD = h.block<6, 3>(0, 6);
  b.SPi = h.block<6, 3>(0, 9);
  b.DD = h.block<3, 3>(6, 6);
  b.DPi = h.block<3, 3>(6, 9);
  b.PiPi = h.block<3, 3>(9, 9);
  return b;
}

// --- dissipation ----------------------------------------------------------------------

double Material::phi_eps(const Vec3& q) const {
  const double r = q.norm(), eps = p_.eps_d;
  return r >= eps ? p_.E0 * (r - 0.5 * eps) : 0.5 * p_.E0 * r * r / eps;
}

Vec3 Material::dphi_eps(const Vec3& q) const {
  const double r = q.norm(), eps = p_.eps_d;
  return r >= eps ? Vec3(p_.E0 * q / r) : Vec3(p_.E0 * q / eps);
}

Mat3 Material::d2phi_eps(const Vec3& q) const {
  const double r = q.norm(), eps = p_.eps_d;
  if (r >= eps) {
    const Vec3 n = q / r;
    return p_.E0 / r * (Mat3::Identity() - n * n.transpose());
  }
  return p_.E0 / eps * Mat3::Identity();
}

// --- homogeneous driver -----------------------------------------------------------------

namespace {

// Incremental objective psi - E.D + phi_eps(Pi - Pi_prev) restricted to the
// active unknowns ([S, D, Pi] if stress free, else [D, Pi]).
struct PointProblem {
  const Material& mat;
  Vec3 E;
  Vec3 pi_prev;
  bool stress_free;

  int offset() const { return stress_free ? 0 : 6; }

  double eval(const StateVector& z, Eigen::VectorXd* r, Eigen::MatrixXd* J) const {
    StateVector g;
    StateMatrix h;
    const Vec3 dpi = z.tail<3>() - pi_prev;
    const double f = mat.energy(z, r ? &g : nullptr, J ? &h : nullptr) - E.dot(z.segment<3>(6)) +
                     mat.phi_eps(dpi);
    const int n = 12 - offset();
    if (r) {
      g.segment<3>(6) -= E;
      g.tail<3>() += mat.dphi_eps(dpi);
      *r = g.tail(n);
    }
    if (J) {
      h.bottomRightCorner<3, 3>() += mat.d2phi_eps(dpi);
      *J = h.bottomRightCorner(n, n);
    }
    return f;
  }
};

// Newton direction for a possibly indefinite Hessian: shift by a multiple of
// its diagonal until the Cholesky factorization succeeds.
Eigen::VectorXd descent_direction(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) {
  const Eigen::VectorXd d = H.diagonal().cwiseAbs().cwiseMax(1e-300);
  double tau = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::MatrixXd A = H;
    A.diagonal() += tau * d;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) return llt.solve(-g);
    tau = tau == 0.0 ? 1e-10 : 10.0 * tau;
  }
  return -g.cwiseQuotient(d);
}

}  // namespace

std::vector<PointResult> run_pointwise_driver(const Material& material,
                                              const std::vector<Vec3>& E_history,
                                              bool stress_free,
                                              const PointDriverSettings& settings) {
  Vec3 axis = Vec3::UnitZ();
  double best = 0.0;
  for (const auto& E : E_history)
    if (E.norm() > best) {
      best = E.norm();
      axis = E / best;
    }

  const MaterialParams& p = material.params();
  const double energy_scale = std::sqrt(p.E0 * p.P0);
  StateVector z = StateVector::Zero();
  std::vector<PointResult> out;
  out.reserve(E_history.size());

  for (size_t step = 0; step < E_history.size(); ++step) {
    const PointProblem prob{material, E_history[step], z.tail<3>(), stress_free};
    const int n = 12 - prob.offset();
    auto fail = [&](const char* why, double norm) {
      std::ostringstream msg;
      msg << "pointwise driver: " << why << " at step " << step << " (E = "
          << E_history[step].transpose() << ", scaled residual " << norm << ")";
      throw ConvergenceError(msg.str(), static_cast<int>(step), norm);
    };

    int it = 0;
    for (;; ++it) {
      Eigen::VectorXd r;
      Eigen::MatrixXd J;
      const double f = prob.eval(z, &r, &J);
      // residual scaled by sqrt of the Hessian diagonal: energy-density units
      Eigen::VectorXd scale = J.diagonal().cwiseAbs().cwiseSqrt();
      for (int i = 0; i < n; ++i)
        if (!(scale[i] > 0.0)) scale[i] = 1.0;
      const double norm = r.cwiseQuotient(scale).norm();
      if (norm <= settings.tolerance * energy_scale) break;
      if (it >= settings.max_iterations) fail("no convergence", norm);

      // Armijo on the objective; near round-off level of f fall back to a
      // decrease of the scaled residual
      const Eigen::VectorXd dx = descent_direction(J, r);
      const double slope = r.dot(dx);
      bool accepted = false;
      double alpha = 1.0;
      for (int ls = 0; ls < 40 && !accepted; ++ls, alpha *= 0.5) {
        StateVector trial = z;
        trial.tail(n) += alpha * dx;
        Eigen::VectorXd rt;
        double ft;
        try {
          ft = prob.eval(trial, &rt, nullptr);
        } catch (const MaterialDomainError&) {
          continue;
        }
        const bool armijo = ft <= f + 1e-4 * alpha * slope;
        const bool residual_drop = rt.cwiseQuotient(scale).norm() <= (1.0 - 1e-4 * alpha) * norm &&
                                   std::abs(ft - f) <= 1e-10 * (std::abs(f) + energy_scale);
        if (armijo || residual_drop) {
          z = trial;
          accepted = true;
        }
      }
      if (!accepted) fail("line search failed", norm);
    }

    PointResult res;
    res.Evec = E_history[step];
    res.E = res.Evec.dot(axis);
    const ConstitutiveState st = state_from_vector(z);
    res.S = st.S;
    res.D = st.D;
    res.Pi = st.Pi;
    res.iterations = it;
    const Vec3 dpi = st.Pi - prob.pi_prev;
    res.dissipation = material.dphi_eps(dpi).dot(dpi);
    out.push_back(res);
  }
  return out;
}

double remanent_polarization(const Material& material, double peak, int steps,
                             bool stress_free) {
  std::vector<Vec3> history;
  for (int i = 1; i <= steps; ++i) history.push_back(Vec3(0, 0, peak * i / steps));
  for (int i = steps - 1; i >= 0; --i) history.push_back(Vec3(0, 0, peak * i / steps));
  const auto res = run_pointwise_driver(material, history, stress_free);
  return res.back().Pi.norm();
}

}  // namespace ferro
