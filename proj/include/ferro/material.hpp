#ifndef FERRO_MATERIAL_HPP
#define FERRO_MATERIAL_HPP

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ferro {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
/// Constitutive variables stacked as [S (Mandel, 6), D (3), Pi (3)].
using StateVector = Eigen::Matrix<double, 12, 1>;
using StateMatrix = Eigen::Matrix<double, 12, 12>;

/// Evaluation outside the admissible polarization range (|Pi| >= P0 without
/// hardening regularization).
class MaterialDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MaterialParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mandel notation: s = [s11, s22, s33, sqrt2 s23, sqrt2 s13, sqrt2 s12], so
// that A:B = a.b and fourth-order tensors with minor symmetries become 6x6.
Vec6 to_mandel(const Mat3& s);
Mat3 from_mandel(const Vec6& s);
/// Component C_ijkl of a fourth-order tensor stored as a Mandel matrix.
double tensor_component(const Mat6& c, int i, int j, int k, int l);
/// Component d_kij of a third-order tensor stored as 3 x 6 Mandel matrix.
double tensor_component(const Mat36& d, int k, int i, int j);

enum class HardeningLaw { Power, Log };
/// Whether `permittivity` is measured at constant strain or constant stress.
enum class PermittivityFlavor { Strain, Stress };
/// Constant permittivity, or isotropic permittivity interpolated linearly in
/// |Pi| / P0 between an unpoled and a poled value.
enum class PermittivityMode { Constant, Interpolated };

struct MaterialParams {
  double youngs = 61e9;      // N/m^2
  double poisson = 0.31;
  double permittivity = 2.77e-8;  // F/m
  PermittivityFlavor flavor = PermittivityFlavor::Strain;
  double d31 = 2.74e-10;     // m/V
  double d33 = 5.93e-10;
  double d15 = -1.0;         // negative: use d33
  double E0 = 820e3;         // V/m
  double P0 = 0.24;          // C/m^2
  double S0 = 9.3e-3;
  double m = 1.4;
  double h0 = 714e3;         // m/F
  HardeningLaw law = HardeningLaw::Power;
  double eps_d = 1e-4 * 0.24;  // C/m^2
  double eps_h = 0.0;          // 0 disables the hardening regularization
  PermittivityMode permittivity_mode = PermittivityMode::Constant;
  double permittivity_unpoled = 0.0;
  double permittivity_poled = 0.0;

  double shear_coupling() const { return d15 < 0.0 ? d33 : d15; }
  /// Throws MaterialParamError on violated invariants.
  void validate() const;
};

/// PZT-5H constants used for the repoling and hole-plate runs.
MaterialParams pzt5h();

struct EnergyFormTensors {
  Mat6 cE;       // stiffness at constant field
  Mat6 cD;       // stiffness at constant dielectric displacement, full poling along z
  Mat36 d_sat;   // piezoelectric strain coefficients, full poling along z
  Mat36 e_sat;   // d_sat : cE
  Mat36 h_sat;   // beta e_sat
  Mat3 epsS;     // permittivity at constant strain
  Mat3 beta;     // inverse of epsS
};

/// Engineering constants to energy-form tensors.  Throws MaterialParamError
/// if the resulting c^D or beta is not positive definite.
EnergyFormTensors build_tensors(const MaterialParams& p);

/// Remanent strain S0/(2 P0^2) (3 Pi Pi^T - |Pi|^2 I); trace free.
Mat3 remanent_strain(const Vec3& pi, const MaterialParams& p);

struct ConstitutiveState {
  Mat3 S = Mat3::Zero();
  Vec3 D = Vec3::Zero();
  Vec3 Pi = Vec3::Zero();
};

struct ConjugateForces {
  Mat3 T;     // stress
  Vec3 E;     // electric field
  Vec3 Ehat;  // driving force, -dpsi/dPi
};

struct HessianBlocks {
  Mat6 SS;
  Mat63 SD;
  Mat63 SPi;
  Mat3 DD;
  Mat3 DPi;
  Mat3 PiPi;
};

/// Free energy psi = psi^r + psi^i and its derivatives.
///
/// psi^r = 1/2 a.cE.a + 1/2 w.beta.w with a = S - S^i(Pi) and
/// w = D - Pi - e(Pi) a, which expands to the stiffness form
/// 1/2 a.c^D.a - a.h.(D - Pi) + 1/2 (D - Pi).beta.(D - Pi) with
/// c^D = cE + e^T beta e and h = beta e.  The coupling e(Pi) = (|Pi|/P0) e_sat
/// rotated to the polarization direction, so it vanishes for Pi = 0.
class Material {
 public:
  explicit Material(const MaterialParams& params);

  const MaterialParams& params() const { return p_; }
  const EnergyFormTensors& tensors() const { return t_; }

  /// Value, gradient and Hessian in the stacked Mandel state; grad / hess
  /// may be null.
  double energy(const StateVector& z, StateVector* grad, StateMatrix* hess) const;

  double psi(const ConstitutiveState& s) const;
  ConjugateForces dpsi(const ConstitutiveState& s) const;
  HessianBlocks d2psi(const ConstitutiveState& s) const;

  /// Hardening part psi^i(Pi), its gradient and Hessian.
  double hardening(const Vec3& pi, Vec3* grad, Mat3* hess) const;
  /// Regularized hardening derivative (requires eps_h > 0).
  Vec3 psi_i_prime_regularized(const Vec3& pi) const;

  /// Regularized dissipation function of the polarization increment.
  double phi_eps(const Vec3& dpi) const;
  Vec3 dphi_eps(const Vec3& dpi) const;
  Mat3 d2phi_eps(const Vec3& dpi) const;

  /// Piezoelectric strain coefficients d(Pi) and their first and second
  /// derivatives with respect to Pi (3 x 6 Mandel each).
  void coupling(const Vec3& pi, Mat36& d, std::array<Mat36, 3>* dd,
                std::array<std::array<Mat36, 3>, 3>* ddd) const;

  /// Permittivity inverse beta(Pi) (constant unless interpolated).
  Mat3 beta(const Vec3& pi) const;

 private:
  MaterialParams p_;
  EnergyFormTensors t_;
};

ConstitutiveState state_from_vector(const StateVector& z);
StateVector state_to_vector(const ConstitutiveState& s);

/// One converged point of the homogeneous-field driver.
struct PointResult {
  double E = 0.0;   // prescribed field component along the load axis
  Vec3 Evec = Vec3::Zero();
  Vec3 D = Vec3::Zero();
  Vec3 Pi = Vec3::Zero();
  Mat3 S = Mat3::Zero();
  int iterations = 0;
  double dissipation = 0.0;  // Ehat . dPi at the converged state
};

struct PointDriverSettings {
  int max_iterations = 100;
  double tolerance = 1e-10;  // on the scaled residual
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int step, double residual)
      : std::runtime_error(what), step_(step), residual_(residual) {}
  int step() const { return step_; }
  double residual() const { return residual_; }

 private:
  int step_;
  double residual_;
};

/// Spatially homogeneous incremental problem: for each prescribed field E_n
/// minimizes psi(S, D, Pi) - E_n.D + phi_eps(Pi - Pi_{n-1}) over (D, Pi) and,
/// if `stress_free`, over S as well (T = 0); otherwise S = 0.  Starts from
/// the zero state.
std::vector<PointResult> run_pointwise_driver(const Material& material,
                                              const std::vector<Vec3>& E_history,
                                              bool stress_free,
                                              const PointDriverSettings& settings = {});

/// Remanent polarization magnitude after poling along an axis with the
/// history 0 -> `peak` -> 0 in `steps` increments each way.
double remanent_polarization(const Material& material, double peak, int steps,
                             bool stress_free = true);

}  // namespace ferro

#endif  // FERRO_MATERIAL_HPP
