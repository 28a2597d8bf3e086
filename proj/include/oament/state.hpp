#pragma once

#include <array>
#include <complex>
#include <numbers>

namespace oament::state {

using cplx = std::complex<double>;

/// Two-level label set of one photon arm: polarization {H, V} or the OAM
/// subspace {+l, -l}. Basis index 0 is H / +l, index 1 is V / -l.
struct ArmBasis {
  enum class Kind { Polarization, Oam };

  Kind kind = Kind::Polarization;
  int l = 0;  // > 0 iff kind == Oam

  static ArmBasis polarization() { return {}; }
  static ArmBasis oam(int l);

  bool is_oam() const { return kind == Kind::Oam; }
  friend bool operator==(const ArmBasis&, const ArmBasis&) = default;
};

enum class Arm { A, B };

/// Pure two-photon state on a 2x2 space. amplitude(i, j) is the coefficient
/// of |a_i>|b_j>.
class TwoPhotonState {
 public:
  /// Throws NormalizationError unless sum |amp|^2 = 1 within 1e-12.
  TwoPhotonState(ArmBasis a, ArmBasis b, const std::array<cplx, 4>& amplitudes);

  const ArmBasis& arm_a() const { return a_; }
  const ArmBasis& arm_b() const { return b_; }
  const ArmBasis& arm(Arm which) const { return which == Arm::A ? a_ : b_; }
  const std::array<cplx, 4>& amplitudes() const { return amp_; }
  cplx amplitude(int i, int j) const { return amp_[2 * i + j]; }

  double norm_squared() const;
  /// det of the 2x2 amplitude matrix; 2|det| is the concurrence.
  cplx schmidt_determinant() const;
  double concurrence() const { return 2.0 * std::abs(schmidt_determinant()); }

 private:
  ArmBasis a_, b_;
  std::array<cplx, 4> amp_;
};

/// Projection ket on one arm.
struct Analyzer {
  ArmBasis basis;
  std::array<cplx, 2> ket;
};

/// Hermitian positive 2x2 operator on one arm (a POVM element). m[i][j] is
/// <i|E|j>. Projectors built from an Analyzer and the slit-mask effects both
/// use this type.
struct Effect {
  ArmBasis basis;
  std::array<std::array<cplx, 2>, 2> m{};

  static Effect projector(const Analyzer& a);
};

/// alpha|H>|V> + e^{i phi} beta|V>|H>. Throws NormalizationError unless
/// alpha^2 + beta^2 = 1 within 1e-9.
TwoPhotonState make_entangled(double alpha, double beta, double phi);

/// Ideal polarization-to-OAM transfer on one arm: H -> +l, V -> -l.
/// Throws InvalidTransferError if the arm already carries OAM or l < 1.
TwoPhotonState transfer_arm(const TwoPhotonState& state, Arm arm, int l);

/// (|+l> + e^{i phi}|-l>)/sqrt2
Analyzer oam_analyzer(int l, double phi);

/// cos(theta)|H> + sin(theta)|V>, theta in radians.
Analyzer polarization_analyzer(double theta);

/// |(<a| x <b|) psi>|^2. Throws AnalyzerMismatchError when an analyzer basis
/// differs from the corresponding arm basis.
double projection_probability(const TwoPhotonState& state, const Analyzer& a, const Analyzer& b);

/// <psi| E_a x E_b |psi>, the joint detection probability for two local effects.
/// source_visibility in [0,1] mixes in the fully dephased state
/// (diagonal part of |psi><psi| in the product basis) with weight 1 - v.
double joint_probability(const TwoPhotonState& state, const Effect& a, const Effect& b,
                         double source_visibility = 1.0);

/// Marginal detection probability of one arm, <psi| E x 1 |psi> (or 1 x E).
double marginal_probability(const TwoPhotonState& state, Arm arm, const Effect& e);

/// Petal-orientation angle of a mask (degrees) to superposition phase (radians):
/// phi = 2 l gamma pi/180.
double mask_angle_to_phase(double gamma_deg, int l);
double phase_to_mask_angle(double phi, int l);

inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

}  // namespace oament::state
