#include "oament/state.hpp"

#include <cmath>
#include <string>

#include "oament/errors.hpp"

namespace oament::state {

namespace {

constexpr double kNormTolerance = 1e-12;

std::string describe(const ArmBasis& b) {
  return b.is_oam() ? "oam(l=" + std::to_string(b.l) + ")" : "polarization";
}

void require_same_basis(const ArmBasis& expected, const ArmBasis& got, const char* arm) {
  if (!(expected == got))
    throw AnalyzerMismatchError(std::string("arm ") + arm + " is " + describe(expected) +
                                " but analyzer is " + describe(got));
}

}  // namespace

ArmBasis ArmBasis::oam(int l) {
  if (l < 1) throw ValidationError("OAM arm requires l >= 1, got " + std::to_string(l));
  return {Kind::Oam, l};
}

TwoPhotonState::TwoPhotonState(ArmBasis a, ArmBasis b, const std::array<cplx, 4>& amplitudes)
    : a_(a), b_(b), amp_(amplitudes) {
  const double n = norm_squared();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTolerance)
    throw NormalizationError("two-photon state has squared norm " + std::to_string(n));
}

double TwoPhotonState::norm_squared() const {
  double n = 0.0;
  for (const auto& c : amp_) n += std::norm(c);
  return n;
}

cplx TwoPhotonState::schmidt_determinant() const {
  return amp_[0] * amp_[3] - amp_[1] * amp_[2];
}

Effect Effect::projector(const Analyzer& a) {
  Effect e{a.basis, {}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) e.m[i][j] = a.ket[i] * std::conj(a.ket[j]);
  return e;
}

TwoPhotonState make_entangled(double alpha, double beta, double phi) {
  if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-9)
    throw NormalizationError("alpha^2 + beta^2 must equal 1, got " +
                             std::to_string(alpha * alpha + beta * beta));
  // Renormalize so the 1e-9 input tolerance does not trip the 1e-12 state invariant.
  const double n = std::hypot(alpha, beta);
  const auto p = ArmBasis::polarization();
  return TwoPhotonState(p, p, {0.0, alpha / n, std::polar(beta / n, phi), 0.0});
}

TwoPhotonState transfer_arm(const TwoPhotonState& state, Arm arm, int l) {
  if (state.arm(arm).is_oam())
    throw InvalidTransferError("arm already carries OAM (l=" + std::to_string(state.arm(arm).l) + ")");
  if (l < 1) throw InvalidTransferError("transfer requires l >= 1, got " + std::to_string(l));
  const auto target = ArmBasis::oam(l);
  // Index 0 (H) becomes +l and index 1 (V) becomes -l, so amplitudes carry over unchanged.
  return arm == Arm::A ? TwoPhotonState(target, state.arm_b(), state.amplitudes())
                       : TwoPhotonState(state.arm_a(), target, state.amplitudes());
}

Analyzer oam_analyzer(int l, double phi) {
  return {ArmBasis::oam(l), {cplx(kInvSqrt2, 0.0), std::polar(kInvSqrt2, phi)}};
}

Analyzer polarization_analyzer(double theta) {
  return {ArmBasis::polarization(), {cplx(std::cos(theta), 0.0), cplx(std::sin(theta), 0.0)}};
}

double projection_probability(const TwoPhotonState& state, const Analyzer& a, const Analyzer& b) {
  require_same_basis(state.arm_a(), a.basis, "A");
  require_same_basis(state.arm_b(), b.basis, "B");
  cplx overlap = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      overlap += std::conj(a.ket[i]) * std::conj(b.ket[j]) * state.amplitude(i, j);
  return std::norm(overlap);
}

double joint_probability(const TwoPhotonState& state, const Effect& a, const Effect& b,
                         double source_visibility) {
  require_same_basis(state.arm_a(), a.basis, "A");
  require_same_basis(state.arm_b(), b.basis, "B");
  if (!(source_visibility >= 0.0 && source_visibility <= 1.0))
    throw ValidationError("source visibility must lie in [0,1]");

  // <psi| A x B |psi> = sum conj(psi_ij) A_ik B_jm psi_km
  cplx coherent = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int m = 0; m < 2; ++m)
          coherent += std::conj(state.amplitude(i, j)) * a.m[i][k] * b.m[j][m] * state.amplitude(k, m);

  double dephased = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      dephased += std::norm(state.amplitude(i, j)) * a.m[i][i].real() * b.m[j][j].real();

  return source_visibility * coherent.real() + (1.0 - source_visibility) * dephased;
}

double marginal_probability(const TwoPhotonState& state, Arm arm, const Effect& e) {
  Effect identity{state.arm(arm == Arm::A ? Arm::B : Arm::A), {}};
  identity.m[0][0] = identity.m[1][1] = 1.0;
  return arm == Arm::A ? joint_probability(state, e, identity) : joint_probability(state, identity, e);
}

double mask_angle_to_phase(double gamma_deg, int l) {
  if (l < 1) throw ValidationError("l must be >= 1");
  return 2.0 * l * gamma_deg * std::numbers::pi / 180.0;
}

double phase_to_mask_angle(double phi, int l) {
  if (l < 1) throw ValidationError("l must be >= 1");
  return phi / (2.0 * l) * 180.0 / std::numbers::pi;
}

}  // namespace oament::state
