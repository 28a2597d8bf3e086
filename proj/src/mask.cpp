#include "oament/mask.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "oament/errors.hpp"

namespace oament::mask {

using state::cplx;
using state::Effect;

namespace {

void require_matching(const SlitMask& mask, const state::ArmBasis& arm) {
  if (!arm.is_oam())
    throw MaskMismatchError("slit mask placed on a polarization-encoded arm");
  if (arm.l != mask.l)
    throw MaskMismatchError("mask has " + std::to_string(mask.slit_count()) + " slits but the mode has l=" +
                            std::to_string(arm.l));
}

}  // namespace

SlitMask::SlitMask(int l_, double width_ratio_, double orientation_deg_)
    : l(l_), width_ratio(width_ratio_), orientation_deg(orientation_deg_) {
  if (l < 1) throw ValidationError("slit mask requires l >= 1");
  if (!(width_ratio > 0.0 && width_ratio <= 1.0))
    throw ValidationError("slit width ratio must lie in (0, 1], got " + std::to_string(width_ratio));
}

bool is_open(const SlitMask& mask, double theta_deg) {
  const double period = mask.period_deg();
  double d = std::fmod(theta_deg - mask.orientation_deg, period);
  if (d < 0.0) d += period;
  if (d > 0.5 * period) d -= period;
  return std::abs(d) <= 0.5 * mask.width_ratio * period;
}

double visibility_factor(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw ValidationError("slit width ratio must lie in (0, 1]");
  const double x = std::numbers::pi * r;
  // series avoids 0/0 cancellation for very narrow slits
  if (x < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double transmission_probability(const SlitMask& mask, int l, double phi) {
  if (mask.l != l)
    throw MaskMismatchError("mask has " + std::to_string(mask.slit_count()) + " slits but the mode has l=" +
                            std::to_string(l));
  const double r = mask.width_ratio;
  const double phi_mask = state::mask_angle_to_phase(mask.orientation_deg, l);
  return 0.5 * r * (1.0 + visibility_factor(r) * std::cos(phi_mask - phi));
}

Effect mask_effect(const SlitMask& mask) {
  const double r = mask.width_ratio;
  const double v = visibility_factor(r);
  const double phi = state::mask_angle_to_phase(mask.orientation_deg, mask.l);
  Effect e{state::ArmBasis::oam(mask.l), {}};
  e.m[0][0] = e.m[1][1] = 0.5 * r;
  e.m[0][1] = std::polar(0.5 * r * v, -phi);
  e.m[1][0] = std::polar(0.5 * r * v, phi);
  return e;
}

Effect polarizer_effect(double theta_deg) {
  return Effect::projector(state::polarization_analyzer(theta_deg * std::numbers::pi / 180.0));
}

double coincidence_probability(const state::TwoPhotonState& st, const SlitMask& mask_a,
                               const SlitMask& mask_b, double source_visibility) {
  require_matching(mask_a, st.arm_a());
  require_matching(mask_b, st.arm_b());
  return state::joint_probability(st, mask_effect(mask_a), mask_effect(mask_b), source_visibility);
}

double hybrid_coincidence_probability(const state::TwoPhotonState& st, double polarizer_deg,
                                      const SlitMask& mask, double source_visibility) {
  const bool pol_on_a = !st.arm_a().is_oam();
  if (pol_on_a == !st.arm_b().is_oam())
    throw MaskMismatchError("hybrid measurement needs exactly one polarization arm and one OAM arm");
  if (pol_on_a) {
    require_matching(mask, st.arm_b());
    return state::joint_probability(st, polarizer_effect(polarizer_deg), mask_effect(mask), source_visibility);
  }
  require_matching(mask, st.arm_a());
  return state::joint_probability(st, mask_effect(mask), polarizer_effect(polarizer_deg), source_visibility);
}

}  // namespace oament::mask
