#pragma once

#include "oament/state.hpp"

namespace oament::mask {

/// Laser-cut angular aperture with 2l equally spaced slits. Slit k is centered
/// at orientation + k * period; orientation 0 puts a slit center on theta = 0.
struct SlitMask {
  int l = 1;
  double width_ratio = 1.0;      // slit width / slit period, in (0, 1]
  double orientation_deg = 0.0;

  SlitMask() = default;
  /// Throws ValidationError for l < 1 or width_ratio outside (0, 1].
  SlitMask(int l, double width_ratio, double orientation_deg = 0.0);

  int slit_count() const { return 2 * l; }
  double period_deg() const { return 360.0 / (2.0 * l); }
  SlitMask rotated(double delta_deg) const { return {l, width_ratio, orientation_deg + delta_deg}; }
};

bool is_open(const SlitMask& mask, double theta_deg);

/// sin(pi r)/(pi r): contrast left after averaging the cos^2 petal profile over
/// a slit of relative width r.
double visibility_factor(double width_ratio);

/// Transmission of the equal superposition (|+l> + e^{i phi}|-l>)/sqrt2:
/// (r/2) [1 + sinc(r) cos(2 l gamma - phi)]. Throws MaskMismatchError if mask.l != l.
double transmission_probability(const SlitMask& mask, int l, double phi);

/// Slit mask as a POVM element on the {+l, -l} subspace,
/// (r/2) [[1, V e^{-i phi_gamma}], [V e^{i phi_gamma}, 1]] with V = sinc(r).
state::Effect mask_effect(const SlitMask& mask);

/// Ideal polarizer at theta_deg (Malus projector).
state::Effect polarizer_effect(double theta_deg);

/// Joint transmission through one mask per arm (both arms OAM).
double coincidence_probability(const state::TwoPhotonState& state, const SlitMask& mask_a,
                               const SlitMask& mask_b, double source_visibility = 1.0);

/// One arm behind a polarizer, the other behind a mask; the arm assignment is
/// read from the state's arm bases.
double hybrid_coincidence_probability(const state::TwoPhotonState& state, double polarizer_deg,
                                      const SlitMask& mask, double source_visibility = 1.0);

}  // namespace oament::mask
