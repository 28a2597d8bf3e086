#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "oament/counts.hpp"
#include "oament/errors.hpp"

namespace oament::counts {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Estimate visibility_from_projections(double c_par, double c_perp) {
  if (!(c_par >= 0.0 && c_perp >= 0.0)) throw ValidationError("projection counts must be >= 0");
  const double total = c_par + c_perp;
  if (!(total > 0.0)) throw UndefinedVisibilityError("both projections are zero; visibility undefined");
  return {(c_par - c_perp) / total, std::sqrt(4.0 * c_par * c_perp / (total * total * total))};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Entangled: return "entangled";
    case Verdict::SeparableCompatible: return "separable-compatible";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

WitnessResult witness(Estimate vis_1, Estimate vis_2, double k) {
  if (!(k >= 0.0)) throw ValidationError("significance threshold k must be >= 0");
  if (std::abs(vis_1.value) > 1.0 || std::abs(vis_2.value) > 1.0)
    throw ValidationError("visibilities must lie in [-1, 1]");
  WitnessResult r;
  r.vis_1 = vis_1;
  r.vis_2 = vis_2;
  r.k = k;
  r.w = vis_1.value + vis_2.value;
  r.w_sigma = std::hypot(vis_1.sigma, vis_2.sigma);
  const double excess = r.w - kSeparableBound;
  r.exceedance_sigma = r.w_sigma > 0.0 ? excess / r.w_sigma : (excess > 0 ? INFINITY : -INFINITY);
  if (excess <= 0.0)
    r.verdict = Verdict::SeparableCompatible;
  else if (r.w - k * r.w_sigma > kSeparableBound)
    r.verdict = Verdict::Entangled;
  else
    r.verdict = Verdict::Inconclusive;
  return r;
}

MubAngles mub_angles(int l, double gamma1_deg) {
  if (l < 1) throw ValidationError("l must be >= 1");
  const double g2 = gamma1_deg + 45.0 / l;
  return {gamma1_deg, gamma1_deg + 90.0 / l, g2, g2 + 90.0 / l};
}

double projection_witness(const state::TwoPhotonState& st, double gamma1_deg) {
  auto analyzer = [](const state::ArmBasis& basis, double angle_deg) {
    return basis.is_oam() ? state::oam_analyzer(basis.l, state::mask_angle_to_phase(angle_deg, basis.l))
                          : state::polarization_analyzer(angle_deg * std::numbers::pi / 180.0);
  };
  const int la = st.arm_a().is_oam() ? st.arm_a().l : 1;
  const int lb = st.arm_b().is_oam() ? st.arm_b().l : 1;
  const auto ma = mub_angles(la, gamma1_deg);
  const auto mb = mub_angles(lb, gamma1_deg);
  auto p = [&](double ga, double gb) {
    return state::projection_probability(st, analyzer(st.arm_a(), ga), analyzer(st.arm_b(), gb));
  };
  return p(ma.gamma1, mb.gamma1) - p(ma.gamma1, mb.gamma1_perp) + p(ma.gamma2, mb.gamma2) -
         p(ma.gamma2, mb.gamma2_perp);
}

double separable_witness(double a, double c, double phi1, double phi2) {
  const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
  const double d = std::sqrt(std::max(0.0, 1.0 - c * c));
  return c * d *
         (std::cos(phi2) * (1.0 + 2.0 * a * b * std::cos(phi1)) + std::sin(phi2) * (1.0 + 2.0 * a * b * std::sin(phi1)));
}

BoundResult separable_bound_oracle(int steps) {
  if (steps < 32) throw ValidationError("separable bound oracle needs at least 32 grid steps");

  std::vector<double> amp(steps), phase(steps), cphase(steps), sphase(steps);
  for (int i = 0; i < steps; ++i) {
    amp[i] = static_cast<double>(i) / (steps - 1);
    phase[i] = kTwoPi * i / steps;
    cphase[i] = std::cos(phase[i]);
    sphase[i] = std::sin(phase[i]);
  }

  // The witness factorizes as h(c) * g(a, phi1, phi2) with h = c sqrt(1-c^2) >= 0,
  // so the 4-D grid maximum is the product of the two sub-grid maxima.
  int best_c = 0;
  double best_h = -1.0;
  for (int i = 0; i < steps; ++i) {
    const double h = amp[i] * std::sqrt(std::max(0.0, 1.0 - amp[i] * amp[i]));
    if (h > best_h) {
      best_h = h;
      best_c = i;
    }
  }
  std::array<int, 3> best_g{0, 0, 0};
  double best_gv = -INFINITY;
  for (int ia = 0; ia < steps; ++ia) {
    const double ab2 = 2.0 * amp[ia] * std::sqrt(std::max(0.0, 1.0 - amp[ia] * amp[ia]));
    for (int i1 = 0; i1 < steps; ++i1) {
      const double x = 1.0 + ab2 * cphase[i1];
      const double y = 1.0 + ab2 * sphase[i1];
      for (int i2 = 0; i2 < steps; ++i2) {
        const double g = cphase[i2] * x + sphase[i2] * y;
        if (g > best_gv) {
          best_gv = g;
          best_g = {ia, i1, i2};
        }
      }
    }
  }

  // Compass search on the full function from the best grid point.
  std::array<double, 4> p{amp[best_g[0]], amp[best_c], phase[best_g[1]], phase[best_g[2]]};
  auto f = [](const std::array<double, 4>& q) { return separable_witness(q[0], q[1], q[2], q[3]); };
  auto clamp_point = [](std::array<double, 4>& q) {
    q[0] = std::clamp(q[0], 0.0, 1.0);
    q[1] = std::clamp(q[1], 0.0, 1.0);
  };
  double fp = f(p);
  std::array<double, 4> step{1.0 / (steps - 1), 1.0 / (steps - 1), kTwoPi / steps, kTwoPi / steps};
  while (*std::max_element(step.begin(), step.end()) > 1e-13) {
    bool improved = false;
    for (int dim = 0; dim < 4; ++dim) {
      for (double sign : {1.0, -1.0}) {
        auto q = p;
        q[dim] += sign * step[dim];
        clamp_point(q);
        const double fq = f(q);
        if (fq > fp) {
          p = q;
          fp = fq;
          improved = true;
        }
      }
    }
    if (!improved)
      for (auto& s : step) s *= 0.5;
  }

  BoundResult r;
  r.value = fp;
  r.a = p[0];
  r.b = std::sqrt(std::max(0.0, 1.0 - p[0] * p[0]));
  r.c = p[1];
  r.d = std::sqrt(std::max(0.0, 1.0 - p[1] * p[1]));
  r.phi1 = std::fmod(p[2] + kTwoPi, kTwoPi);
  r.phi2 = std::fmod(p[3] + kTwoPi, kTwoPi);
  r.grid_steps = steps;
  return r;
}

}  // namespace oament::counts
