#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oament/errors.hpp"
#include "oament/state.hpp"

using namespace oament;
using namespace oament::state;

namespace {

constexpr double pi = std::numbers::pi;

// Born rule written out on the 4-dim product space.
double born(const TwoPhotonState& s, const Analyzer& a, const Analyzer& b) {
  cplx amp = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) amp += std::conj(a.ket[i] * b.ket[j]) * s.amplitudes()[2 * i + j];
  return std::norm(amp);
}

TwoPhotonState random_state(std::mt19937_64& rng, ArmBasis a, ArmBasis b) {
  std::normal_distribution<double> n;
  std::array<cplx, 4> amp;
  double norm = 0.0;
  for (auto& c : amp) {
    c = {n(rng), n(rng)};
    norm += std::norm(c);
  }
  for (auto& c : amp) c /= std::sqrt(norm);
  return {a, b, amp};
}

}  // namespace

TEST_CASE("make_entangled builds alpha|HV> + e^{i phi} beta|VH>") {
  const auto s = make_entangled(0.6, 0.8, pi / 3);
  CHECK(s.amplitude(0, 0) == cplx(0.0));
  CHECK(s.amplitude(0, 1).real() == doctest::Approx(0.6));
  CHECK(std::abs(s.amplitude(1, 0) - std::polar(0.8, pi / 3)) < 1e-15);
  CHECK(s.amplitude(1, 1) == cplx(0.0));
  CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(s.arm_a().is_oam());
  CHECK_FALSE(s.arm_b().is_oam());
}

TEST_CASE("make_entangled rejects unnormalized weights") {
  CHECK_THROWS_AS(make_entangled(0.6, 0.6, 0.0), NormalizationError);
  CHECK_THROWS_AS(make_entangled(1.0, 1.0, 0.0), ValidationError);
  CHECK_NOTHROW(make_entangled(kInvSqrt2, kInvSqrt2 + 1e-10, 0.0));
}

TEST_CASE("TwoPhotonState enforces the norm") {
  const auto p = ArmBasis::polarization();
  CHECK_THROWS_AS(TwoPhotonState(p, p, {1.0, 1.0, 0.0, 0.0}), NormalizationError);
  CHECK_NOTHROW(TwoPhotonState(p, p, {1.0, 0.0, 0.0, 0.0}));
}

TEST_CASE("concurrence separates product and maximally entangled states") {
  CHECK(make_entangled(kInvSqrt2, kInvSqrt2, 0.7).concurrence() == doctest::Approx(1.0));
  CHECK(make_entangled(1.0, 0.0, 0.0).concurrence() == doctest::Approx(0.0));
  const auto p = ArmBasis::polarization();
  // (|H> + |V>)(|H> - |V>)/2 is a product state
  const TwoPhotonState prod(p, p, {0.5, -0.5, 0.5, -0.5});
  CHECK(prod.concurrence() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(make_entangled(0.6, 0.8, 0.0).concurrence() == doctest::Approx(2 * 0.6 * 0.8));
}

TEST_CASE("transfer maps H to +l and V to -l on one arm") {
  const auto s = make_entangled(0.6, 0.8, 1.1);
  const auto t = transfer_arm(s, Arm::B, 100);
  CHECK(t.arm_b() == ArmBasis::oam(100));
  CHECK_FALSE(t.arm_a().is_oam());
  for (int k = 0; k < 4; ++k) CHECK(t.amplitudes()[k] == s.amplitudes()[k]);
  CHECK(t.concurrence() == doctest::Approx(s.concurrence()));

  const auto both = transfer_arm(t, Arm::A, 10);
  CHECK(both.arm_a().l == 10);
  CHECK(both.arm_b().l == 100);
}

TEST_CASE("transfer errors") {
  const auto t = transfer_arm(make_entangled(kInvSqrt2, kInvSqrt2, 0), Arm::A, 3);
  CHECK_THROWS_AS(transfer_arm(t, Arm::A, 3), InvalidTransferError);
  CHECK_THROWS_AS(transfer_arm(t, Arm::B, 0), InvalidTransferError);
  CHECK_THROWS_AS(transfer_arm(t, Arm::B, -2), InvalidTransferError);
}

TEST_CASE("projection probability agrees with the written-out Born rule") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 2 * pi);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_state(rng, ArmBasis::oam(4), ArmBasis::polarization());
    const auto a = oam_analyzer(4, u(rng));
    const auto b = polarization_analyzer(u(rng));
    CHECK(projection_probability(s, a, b) == doctest::Approx(born(s, a, b)).epsilon(1e-13));
  }
}

TEST_CASE("OAM Bell state projections depend on the phase difference") {
  const auto p = ArmBasis::oam(2);
  // |+l,-l> + |-l,+l>: difference of phases; |+l,+l> + |-l,-l>: sum
  const TwoPhotonState bell(p, p, {0.0, kInvSqrt2, kInvSqrt2, 0.0});
  const TwoPhotonState even(p, p, {kInvSqrt2, 0.0, 0.0, kInvSqrt2});
  CHECK(projection_probability(bell, oam_analyzer(2, 0), oam_analyzer(2, 0)) == doctest::Approx(0.5));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 2 * pi);
  for (int trial = 0; trial < 100; ++trial) {
    const double p1 = u(rng), p2 = u(rng);
    CHECK(projection_probability(bell, oam_analyzer(2, p1), oam_analyzer(2, p2)) ==
          doctest::Approx((1 + std::cos(p1 - p2)) / 4).epsilon(1e-13));
    CHECK(projection_probability(even, oam_analyzer(2, p1), oam_analyzer(2, p2)) ==
          doctest::Approx((1 + std::cos(p1 + p2)) / 4).epsilon(1e-13));
  }
}

TEST_CASE("analyzer basis must match the arm") {
  const auto s = transfer_arm(make_entangled(kInvSqrt2, kInvSqrt2, 0), Arm::B, 5);
  CHECK_THROWS_AS(projection_probability(s, oam_analyzer(5, 0), oam_analyzer(5, 0)), AnalyzerMismatchError);
  CHECK_THROWS_AS(projection_probability(s, polarization_analyzer(0), oam_analyzer(6, 0)), AnalyzerMismatchError);
  CHECK_NOTHROW(projection_probability(s, polarization_analyzer(0), oam_analyzer(5, 0)));
}

TEST_CASE("orthogonal analyzer pairs resolve the identity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 2 * pi);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(rng, ArmBasis::oam(7), ArmBasis::polarization());
    const double phi = u(rng), th = u(rng);
    double total = 0.0;
    for (double dphi : {0.0, pi})
      for (double dth : {0.0, pi / 2}) total += projection_probability(s, oam_analyzer(7, phi + dphi),
                                                                       polarization_analyzer(th + dth));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("joint probability of projectors equals the projection probability") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 2 * pi);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(rng, ArmBasis::polarization(), ArmBasis::oam(3));
    const auto a = polarization_analyzer(u(rng));
    const auto b = oam_analyzer(3, u(rng));
    CHECK(joint_probability(s, Effect::projector(a), Effect::projector(b)) ==
          doctest::Approx(born(s, a, b)).epsilon(1e-13));
  }
}

TEST_CASE("source visibility mixes in the dephased state") {
  const auto s = transfer_arm(transfer_arm(make_entangled(kInvSqrt2, kInvSqrt2, 0), Arm::A, 2), Arm::B, 2);
  const auto ea = Effect::projector(oam_analyzer(2, 0.0));
  const auto eb = Effect::projector(oam_analyzer(2, 0.0));
  const double coherent = joint_probability(s, ea, eb, 1.0);
  const double dephased = joint_probability(s, ea, eb, 0.0);
  CHECK(coherent == doctest::Approx(0.5));
  CHECK(dephased == doctest::Approx(0.25));
  for (double v : {0.2, 0.9799})
    CHECK(joint_probability(s, ea, eb, v) == doctest::Approx(v * coherent + (1 - v) * dephased));
  CHECK_THROWS_AS(joint_probability(s, ea, eb, 1.5), ValidationError);
}

TEST_CASE("marginals sum the joint over a complete effect pair") {
  std::mt19937_64 rng(9);
  const auto s = random_state(rng, ArmBasis::polarization(), ArmBasis::polarization());
  const auto ea = Effect::projector(polarization_analyzer(0.3));
  const double sum = joint_probability(s, ea, Effect::projector(polarization_analyzer(1.0))) +
                     joint_probability(s, ea, Effect::projector(polarization_analyzer(1.0 + pi / 2)));
  CHECK(marginal_probability(s, Arm::A, ea) == doctest::Approx(sum).epsilon(1e-13));
}

TEST_CASE("mask angle and superposition phase convert both ways") {
  CHECK(mask_angle_to_phase(0.9, 100) == doctest::Approx(pi));
  CHECK(mask_angle_to_phase(45.0, 1) == doctest::Approx(pi / 2));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-90, 90);
  for (int i = 0; i < 100; ++i) {
    const double g = u(rng);
    CHECK(phase_to_mask_angle(mask_angle_to_phase(g, 37), 37) == doctest::Approx(g).epsilon(1e-12));
  }
}
