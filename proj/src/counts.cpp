#include "oament/counts.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "oament/errors.hpp"
#include "oament/mask.hpp"

namespace oament::counts {

void DetectorSpec::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be a finite rate >= 0");
  };
  nonneg(pair_rate, "pair_rate");
  nonneg(dark_rate_a, "dark_rate_a");
  nonneg(dark_rate_b, "dark_rate_b");
  if (!(efficiency_a >= 0.0 && efficiency_a <= 1.0)) throw ValidationError("efficiency_a must lie in [0,1]");
  if (!(efficiency_b >= 0.0 && efficiency_b <= 1.0)) throw ValidationError("efficiency_b must lie in [0,1]");
  if (!(window > 0.0) || !std::isfinite(window)) throw ValidationError("coincidence window must be positive");
}

const char* to_string(AnalyzerKind kind) { return kind == AnalyzerKind::Mask ? "mask" : "polarizer"; }

AnalyzerKind analyzer_kind_from_string(const std::string& s) {
  if (s == "mask") return AnalyzerKind::Mask;
  if (s == "polarizer") return AnalyzerKind::Polarizer;
  throw ValidationError("unknown analyzer kind '" + s + "' (expected mask or polarizer)");
}

state::Effect Experiment::effect(Arm arm, double angle_deg) const {
  const auto& basis = state.arm(arm);
  const auto& setup = arm == Arm::A ? arm_a : arm_b;
  const char* name = arm == Arm::A ? "A" : "B";
  if (setup.kind == AnalyzerKind::Mask) {
    if (!basis.is_oam()) throw MaskMismatchError(std::string("arm ") + name + " is polarization-encoded but has a mask");
    return mask::mask_effect(mask::SlitMask(basis.l, setup.width_ratio, angle_deg));
  }
  if (basis.is_oam()) throw MaskMismatchError(std::string("arm ") + name + " carries OAM but has a polarizer");
  return mask::polarizer_effect(angle_deg);
}

SettingProbabilities setting_probabilities(const Experiment& exp, double angle_a_deg, double angle_b_deg) {
  const auto ea = exp.effect(Arm::A, angle_a_deg);
  const auto eb = exp.effect(Arm::B, angle_b_deg);
  return {state::joint_probability(exp.state, ea, eb, exp.source_visibility),
          state::marginal_probability(exp.state, Arm::A, ea), state::marginal_probability(exp.state, Arm::B, eb)};
}

double true_coincidence_rate(double p, const DetectorSpec& det) {
  if (!(p >= 0.0 && p <= 1.0 + 1e-12)) throw ValidationError("joint probability outside [0,1]");
  return det.pair_rate * det.efficiency_a * det.efficiency_b * p;
}

double true_coincidence_rate(const Experiment& exp, double angle_a_deg, double angle_b_deg) {
  return true_coincidence_rate(setting_probabilities(exp, angle_a_deg, angle_b_deg).joint, exp.detectors);
}

double accidental_rate(double singles_rate_a, double singles_rate_b, double window) {
  if (!(singles_rate_a >= 0.0 && singles_rate_b >= 0.0)) throw ValidationError("singles rates must be >= 0");
  if (!(window >= 0.0)) throw ValidationError("coincidence window must be >= 0");
  return window * singles_rate_a * singles_rate_b;
}

ExpectedRates expected_rates(const Experiment& exp, double angle_a_deg, double angle_b_deg) {
  const auto& det = exp.detectors;
  det.validate();
  const auto p = setting_probabilities(exp, angle_a_deg, angle_b_deg);
  ExpectedRates r;
  r.true_coincidences = true_coincidence_rate(p.joint, det);
  r.singles_a = det.pair_rate * det.efficiency_a * p.marginal_a + det.dark_rate_a;
  r.singles_b = det.pair_rate * det.efficiency_b * p.marginal_b + det.dark_rate_b;
  r.accidentals = accidental_rate(r.singles_a, r.singles_b, det.window);
  return r;
}

std::vector<double> Sweep::angles() const {
  if (steps < 1) throw ValidationError("sweep needs at least one step");
  std::vector<double> out(steps);
  for (int i = 0; i < steps; ++i)
    out[i] = steps == 1 ? start_deg : start_deg + (stop_deg - start_deg) * i / (steps - 1);
  return out;
}

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::int64_t poisson(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

}  // namespace

std::int64_t poisson_draw(double mean, std::uint64_t seed, std::uint64_t stream) {
  auto rng = substream(seed, stream);
  return poisson(rng, mean);
}

std::vector<ScanRecord> simulate_scan(const Experiment& exp, const Sweep& sweep, std::uint64_t seed) {
  if (!(sweep.integration_s > 0.0)) throw ValidationError("integration time must be positive");
  exp.detectors.validate();
  const auto angles = sweep.angles();
  std::vector<ScanRecord> out;
  out.reserve(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    ScanRecord rec;
    rec.kind_a = exp.arm_a.kind;
    rec.kind_b = exp.arm_b.kind;
    rec.angle_a_deg = sweep.axis == Arm::A ? angles[i] : sweep.fixed_deg;
    rec.angle_b_deg = sweep.axis == Arm::B ? angles[i] : sweep.fixed_deg;
    rec.integration_s = sweep.integration_s;

    const auto rates = expected_rates(exp, rec.angle_a_deg, rec.angle_b_deg);
    auto rng = substream(seed, i);
    const double t = sweep.integration_s;
    rec.coincidences = static_cast<double>(poisson(rng, t * (rates.true_coincidences + rates.accidentals)));
    rec.singles_a = static_cast<double>(poisson(rng, t * rates.singles_a));
    rec.singles_b = static_cast<double>(poisson(rng, t * rates.singles_b));
    out.push_back(rec);
  }
  return out;
}

CorrectedRecords correct_accidentals(std::span<const ScanRecord> records, double window) {
  if (!(window > 0.0)) throw ValidationError("coincidence window must be positive");
  CorrectedRecords out;
  out.records.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    ScanRecord r = records[i];
    if (!r.singles_a || !r.singles_b)
      throw CannotCorrectError("row " + std::to_string(i + 1) + " has no singles counts");
    if (!(r.integration_s > 0.0)) throw ValidationError("row " + std::to_string(i + 1) + " has no integration time");
    const double expected = window * (*r.singles_a) * (*r.singles_b) / r.integration_s;
    double c = r.coincidences - expected;
    if (c < 0.0) {
      c = 0.0;
      ++out.floored;
    }
    r.coincidences = c;
    r.corrected = true;
    out.records.push_back(r);
  }
  return out;
}

}  // namespace oament::counts
