#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace oament::metrology {

/// delta_gamma = kShotNoisePrefactor / (l V sqrt(N)). Half-max Poisson counting
/// would give 1/sqrt2 instead of 1/2.
inline constexpr double kShotNoisePrefactor = 0.5;

/// Remote rotation sensing with fringes of period 180/l degrees. A
/// polarization measurement is the l = 1 case (180 degree Malus fringe).
struct SensingConfig {
  int l = 1;
  bool polarization = false;  // forces the effective l to 1
  double visibility = 1.0;    // (0, 1]
  std::int64_t pairs = 1;     // detected pairs N >= 1

  int effective_l() const { return polarization ? 1 : l; }
  /// Throws ValidationError for out-of-range fields.
  void validate() const;
};

/// Shot-noise-limited angular precision at the steepest fringe slope, radians.
double angular_sensitivity(const SensingConfig& cfg);

/// Smallest N with angular_sensitivity <= target (radians).
std::int64_t required_pairs(double target_rad, int l, double visibility);

/// Ratio of the polarization fringe period to the OAM fringe period.
double enhancement_factor(int l);

struct AngleEstimate {
  double angle_rad = 0.0;
  double sigma_rad = 0.0;
};

/// Inverts c = offset (1 + V sin(2 l gamma)) near the steepest point gamma = 0.
/// offset is the expected count at mid-fringe. Throws OutOfRangeError if
/// |c/offset - 1| > V (no real solution).
AngleEstimate estimate_angle(double counts, double offset, const SensingConfig& cfg);

/// Expected count at angle gamma (radians) when offset = cfg.pairs.
double expected_counts(double gamma_rad, const SensingConfig& cfg);

struct AngleTrial {
  std::size_t trial = 0;
  double true_angle_deg = 0.0;
  std::optional<double> estimate_deg;  // empty when the draw left the invertible band
  std::optional<double> sigma_deg;
};

/// Monte-Carlo trials: each draws a true angle uniformly in
/// [-spread_deg, spread_deg] (or uses `angles_deg` cyclically when given),
/// a Poisson count with mean expected_counts, and inverts it. Trial i uses its
/// own generator seeded by (seed, i).
std::vector<AngleTrial> simulate_angle_trials(const SensingConfig& cfg, std::size_t trials, std::uint64_t seed,
                                              double spread_deg = 0.0, const std::vector<double>& angles_deg = {});

struct TrialSummary {
  std::size_t trials = 0;
  std::size_t out_of_range = 0;
  double mean_error_deg = 0.0;
  double std_error_deg = 0.0;  // sample standard deviation of estimate - truth
};

TrialSummary summarize(const std::vector<AngleTrial>& trials);

/// trial,true_angle_deg,estimate_deg,sigma_deg
void write_trials_csv(std::ostream& out, const std::vector<AngleTrial>& trials);
void write_trials_csv(const std::filesystem::path& path, const std::vector<AngleTrial>& trials);

}  // namespace oament::metrology
