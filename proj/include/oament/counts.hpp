#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oament/state.hpp"

namespace oament::counts {

using state::Arm;

/// Source and detection chain. Rates in 1/s, window in s.
struct DetectorSpec {
  double pair_rate = 1.3e6;
  double efficiency_a = 0.1;
  double efficiency_b = 0.1;
  double dark_rate_a = 500.0;
  double dark_rate_b = 500.0;
  double window = 1.4e-9;

  /// Throws ValidationError for negative rates, efficiencies outside [0,1] or a non-positive window.
  void validate() const;
};

enum class AnalyzerKind { Mask, Polarizer };

const char* to_string(AnalyzerKind kind);
AnalyzerKind analyzer_kind_from_string(const std::string& s);

/// What sits in front of one detector. width_ratio is ignored for a polarizer.
struct ArmSetup {
  AnalyzerKind kind = AnalyzerKind::Mask;
  double width_ratio = 1.0 / 5.7;
};

/// One measured (or simulated) setting. Angles are mask orientations or
/// polarizer angles in degrees, according to kind_a / kind_b. Coincidences are
/// stored as real numbers so accidental-corrected values stay unrounded.
struct ScanRecord {
  AnalyzerKind kind_a = AnalyzerKind::Mask;
  AnalyzerKind kind_b = AnalyzerKind::Mask;
  double angle_a_deg = 0.0;
  double angle_b_deg = 0.0;
  double integration_s = 1.0;
  double coincidences = 0.0;
  std::optional<double> singles_a;
  std::optional<double> singles_b;
  bool corrected = false;

  double angle(Arm arm) const { return arm == Arm::A ? angle_a_deg : angle_b_deg; }
};

/// A state, one analyzer per arm and the detection chain.
struct Experiment {
  state::TwoPhotonState state;
  ArmSetup arm_a;
  ArmSetup arm_b;
  double source_visibility = 1.0;
  DetectorSpec detectors;

  /// POVM element of one arm at the given angle. Throws MaskMismatchError if
  /// a mask sits on a polarization arm or vice versa.
  state::Effect effect(Arm arm, double angle_deg) const;
};

/// Probabilities per emitted pair for one pair of analyzer angles.
struct SettingProbabilities {
  double joint = 0.0;
  double marginal_a = 0.0;
  double marginal_b = 0.0;
};

SettingProbabilities setting_probabilities(const Experiment& exp, double angle_a_deg, double angle_b_deg);

/// pair_rate * eta_a * eta_b * p
double true_coincidence_rate(double joint_probability, const DetectorSpec& det);
double true_coincidence_rate(const Experiment& exp, double angle_a_deg, double angle_b_deg);

/// window * singles_a * singles_b
double accidental_rate(double singles_rate_a, double singles_rate_b, double window);

struct ExpectedRates {
  double true_coincidences = 0.0;
  double accidentals = 0.0;
  double singles_a = 0.0;
  double singles_b = 0.0;
};

/// Singles include detector dark counts.
ExpectedRates expected_rates(const Experiment& exp, double angle_a_deg, double angle_b_deg);

/// Angles swept on one arm while the other stays at fixed_deg.
struct Sweep {
  Arm axis = Arm::B;
  double start_deg = 0.0;
  double stop_deg = 10.0;
  int steps = 21;  // number of points, endpoints included
  double fixed_deg = 0.0;
  double integration_s = 30.0;

  std::vector<double> angles() const;
};

/// Poisson-sampled scan. Each point draws from its own generator seeded by
/// (seed, point index), so output depends only on the inputs.
std::vector<ScanRecord> simulate_scan(const Experiment& exp, const Sweep& sweep, std::uint64_t seed);

/// Poisson variate with the given mean, first draw of the (seed, stream) substream; mean <= 0 gives 0.
std::int64_t poisson_draw(double mean, std::uint64_t seed, std::uint64_t stream);

struct CorrectedRecords {
  std::vector<ScanRecord> records;
  std::size_t floored = 0;  // rows whose corrected count went negative and was set to 0
};

/// Subtracts window * S_a * S_b / T from every row. Throws CannotCorrectError
/// when a row lacks singles.
CorrectedRecords correct_accidentals(std::span<const ScanRecord> records, double window);

/// c(gamma) = offset [1 + V cos(2 l gamma + phase)], gamma in radians.
struct FringeFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double visibility = 0.0;
  double sigma_visibility = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

/// Poisson maximum-likelihood fit (iteratively reweighted least squares) with
/// the period fixed at 360/(2l) degrees; use l = 1 for a polarizer axis.
/// Needs >= 4 points spanning at least half a period.
FringeFit fit_fringe(std::span<const ScanRecord> records, int l, Arm axis);

/// Diagnostic fit with the period free.
struct FreePeriodFit {
  double period_deg = 0.0;
  double fringes = 0.0;  // number of periods across the scanned range
  FringeFit fit;
};

FreePeriodFit fit_fringe_free_period(std::span<const ScanRecord> records, Arm axis);

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// (c_par - c_perp)/(c_par + c_perp) with sigma^2 = 4 c_par c_perp / (c_par + c_perp)^3.
Estimate visibility_from_projections(double c_par, double c_perp);

enum class Verdict { Entangled, SeparableCompatible, Inconclusive };
const char* to_string(Verdict v);

inline constexpr double kSeparableBound = (std::numbers::sqrt2 + 1.0) / 2.0;

struct WitnessResult {
  Estimate vis_1;
  Estimate vis_2;
  double w = 0.0;
  double w_sigma = 0.0;
  double exceedance_sigma = 0.0;  // (w - bound) / w_sigma
  double k = 3.0;
  Verdict verdict = Verdict::Inconclusive;
};

/// Sum of visibilities in two mutually unbiased bases. Entangled iff
/// w - k sigma_w exceeds the separable bound; SeparableCompatible iff w does
/// not exceed it at all; Inconclusive otherwise.
WitnessResult witness(Estimate vis_1, Estimate vis_2, double k = 3.0);

/// Mask (or polarizer, l = 1) orientations of the two mutually unbiased bases:
/// gamma2 = gamma1 + 45/l, orthogonal partners at +90/l.
struct MubAngles {
  double gamma1, gamma1_perp, gamma2, gamma2_perp;
};
MubAngles mub_angles(int l, double gamma1_deg);

/// Witness as the sum of projection differences
/// P(g1, g1) - P(g1, g1perp) + P(g2, g2) - P(g2, g2perp)
/// using ideal analyzers on each arm. Polarization arms count as l = 1.
double projection_witness(const state::TwoPhotonState& st, double gamma1_deg);

/// Witness value of the product state (a|l> + b e^{i phi1}|-l>)(c|l> + d e^{i phi2}|-l>)
/// with b = sqrt(1-a^2), d = sqrt(1-c^2).
double separable_witness(double a, double c, double phi1, double phi2);

struct BoundResult {
  double value = 0.0;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double phi1 = 0.0, phi2 = 0.0;
  int grid_steps = 0;
};

/// Maximum of separable_witness by grid search over a, c in [0,1] and
/// phi1, phi2 in [0, 2pi) followed by compass-search refinement.
/// Throws ValidationError for grid_steps < 32.
BoundResult separable_bound_oracle(int grid_steps);

// ---------------------------------------------------------------------------
// Count tables (CSV)

/// Contents of the `# bases=<a>:<b>, l_a=<int|pol>, l_b=<int|pol>` comment line.
struct TableHeader {
  AnalyzerKind kind_a = AnalyzerKind::Mask;
  AnalyzerKind kind_b = AnalyzerKind::Mask;
  int l_a = 1;  // 1 for a polarizer arm
  int l_b = 1;
};

struct CountTable {
  std::optional<TableHeader> header;
  std::vector<ScanRecord> records;
};

inline constexpr const char* kCsvColumns =
    "kind,angle_a_deg,angle_b_deg,integration_s,coincidences,singles_a,singles_b";

CountTable parse_csv(std::istream& in);
/// Throws IoError if the file cannot be read, ParseError / SchemaError (with line number) on bad content.
CountTable ingest_csv(const std::filesystem::path& path);

/// Same schema plus a trailing `corrected` column.
void write_csv(std::ostream& out, const CountTable& table);
void write_csv(const std::filesystem::path& path, const CountTable& table);

// ---------------------------------------------------------------------------
// Table analysis

struct AnalyzeOptions {
  double k = 3.0;
  bool correct_accidentals = false;
  double window = 1.4e-9;
};

/// One group of rows sharing angle_a.
struct GroupResult {
  double angle_a_deg = 0.0;
  std::size_t rows = 0;
  Estimate visibility;
  std::optional<FringeFit> fit;  // fringe mode only
};

struct AnalysisReport {
  enum class Mode { Projections, Fringes } mode = Mode::Fringes;
  std::vector<GroupResult> groups;
  std::optional<WitnessResult> witness;  // from the first two groups
  std::size_t floored = 0;
  CountTable table;  // after optional correction
};

/// Rows are grouped by angle_a in file order. If every group has exactly two
/// rows they are read as (parallel, orthogonal) projections; if every group has
/// at least four rows each is fitted as a fringe along arm B. Throws
/// ValidationError for an empty table or mixed group sizes.
AnalysisReport analyze(const CountTable& table, const AnalyzeOptions& options = {});

}  // namespace oament::counts
