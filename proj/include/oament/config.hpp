#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "oament/counts.hpp"
#include "oament/slm.hpp"

namespace oament::config {

/// Laser-cut mask used for a given l when masks.r_a / masks.r_b are not set:
/// 1/7.1 for l = 10, 1/6.9 for l = 300, 1/5.7 otherwise.
double default_mask_ratio(int l);

/// Flat INI-style experiment description:
///
///   seed = 1
///   [source]    alpha, beta, phi (deg), source_visibility
///   [transfer]  l_a, l_b            integer >= 1 or "pol"
///   [slm]       width_px, height_px, pixel_pitch, waist ("auto" or m), oversample
///   [masks]     r_a, r_b            ratio, fraction "1/5.7" or "auto"
///   [detectors] pair_rate, efficiency_a, efficiency_b, dark_rate_a, dark_rate_b, window
///   [sweep]     axis (a|b), start_deg, stop_deg, steps, fixed_deg, integration_s
///
/// Numbers may be written as fractions p/q. Unknown sections or keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 1;

  double alpha = state::kInvSqrt2;
  double beta = state::kInvSqrt2;
  double phi_deg = 0.0;
  double source_visibility = 0.9799;

  std::optional<int> l_a = 100;  // empty: arm stays polarization-encoded
  std::optional<int> l_b = 100;

  slm::SlmSpec slm = slm::SlmSpec::full_hd();
  std::optional<double> waist;  // empty: slm::default_waist
  int oversample = 4;

  std::optional<double> r_a;  // empty: default_mask_ratio(l_a)
  std::optional<double> r_b;

  counts::DetectorSpec detectors;
  counts::Sweep sweep;

  /// Throws ValidationError naming the offending field ("source.alpha: ...").
  void validate() const;

  double mask_ratio(counts::Arm arm) const;
};

/// Throws ParseError with the line number on malformed input and
/// ValidationError on out-of-range values.
ExperimentConfig parse_config(std::istream& in);
/// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& c);

/// Entangled source, transfers and one analyzer per arm (mask on OAM arms,
/// polarizer on polarization arms).
counts::Experiment build_experiment(const ExperimentConfig& c);

}  // namespace oament::config
