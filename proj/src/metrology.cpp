#include "oament/metrology.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

#include "oament/errors.hpp"

namespace oament::metrology {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

void check_l_v(int l, double visibility) {
  if (l < 1) throw ValidationError("l must be >= 1");
  if (!(visibility > 0.0 && visibility <= 1.0)) throw ValidationError("visibility must lie in (0, 1]");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void SensingConfig::validate() const {
  check_l_v(effective_l(), visibility);
  if (pairs < 1) throw ValidationError("pairs must be >= 1");
}

double angular_sensitivity(const SensingConfig& cfg) {
  cfg.validate();
  return kShotNoisePrefactor /
         (cfg.effective_l() * cfg.visibility * std::sqrt(static_cast<double>(cfg.pairs)));
}

std::int64_t required_pairs(double target_rad, int l, double visibility) {
  check_l_v(l, visibility);
  if (!(target_rad > 0.0) || !std::isfinite(target_rad)) throw ValidationError("target must be > 0");
  const double root = kShotNoisePrefactor / (l * visibility * target_rad);
  const double n = std::ceil(root * root);
  if (n > 9.0e18) throw OutOfRangeError("required pair count overflows");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

double enhancement_factor(int l) {
  if (l < 1) throw ValidationError("l must be >= 1");
  return 180.0 / (180.0 / l);
}

double expected_counts(double gamma_rad, const SensingConfig& cfg) {
  cfg.validate();
  return static_cast<double>(cfg.pairs) *
         (1.0 + cfg.visibility * std::sin(2.0 * cfg.effective_l() * gamma_rad));
}

AngleEstimate estimate_angle(double counts, double offset, const SensingConfig& cfg) {
  cfg.validate();
  if (!(counts >= 0.0)) throw ValidationError("counts must be >= 0");
  if (!(offset > 0.0)) throw ValidationError("offset must be > 0");
  const double s = (counts / offset - 1.0) / cfg.visibility;
  if (!(std::abs(s) <= 1.0)) throw OutOfRangeError("counts " + fmt(counts) + " lie outside the invertible fringe band");
  const int l = cfg.effective_l();
  AngleEstimate e;
  e.angle_rad = std::asin(s) / (2.0 * l);
  const double slope = offset * cfg.visibility * 2.0 * l * std::cos(2.0 * l * e.angle_rad);
  e.sigma_rad = slope > 0.0 ? std::sqrt(counts) / slope : INFINITY;
  return e;
}

std::vector<AngleTrial> simulate_angle_trials(const SensingConfig& cfg, std::size_t trials, std::uint64_t seed,
                                              double spread_deg, const std::vector<double>& angles_deg) {
  cfg.validate();
  if (!(spread_deg >= 0.0)) throw ValidationError("spread must be >= 0");
  const double band_deg = 22.5 / cfg.effective_l();  // 1/8 fringe period
  if (spread_deg > band_deg) throw ValidationError("spread exceeds 1/8 of the fringe period");
  for (double a : angles_deg)
    if (std::abs(a) > band_deg) throw ValidationError("true angle " + fmt(a) + " deg is outside 1/8 fringe period");

  std::vector<AngleTrial> out(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
    std::mt19937_64 rng(seq);
    AngleTrial& t = out[i];
    t.trial = i;
    if (!angles_deg.empty())
      t.true_angle_deg = angles_deg[i % angles_deg.size()];
    else if (spread_deg > 0.0)
      t.true_angle_deg = std::uniform_real_distribution<double>(-spread_deg, spread_deg)(rng);
    const double mean = expected_counts(t.true_angle_deg / kDeg, cfg);
    const auto c = static_cast<double>(std::poisson_distribution<std::int64_t>(mean)(rng));
    try {
      const auto e = estimate_angle(c, static_cast<double>(cfg.pairs), cfg);
      t.estimate_deg = e.angle_rad * kDeg;
      t.sigma_deg = e.sigma_rad * kDeg;
    } catch (const OutOfRangeError&) {
    }
  }
  return out;
}

TrialSummary summarize(const std::vector<AngleTrial>& trials) {
  TrialSummary s;
  s.trials = trials.size();
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& t : trials) {
    if (!t.estimate_deg) {
      ++s.out_of_range;
      continue;
    }
    const double e = *t.estimate_deg - t.true_angle_deg;
    sum += e;
    sum2 += e * e;
    ++n;
  }
  if (n > 0) s.mean_error_deg = sum / static_cast<double>(n);
  if (n > 1) s.std_error_deg = std::sqrt(std::max(0.0, (sum2 - n * s.mean_error_deg * s.mean_error_deg) / (n - 1)));
  return s;
}

void write_trials_csv(std::ostream& out, const std::vector<AngleTrial>& trials) {
  out << "trial,true_angle_deg,estimate_deg,sigma_deg\n";
  for (const auto& t : trials)
    out << t.trial << ',' << fmt(t.true_angle_deg) << ',' << (t.estimate_deg ? fmt(*t.estimate_deg) : "") << ','
        << (t.sigma_deg ? fmt(*t.sigma_deg) : "") << '\n';
}

void write_trials_csv(const std::filesystem::path& path, const std::vector<AngleTrial>& trials) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_trials_csv(out, trials);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace oament::metrology
