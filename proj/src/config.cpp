#include "oament/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "oament/errors.hpp"

namespace oament::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_plain(const std::string& s, double& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return !s.empty() && ec == std::errc() && ptr == end && std::isfinite(out);
}

double parse_real(const std::string& s, std::size_t line, const std::string& field) {
  double v = 0.0;
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (parse_plain(s, v)) return v;
  } else {
    double p = 0.0, q = 0.0;
    if (parse_plain(trim(s.substr(0, slash)), p) && parse_plain(trim(s.substr(slash + 1)), q)) {
      if (q == 0.0) throw ParseError(line, field + ": division by zero in '" + s + "'");
      return p / q;
    }
  }
  throw ParseError(line, field + ": '" + s + "' is not a number");
}

long long parse_integer(const std::string& s, std::size_t line, const std::string& field) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, field + ": '" + s + "' is not an integer");
  return v;
}

int parse_int(const std::string& s, std::size_t line, const std::string& field) {
  const long long v = parse_integer(s, line, field);
  if (v < -2147483647LL || v > 2147483647LL) throw ParseError(line, field + ": '" + s + "' is out of range");
  return static_cast<int>(v);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw ValidationError("config " + field + ": " + what);
}

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) invalid(field, "must be finite");
}

}  // namespace

double default_mask_ratio(int l) {
  if (l == 10) return 1.0 / 7.1;
  if (l == 300) return 1.0 / 6.9;
  return 1.0 / 5.7;
}

double ExperimentConfig::mask_ratio(counts::Arm arm) const {
  const auto& r = arm == counts::Arm::A ? r_a : r_b;
  const auto& l = arm == counts::Arm::A ? l_a : l_b;
  if (r) return *r;
  return default_mask_ratio(l.value_or(1));
}

void ExperimentConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) invalid("source.alpha", "must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) invalid("source.beta", "must lie in [0, 1]");
  if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-9)
    invalid("source.alpha/source.beta", "alpha^2 + beta^2 must equal 1 (got " + fmt(alpha * alpha + beta * beta) + ")");
  require_finite(phi_deg, "source.phi");
  if (!(source_visibility >= 0.0 && source_visibility <= 1.0)) invalid("source.source_visibility", "must lie in [0, 1]");

  if (l_a && *l_a < 1) invalid("transfer.l_a", "must be an integer >= 1 or 'pol'");
  if (l_b && *l_b < 1) invalid("transfer.l_b", "must be an integer >= 1 or 'pol'");

  if (slm.width_px < 2) invalid("slm.width_px", "must be >= 2");
  if (slm.height_px < 2) invalid("slm.height_px", "must be >= 2");
  if (!(slm.pixel_pitch > 0.0) || !std::isfinite(slm.pixel_pitch)) invalid("slm.pixel_pitch", "must be > 0");
  if (waist && (!(*waist > 0.0) || !std::isfinite(*waist))) invalid("slm.waist", "must be > 0 or 'auto'");
  if (oversample < 1 || oversample > 64) invalid("slm.oversample", "must lie in [1, 64]");

  if (r_a && !(*r_a > 0.0 && *r_a <= 1.0)) invalid("masks.r_a", "must lie in (0, 1]");
  if (r_b && !(*r_b > 0.0 && *r_b <= 1.0)) invalid("masks.r_b", "must lie in (0, 1]");

  const auto& d = detectors;
  if (!(d.pair_rate >= 0.0) || !std::isfinite(d.pair_rate)) invalid("detectors.pair_rate", "must be >= 0");
  if (!(d.efficiency_a >= 0.0 && d.efficiency_a <= 1.0)) invalid("detectors.efficiency_a", "must lie in [0, 1]");
  if (!(d.efficiency_b >= 0.0 && d.efficiency_b <= 1.0)) invalid("detectors.efficiency_b", "must lie in [0, 1]");
  if (!(d.dark_rate_a >= 0.0) || !std::isfinite(d.dark_rate_a)) invalid("detectors.dark_rate_a", "must be >= 0");
  if (!(d.dark_rate_b >= 0.0) || !std::isfinite(d.dark_rate_b)) invalid("detectors.dark_rate_b", "must be >= 0");
  if (!(d.window > 0.0) || !std::isfinite(d.window)) invalid("detectors.window", "must be > 0");

  require_finite(sweep.start_deg, "sweep.start_deg");
  require_finite(sweep.stop_deg, "sweep.stop_deg");
  require_finite(sweep.fixed_deg, "sweep.fixed_deg");
  if (sweep.steps < 1 || sweep.steps > 10000000) invalid("sweep.steps", "must lie in [1, 1e7]");
  if (!(sweep.integration_s > 0.0) || !std::isfinite(sweep.integration_s)) invalid("sweep.integration_s", "must be > 0");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, std::size_t)>;
  auto real = [](double& target, std::string field) -> Setter {
    return [&target, field](const std::string& v, std::size_t line) { target = parse_real(v, line, field); };
  };
  auto integer = [](int& target, std::string field) -> Setter {
    return [&target, field](const std::string& v, std::size_t line) { target = parse_int(v, line, field); };
  };
  auto oam_l = [](std::optional<int>& target, std::string field) -> Setter {
    return [&target, field](const std::string& v, std::size_t line) {
      if (v == "pol") target.reset();
      else target = parse_int(v, line, field);
    };
  };
  auto auto_real = [](std::optional<double>& target, std::string field) -> Setter {
    return [&target, field](const std::string& v, std::size_t line) {
      if (v == "auto") target.reset();
      else target = parse_real(v, line, field);
    };
  };

  int width = c.slm.width_px, height = c.slm.height_px;
  double pitch = c.slm.pixel_pitch;
  const std::map<std::string, Setter> setters = {
      {"seed",
       [&c](const std::string& v, std::size_t line) {
         std::uint64_t s = 0;
         const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
         if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
           throw ParseError(line, "seed: '" + v + "' is not an unsigned 64-bit integer");
         c.seed = s;
       }},
      {"source.alpha", real(c.alpha, "source.alpha")},
      {"source.beta", real(c.beta, "source.beta")},
      {"source.phi", real(c.phi_deg, "source.phi")},
      {"source.source_visibility", real(c.source_visibility, "source.source_visibility")},
      {"transfer.l_a", oam_l(c.l_a, "transfer.l_a")},
      {"transfer.l_b", oam_l(c.l_b, "transfer.l_b")},
      {"slm.width_px", integer(width, "slm.width_px")},
      {"slm.height_px", integer(height, "slm.height_px")},
      {"slm.pixel_pitch", real(pitch, "slm.pixel_pitch")},
      {"slm.waist", auto_real(c.waist, "slm.waist")},
      {"slm.oversample", integer(c.oversample, "slm.oversample")},
      {"masks.r_a", auto_real(c.r_a, "masks.r_a")},
      {"masks.r_b", auto_real(c.r_b, "masks.r_b")},
      {"detectors.pair_rate", real(c.detectors.pair_rate, "detectors.pair_rate")},
      {"detectors.efficiency_a", real(c.detectors.efficiency_a, "detectors.efficiency_a")},
      {"detectors.efficiency_b", real(c.detectors.efficiency_b, "detectors.efficiency_b")},
      {"detectors.dark_rate_a", real(c.detectors.dark_rate_a, "detectors.dark_rate_a")},
      {"detectors.dark_rate_b", real(c.detectors.dark_rate_b, "detectors.dark_rate_b")},
      {"detectors.window", real(c.detectors.window, "detectors.window")},
      {"sweep.axis",
       [&c](const std::string& v, std::size_t line) {
         if (v == "a" || v == "A") c.sweep.axis = counts::Arm::A;
         else if (v == "b" || v == "B") c.sweep.axis = counts::Arm::B;
         else throw ParseError(line, "sweep.axis: expected 'a' or 'b', got '" + v + "'");
       }},
      {"sweep.start_deg", real(c.sweep.start_deg, "sweep.start_deg")},
      {"sweep.stop_deg", real(c.sweep.stop_deg, "sweep.stop_deg")},
      {"sweep.steps", integer(c.sweep.steps, "sweep.steps")},
      {"sweep.fixed_deg", real(c.sweep.fixed_deg, "sweep.fixed_deg")},
      {"sweep.integration_s", real(c.sweep.integration_s, "sweep.integration_s")},
  };
  const std::set<std::string> sections = {"source", "transfer", "slm", "masks", "detectors", "sweep"};

  std::string raw, section;
  std::set<std::string> seen;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const auto text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(line, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (!sections.count(section)) throw ParseError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    const auto path = section.empty() ? key : section + "." + key;
    const auto it = setters.find(path);
    if (it == setters.end()) throw ParseError(line, "unknown key '" + path + "'");
    if (!seen.insert(path).second) throw ParseError(line, "duplicate key '" + path + "'");
    it->second(value, line);
  }
  if (width < 2) invalid("slm.width_px", "must be >= 2");
  if (height < 2) invalid("slm.height_px", "must be >= 2");
  if (!(pitch > 0.0)) invalid("slm.pixel_pitch", "must be > 0");
  c.slm = slm::SlmSpec(width, height, pitch);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  auto l_text = [](const std::optional<int>& l) { return l ? std::to_string(*l) : std::string("pol"); };
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("auto"); };
  o << "seed = " << c.seed << "\n\n";
  o << "[source]\nalpha = " << fmt(c.alpha) << "\nbeta = " << fmt(c.beta) << "\nphi = " << fmt(c.phi_deg)
    << "\nsource_visibility = " << fmt(c.source_visibility) << "\n\n";
  o << "[transfer]\nl_a = " << l_text(c.l_a) << "\nl_b = " << l_text(c.l_b) << "\n\n";
  o << "[slm]\nwidth_px = " << c.slm.width_px << "\nheight_px = " << c.slm.height_px
    << "\npixel_pitch = " << fmt(c.slm.pixel_pitch) << "\nwaist = " << opt(c.waist)
    << "\noversample = " << c.oversample << "\n\n";
  o << "[masks]\nr_a = " << opt(c.r_a) << "\nr_b = " << opt(c.r_b) << "\n\n";
  const auto& d = c.detectors;
  o << "[detectors]\npair_rate = " << fmt(d.pair_rate) << "\nefficiency_a = " << fmt(d.efficiency_a)
    << "\nefficiency_b = " << fmt(d.efficiency_b) << "\ndark_rate_a = " << fmt(d.dark_rate_a)
    << "\ndark_rate_b = " << fmt(d.dark_rate_b) << "\nwindow = " << fmt(d.window) << "\n\n";
  const auto& s = c.sweep;
  o << "[sweep]\naxis = " << (s.axis == counts::Arm::A ? "a" : "b") << "\nstart_deg = " << fmt(s.start_deg)
    << "\nstop_deg = " << fmt(s.stop_deg) << "\nsteps = " << s.steps << "\nfixed_deg = " << fmt(s.fixed_deg)
    << "\nintegration_s = " << fmt(s.integration_s) << "\n";
  return o.str();
}

counts::Experiment build_experiment(const ExperimentConfig& c) {
  c.validate();
  auto st = state::make_entangled(c.alpha, c.beta, c.phi_deg * std::numbers::pi / 180.0);
  if (c.l_a) st = state::transfer_arm(st, counts::Arm::A, *c.l_a);
  if (c.l_b) st = state::transfer_arm(st, counts::Arm::B, *c.l_b);
  counts::Experiment e{st, {}, {}, c.source_visibility, c.detectors};
  e.arm_a = {c.l_a ? counts::AnalyzerKind::Mask : counts::AnalyzerKind::Polarizer, c.mask_ratio(counts::Arm::A)};
  e.arm_b = {c.l_b ? counts::AnalyzerKind::Mask : counts::AnalyzerKind::Polarizer, c.mask_ratio(counts::Arm::B)};
  return e;
}

}  // namespace oament::config
