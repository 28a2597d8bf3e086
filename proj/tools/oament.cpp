// oament command-line tool: pattern rendering, efficiency sweeps, scan
// simulation, count-table analysis, separable bound and metrology budgets.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oament/config.hpp"
#include "oament/counts.hpp"
#include "oament/errors.hpp"
#include "oament/mask.hpp"
#include "oament/metrology.hpp"
#include "oament/slm.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace oament;

constexpr double kDeg = 180.0 / std::numbers::pi;

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool json_report = false;
};

config::ExperimentConfig load(const Globals& g) {
  auto c = g.config_path.empty() ? config::ExperimentConfig{} : config::load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  return c;
}

// Writes text to --out or stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw IoError("cannot open " + g.out + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + g.out);
}

json estimate_json(const counts::Estimate& e) { return {{"value", e.value}, {"sigma", e.sigma}}; }

json witness_json(const counts::WitnessResult& w) {
  return {{"vis_1", estimate_json(w.vis_1)},
          {"vis_2", estimate_json(w.vis_2)},
          {"w", w.w},
          {"w_sigma", w.w_sigma},
          {"bound", counts::kSeparableBound},
          {"exceedance_sigma", w.exceedance_sigma},
          {"k", w.k},
          {"verdict", counts::to_string(w.verdict)}};
}

// ---------------------------------------------------------------------------

int render_pattern(const Globals& g, int l, const std::string& petals_out) {
  const auto c = load(g);
  if (g.out.empty()) throw ValidationError("render-pattern needs --out <file.pgm>");
  const auto pattern = slm::spiral_phase_pattern(c.slm, l);
  slm::write_pgm(pattern, g.out);

  const double pitch = c.slm.pixel_pitch;
  const double r_alias = slm::aliasing_radius(c.slm, l);
  const double r_edge = c.slm.short_half_extent();
  std::cout << "wrote " << g.out << " (" << c.slm.width_px << "x" << c.slm.height_px << ", l=" << l << ")\n";
  std::cout << "aliasing: fewer than 2 pixels per 2pi inside r < " << num(r_alias * 1e3) << " mm ("
            << num(r_alias / pitch) << " px); " << num(slm::pixels_per_period(c.slm, l, r_edge))
            << " pixels per 2pi at the panel edge r = " << num(r_edge * 1e3) << " mm\n";

  if (!petals_out.empty()) {
    const int al = std::abs(l);
    const double waist = c.waist.value_or(slm::default_waist(c.slm, al));
    const slm::GridGeometry geo{c.slm.width_px, c.slm.height_px, pitch};
    slm::write_pgm(slm::petal_intensity(al, 0.0, waist, geo), petals_out);
    std::cout << "wrote " << petals_out << " (petal intensity, " << 2 * al << " lobes)\n";
  }
  return 0;
}

int efficiency_sweep(const Globals& g, const std::vector<int>& ls, std::optional<int> oversample) {
  const auto c = load(g);
  const int os = oversample.value_or(c.oversample);
  std::ostringstream o;
  o << "l,eta,pixels_per_period_at_ring\n";
  for (int l : ls) {
    if (l < 1) throw ValidationError("efficiency-sweep: l must be >= 1, got " + std::to_string(l));
    const double waist = c.waist.value_or(slm::default_waist(c.slm, l));
    const double eta = slm::conversion_efficiency(c.slm, l, waist, os);
    const double ppp = slm::pixels_per_period(c.slm, l, slm::ring_radius(l, waist));
    o << l << ',' << num(eta, 10) << ',' << num(ppp, 8) << '\n';
  }
  emit(g, o.str());
  return 0;
}

int simulate_scan(const Globals& g) {
  const auto c = load(g);
  const auto exp = config::build_experiment(c);
  counts::CountTable table;
  table.header = counts::TableHeader{exp.arm_a.kind, exp.arm_b.kind, c.l_a.value_or(1), c.l_b.value_or(1)};
  table.records = counts::simulate_scan(exp, c.sweep, c.seed);
  std::ostringstream o;
  counts::write_csv(o, table);
  emit(g, o.str());
  return 0;
}

int analyze(const Globals& g, const std::string& in, bool correct, double k, std::optional<double> window) {
  if (in.empty()) throw ValidationError("analyze needs --in <counts.csv>");
  const auto table = counts::ingest_csv(in);
  counts::AnalyzeOptions opt;
  opt.k = k;
  opt.correct_accidentals = correct;
  if (window) opt.window = *window;
  else if (!g.config_path.empty()) opt.window = load(g).detectors.window;
  const auto rep = counts::analyze(table, opt);

  if (!g.out.empty()) counts::write_csv(std::filesystem::path(g.out), rep.table);

  const char* mode = rep.mode == counts::AnalysisReport::Mode::Projections ? "projections" : "fringes";
  if (g.json_report) {
    json j;
    j["mode"] = mode;
    j["rows"] = rep.table.records.size();
    j["corrected"] = correct;
    j["floored"] = rep.floored;
    j["groups"] = json::array();
    for (const auto& gr : rep.groups) {
      json jg{{"angle_a_deg", gr.angle_a_deg}, {"rows", gr.rows}, {"visibility", estimate_json(gr.visibility)}};
      if (gr.fit)
        jg["fit"] = {{"offset", gr.fit->offset}, {"amplitude", gr.fit->amplitude}, {"phase", gr.fit->phase},
                     {"chi2", gr.fit->chi2}, {"dof", gr.fit->dof}};
      j["groups"].push_back(jg);
    }
    j["witness"] = rep.witness ? witness_json(*rep.witness) : json(nullptr);
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << "mode: " << mode << ", " << rep.table.records.size() << " rows, " << rep.groups.size() << " groups";
  if (correct) std::cout << ", accidentals subtracted (" << rep.floored << " rows floored at 0)";
  std::cout << '\n';
  for (const auto& gr : rep.groups) {
    std::cout << "angle_a=" << num(gr.angle_a_deg) << " deg: visibility " << num(gr.visibility.value, 5) << " +- "
              << num(gr.visibility.sigma, 3);
    if (gr.fit) std::cout << " (chi2/dof " << num(gr.fit->chi2, 4) << "/" << gr.fit->dof << ")";
    std::cout << '\n';
  }
  if (rep.witness) {
    const auto& w = *rep.witness;
    std::cout << "witness W = " << num(w.w, 5) << " +- " << num(w.w_sigma, 3) << " (bound " << num(counts::kSeparableBound, 6)
              << ", " << num(w.exceedance_sigma, 4) << " sigma) -> " << counts::to_string(w.verdict) << " at k="
              << num(w.k) << '\n';
  }
  return 0;
}

int bound(const Globals& g, int steps) {
  const auto b = counts::separable_bound_oracle(steps);
  if (g.json_report) {
    json j{{"value", b.value}, {"analytic", counts::kSeparableBound}, {"grid_steps", b.grid_steps},
           {"maximizer", {{"a", b.a}, {"b", b.b}, {"c", b.c}, {"d", b.d}, {"phi1", b.phi1}, {"phi2", b.phi2}}}};
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << "separable bound " << num(b.value, 10) << " (analytic " << num(counts::kSeparableBound, 10) << ", "
            << steps << " grid steps)\n";
  std::cout << "maximizer a=" << num(b.a) << " b=" << num(b.b) << " c=" << num(b.c) << " d=" << num(b.d)
            << " phi1=" << num(b.phi1) << " phi2=" << num(b.phi2) << " rad\n";
  return 0;
}

struct MetrologyArgs {
  bool pol = false;
  int l = 1;
  double visibility = 1.0;
  std::optional<double> target_deg;
  std::optional<std::int64_t> pairs;
  std::size_t trials = 0;
  double spread_deg = 0.0;
  std::size_t random_angles = 0;
};

int metrology_cmd(const Globals& g, const MetrologyArgs& a) {
  if (a.target_deg.has_value() == a.pairs.has_value())
    throw ValidationError("metrology needs exactly one of --target-deg or --pairs");
  metrology::SensingConfig cfg{a.l, a.pol, a.visibility, 1};
  cfg.validate();
  const int l_eff = cfg.effective_l();
  json j{{"l_eff", l_eff}, {"polarization", a.pol}, {"visibility", a.visibility},
         {"enhancement_factor", metrology::enhancement_factor(l_eff)}};
  if (a.target_deg) {
    cfg.pairs = metrology::required_pairs(*a.target_deg / kDeg, l_eff, a.visibility);
    j["target_deg"] = *a.target_deg;
  } else {
    cfg.pairs = *a.pairs;
  }
  const double dg = metrology::angular_sensitivity(cfg);
  j["pairs"] = cfg.pairs;
  j["sensitivity_rad"] = dg;
  j["sensitivity_deg"] = dg * kDeg;

  if (a.trials > 0) {
    const std::uint64_t seed = g.seed.value_or(g.config_path.empty() ? 1 : load(g).seed);
    std::vector<double> angles;
    double spread = a.spread_deg;
    if (a.random_angles > 0) {
      if (spread == 0.0) spread = 0.5 * 22.5 / l_eff;
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-spread, spread);
      for (std::size_t i = 0; i < a.random_angles; ++i) angles.push_back(u(rng));
    }
    const auto trials = metrology::simulate_angle_trials(cfg, a.trials, seed, a.random_angles ? 0.0 : spread, angles);
    if (!g.out.empty()) metrology::write_trials_csv(std::filesystem::path(g.out), trials);
    const auto s = metrology::summarize(trials);
    j["mc"] = {{"trials", s.trials}, {"seed", seed},
               {"out_of_range", s.out_of_range},
               {"mean_error_deg", s.mean_error_deg},
               {"std_error_deg", s.std_error_deg},
               {"std_over_sensitivity", s.std_error_deg / (dg * kDeg)}};
  }

  if (g.json_report) {
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << (a.pol ? "polarization (l_eff=1)" : "oam l=" + std::to_string(l_eff)) << ", V=" << num(a.visibility)
            << ", N=" << cfg.pairs << ": delta_gamma = " << num(dg) << " rad = " << num(dg * kDeg) << " deg\n";
  if (a.target_deg)
    std::cout << "required pairs for +-" << num(*a.target_deg) << " deg: " << cfg.pairs << '\n';
  std::cout << "enhancement over polarization: x" << num(metrology::enhancement_factor(l_eff)) << '\n';
  if (j.contains("mc")) {
    const auto& m = j["mc"];
    std::cout << "monte carlo: " << m["trials"].get<std::size_t>() << " trials, std "
              << num(m["std_error_deg"].get<double>()) << " deg (" << num(m["std_over_sensitivity"].get<double>(), 4)
              << " x predicted), mean error " << num(m["mean_error_deg"].get<double>()) << " deg, "
              << m["out_of_range"].get<std::size_t>() << " out of range";
    if (!g.out.empty()) std::cout << "; trials written to " << g.out;
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization-to-OAM entanglement transfer simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config_path, "Experiment config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the config seed");
  app.add_option("--out", g.out, "Output file (CSV or PGM)");
  app.add_flag("--json-report", g.json_report, "Machine-readable summary on stdout");

  int l_render = 0;
  std::string petals_out;
  auto* render = app.add_subcommand("render-pattern", "Write the spiral phase pattern as a P5 graymap");
  render->add_option("--l", l_render, "Topological charge")->required();
  render->add_option("--petals-out", petals_out, "Also write the petal intensity image");

  std::vector<int> sweep_ls{10, 100, 300};
  std::optional<int> sweep_os;
  auto* sweep = app.add_subcommand("efficiency-sweep", "Conversion efficiency of the pixelated pattern per l");
  sweep->add_option("--l", sweep_ls, "Comma-separated list of l")->delimiter(',');
  sweep->add_option("--oversample", sweep_os, "Samples per pixel side (default from config)");

  auto* simulate = app.add_subcommand("simulate-scan", "Poisson-sampled coincidence scan as CSV");

  std::string in_path;
  bool correct = false;
  double k = 3.0;
  std::optional<double> window;
  auto* analyze_cmd = app.add_subcommand("analyze", "Visibilities and witness from a count table");
  analyze_cmd->add_option("--in", in_path, "Count table CSV")->required();
  analyze_cmd->add_flag("--correct-accidentals", correct, "Subtract window * S_a * S_b / T");
  analyze_cmd->add_option("--k", k, "Witness significance threshold in sigma");
  analyze_cmd->add_option("--window", window, "Coincidence window in seconds");

  int steps = 256;
  auto* bound_cmd = app.add_subcommand("bound", "Numerical separable bound of the witness");
  bound_cmd->add_option("--steps", steps, "Grid steps per dimension (>= 32)");

  MetrologyArgs ma;
  auto* metro = app.add_subcommand("metrology", "Angular sensitivity budget and Monte-Carlo estimation");
  auto* pol_flag = metro->add_flag("--pol", ma.pol, "Polarization fringe (l_eff = 1)");
  metro->add_option("--l", ma.l, "OAM value")->excludes(pol_flag);
  metro->add_option("--visibility", ma.visibility, "Fringe visibility");
  metro->add_option("--target-deg", ma.target_deg, "Target precision in degrees");
  metro->add_option("--pairs", ma.pairs, "Detected pairs N");
  metro->add_option("--trials", ma.trials, "Monte-Carlo trials (writes CSV to --out)");
  metro->add_option("--spread-deg", ma.spread_deg, "True angles drawn uniformly in +-spread");
  metro->add_option("--random-angles", ma.random_angles, "Cycle through this many random true angles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*render) return render_pattern(g, l_render, petals_out);
    if (*sweep) return efficiency_sweep(g, sweep_ls, sweep_os);
    if (*simulate) return simulate_scan(g);
    if (*analyze_cmd) return analyze(g, in_path, correct, k, window);
    if (*bound_cmd) return bound(g, steps);
    if (*metro) return metrology_cmd(g, ma);
  } catch (const oament::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
