#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oament/config.hpp"
#include "oament/counts.hpp"
#include "oament/errors.hpp"
#include "oament/mask.hpp"
#include "oament/metrology.hpp"
#include "oament/slm.hpp"
#include "oament/state.hpp"

namespace py = pybind11;
using namespace oament;

namespace {

py::array_t<double> phase_array(const slm::PhaseGrid& g) {
  const auto& spec = g.spec();
  py::array_t<double> out({spec.height_px, spec.width_px});
  auto v = out.mutable_unchecked<2>();
  for (int j = 0; j < spec.height_px; ++j)
    for (int i = 0; i < spec.width_px; ++i) v(j, i) = g.at(i, j);
  return out;
}

py::array_t<double> intensity_array(const slm::IntensityGrid& g) {
  py::array_t<double> out({g.ny, g.nx});
  auto v = out.mutable_unchecked<2>();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) v(j, i) = g(i, j);
  return out;
}

}  // namespace

PYBIND11_MODULE(_oament, m) {
  m.doc() = "Polarization-to-OAM entanglement transfer simulator";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  (void)validation;

  py::enum_<state::Arm>(m, "Arm").value("A", state::Arm::A).value("B", state::Arm::B);

  py::class_<state::ArmBasis>(m, "ArmBasis")
      .def_static("polarization", &state::ArmBasis::polarization)
      .def_static("oam", &state::ArmBasis::oam)
      .def("is_oam", &state::ArmBasis::is_oam)
      .def_readonly("l", &state::ArmBasis::l)
      .def("__eq__", [](const state::ArmBasis& a, const state::ArmBasis& b) { return a == b; });

  py::class_<state::TwoPhotonState>(m, "TwoPhotonState")
      .def(py::init<state::ArmBasis, state::ArmBasis, const std::array<state::cplx, 4>&>())
      .def("amplitude", &state::TwoPhotonState::amplitude)
      .def_property_readonly("amplitudes", &state::TwoPhotonState::amplitudes)
      .def_property_readonly("arm_a", &state::TwoPhotonState::arm_a)
      .def_property_readonly("arm_b", &state::TwoPhotonState::arm_b)
      .def("norm_squared", &state::TwoPhotonState::norm_squared)
      .def("concurrence", &state::TwoPhotonState::concurrence);

  py::class_<state::Analyzer>(m, "Analyzer").def_readonly("ket", &state::Analyzer::ket);

  m.def("make_entangled", &state::make_entangled, py::arg("alpha"), py::arg("beta"), py::arg("phi"));
  m.def("transfer_arm", &state::transfer_arm, py::arg("state"), py::arg("arm"), py::arg("l"));
  m.def("oam_analyzer", &state::oam_analyzer, py::arg("l"), py::arg("phi"));
  m.def("polarization_analyzer", &state::polarization_analyzer, py::arg("theta"));
  m.def("projection_probability", &state::projection_probability);
  m.def("mask_angle_to_phase", &state::mask_angle_to_phase, py::arg("gamma_deg"), py::arg("l"));

  py::class_<mask::SlitMask>(m, "SlitMask")
      .def(py::init<int, double, double>(), py::arg("l"), py::arg("width_ratio"), py::arg("orientation_deg") = 0.0)
      .def_readonly("l", &mask::SlitMask::l)
      .def_readonly("width_ratio", &mask::SlitMask::width_ratio)
      .def_readonly("orientation_deg", &mask::SlitMask::orientation_deg)
      .def("rotated", &mask::SlitMask::rotated)
      .def("period_deg", &mask::SlitMask::period_deg);
  m.def("is_open", &mask::is_open);
  m.def("visibility_factor", &mask::visibility_factor, py::arg("width_ratio"));
  m.def("transmission_probability", &mask::transmission_probability, py::arg("mask"), py::arg("l"), py::arg("phi"));
  m.def("coincidence_probability", &mask::coincidence_probability, py::arg("state"), py::arg("mask_a"),
        py::arg("mask_b"), py::arg("source_visibility") = 1.0);
  m.def("hybrid_coincidence_probability", &mask::hybrid_coincidence_probability, py::arg("state"),
        py::arg("polarizer_deg"), py::arg("mask"), py::arg("source_visibility") = 1.0);

  py::class_<slm::SlmSpec>(m, "SlmSpec")
      .def(py::init<int, int, double>(), py::arg("width_px") = 1920, py::arg("height_px") = 1080,
           py::arg("pixel_pitch") = 8e-6)
      .def_readonly("width_px", &slm::SlmSpec::width_px)
      .def_readonly("height_px", &slm::SlmSpec::height_px)
      .def_readonly("pixel_pitch", &slm::SlmSpec::pixel_pitch)
      .def("short_half_extent", &slm::SlmSpec::short_half_extent);
  py::class_<slm::GridGeometry>(m, "GridGeometry")
      .def(py::init([](int nx, int ny, double spacing) { return slm::GridGeometry{nx, ny, spacing}; }),
           py::arg("nx"), py::arg("ny"), py::arg("spacing"));
  m.def(
      "spiral_phase_pattern", [](const slm::SlmSpec& s, int l) { return phase_array(slm::spiral_phase_pattern(s, l)); },
      py::arg("spec"), py::arg("l"));
  m.def(
      "petal_intensity",
      [](int l, double phi, double waist, const slm::GridGeometry& g) {
        return intensity_array(slm::petal_intensity(l, phi, waist, g));
      },
      py::arg("l"), py::arg("phi"), py::arg("waist"), py::arg("geometry"));
  m.def(
      "count_petals",
      [](int l, double phi, double waist, const slm::GridGeometry& g, double r_min, double r_max) {
        return slm::count_petals(slm::petal_intensity(l, phi, waist, g), r_min, r_max);
      },
      py::arg("l"), py::arg("phi"), py::arg("waist"), py::arg("geometry"), py::arg("r_min"), py::arg("r_max"));
  m.def("conversion_efficiency", &slm::conversion_efficiency, py::arg("spec"), py::arg("l"), py::arg("waist"),
        py::arg("oversample") = 4);
  m.def("default_waist", &slm::default_waist, py::arg("spec"), py::arg("l"));
  m.def("pixels_per_period", &slm::pixels_per_period, py::arg("spec"), py::arg("l"), py::arg("radius"));
  m.def("aliasing_radius", &slm::aliasing_radius, py::arg("spec"), py::arg("l"));
  m.def("ring_radius", &slm::ring_radius, py::arg("l"), py::arg("waist"));

  py::class_<counts::Estimate>(m, "Estimate")
      .def(py::init([](double v, double s) { return counts::Estimate{v, s}; }), py::arg("value"), py::arg("sigma"))
      .def_readonly("value", &counts::Estimate::value)
      .def_readonly("sigma", &counts::Estimate::sigma);
  py::enum_<counts::Verdict>(m, "Verdict")
      .value("Entangled", counts::Verdict::Entangled)
      .value("SeparableCompatible", counts::Verdict::SeparableCompatible)
      .value("Inconclusive", counts::Verdict::Inconclusive);
  py::class_<counts::WitnessResult>(m, "WitnessResult")
      .def_readonly("w", &counts::WitnessResult::w)
      .def_readonly("w_sigma", &counts::WitnessResult::w_sigma)
      .def_readonly("exceedance_sigma", &counts::WitnessResult::exceedance_sigma)
      .def_readonly("verdict", &counts::WitnessResult::verdict);
  m.attr("SEPARABLE_BOUND") = counts::kSeparableBound;
  m.def("visibility_from_projections", &counts::visibility_from_projections, py::arg("c_par"), py::arg("c_perp"));
  m.def("witness", &counts::witness, py::arg("vis_1"), py::arg("vis_2"), py::arg("k") = 3.0);
  m.def("projection_witness", &counts::projection_witness, py::arg("state"), py::arg("gamma1_deg"));
  m.def("separable_witness", &counts::separable_witness);
  py::class_<counts::BoundResult>(m, "BoundResult")
      .def_readonly("value", &counts::BoundResult::value)
      .def_readonly("a", &counts::BoundResult::a)
      .def_readonly("b", &counts::BoundResult::b)
      .def_readonly("c", &counts::BoundResult::c)
      .def_readonly("d", &counts::BoundResult::d)
      .def_readonly("phi1", &counts::BoundResult::phi1)
      .def_readonly("phi2", &counts::BoundResult::phi2);
  m.def("separable_bound_oracle", &counts::separable_bound_oracle, py::arg("grid_steps") = 256);

  py::class_<counts::FringeFit>(m, "FringeFit")
      .def_readonly("offset", &counts::FringeFit::offset)
      .def_readonly("visibility", &counts::FringeFit::visibility)
      .def_readonly("sigma_visibility", &counts::FringeFit::sigma_visibility)
      .def_readonly("phase", &counts::FringeFit::phase);
  m.def(
      "simulate_and_fit",
      [](const std::filesystem::path& config_path, std::uint64_t seed) {
        const auto c = config::load_config(config_path);
        const auto exp = config::build_experiment(c);
        const auto rec = counts::simulate_scan(exp, c.sweep, seed);
        const auto& l = c.sweep.axis == state::Arm::A ? c.l_a : c.l_b;
        return counts::fit_fringe(rec, l.value_or(1), c.sweep.axis);
      },
      py::arg("config_path"), py::arg("seed"),
      "Simulate the scan described by a config file and fit its fringe.");
  m.def(
      "analyze_csv",
      [](const std::filesystem::path& path, double k, bool correct) {
        counts::AnalyzeOptions opt;
        opt.k = k;
        opt.correct_accidentals = correct;
        const auto rep = counts::analyze(counts::ingest_csv(path), opt);
        py::dict d;
        py::list vis;
        for (const auto& g : rep.groups) vis.append(py::make_tuple(g.visibility.value, g.visibility.sigma));
        d["visibilities"] = vis;
        d["witness"] = rep.witness ? py::cast(*rep.witness) : py::none();
        return d;
      },
      py::arg("path"), py::arg("k") = 3.0, py::arg("correct_accidentals") = false);

  py::class_<metrology::SensingConfig>(m, "SensingConfig")
      .def(py::init([](int l, bool pol, double v, std::int64_t n) { return metrology::SensingConfig{l, pol, v, n}; }),
           py::arg("l") = 1, py::arg("polarization") = false, py::arg("visibility") = 1.0, py::arg("pairs") = 1);
  m.def("angular_sensitivity", &metrology::angular_sensitivity);
  m.def("required_pairs", &metrology::required_pairs, py::arg("target_rad"), py::arg("l"), py::arg("visibility"));
  m.def("enhancement_factor", &metrology::enhancement_factor);
  m.attr("SHOT_NOISE_PREFACTOR") = metrology::kShotNoisePrefactor;
}
