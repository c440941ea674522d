#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vsimaser/analysis.hpp"
#include "vsimaser/cli.hpp"
#include "vsimaser/errors.hpp"
#include "vsimaser/isotopes.hpp"
#include "vsimaser/population.hpp"
#include "vsimaser/spectrum.hpp"
#include "vsimaser/spin_model.hpp"
#include "vsimaser/threshold.hpp"

namespace py = pybind11;
using namespace vsimaser;

namespace {

py::array_t<double> to_array(std::span<const double> values) {
  py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

SpectrumTrace make_trace(const std::vector<double>& field, const std::vector<double>& signal) {
  return SpectrumTrace(field, signal);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spin model, spectra, fits and maser threshold for V2 centres in SiC";

  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<NoInversionError>(m, "NoInversionError", validation.ptr());
  py::register_exception<NoResonanceError>(m, "NoResonanceError", numerical.ptr());
  py::register_exception<DegenerateFitError>(m, "DegenerateFitError", numerical.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", numerical.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", numerical.ptr());

  py::enum_<TransitionLabel>(m, "TransitionLabel")
      .value("B_minus", TransitionLabel::BMinus)
      .value("B_zero", TransitionLabel::BZero)
      .value("B_plus", TransitionLabel::BPlus);

  py::enum_<WeightMode>(m, "WeightMode")
      .value("abundance_constrained", WeightMode::AbundanceConstrained)
      .value("free", WeightMode::Free);

  py::class_<SpinSystem>(m, "SpinSystem")
      .def(py::init<>())
      .def_readwrite("spin", &SpinSystem::spin)
      .def_readwrite("g_factor", &SpinSystem::g_factor)
      .def_readwrite("zfs_d_mhz", &SpinSystem::zfs_d_MHz)
      .def_readwrite("hyperfine_a_mt", &SpinSystem::hyperfine_A_mT)
      .def_readwrite("abundance_i_half", &SpinSystem::abundance_i_half)
      .def_readwrite("n_neighbor_sites", &SpinSystem::n_neighbor_sites);

  py::class_<Orientation>(m, "Orientation")
      .def(py::init<>())
      .def_static("from_degrees", &Orientation::from_degrees, py::arg("theta_deg"))
      .def_readwrite("theta_rad", &Orientation::theta_rad);

  py::class_<SubLine>(m, "SubLine")
      .def_readonly("offset_mt", &SubLine::offset_mT)
      .def_readonly("weight", &SubLine::weight);

  py::class_<Transition>(m, "Transition")
      .def_readonly("label", &Transition::label)
      .def_readonly("resonance_field_mt", &Transition::resonance_field_mT)
      .def_readonly("sign", &Transition::sign)
      .def_readonly("sub_lines", &Transition::sub_lines);

  py::class_<TransitionSet>(m, "TransitionSet")
      .def_readonly("transitions", &TransitionSet::transitions)
      .def_readonly("mw_frequency_ghz", &TransitionSet::mw_frequency_GHz)
      .def("field", [](const TransitionSet& s, TransitionLabel label) {
        for (const auto& t : s.transitions)
          if (t.label == label) return t.resonance_field_mT;
        throw NotFoundError("transition not in set");
      });

  m.def(
      "energy_levels",
      [](const SpinSystem& s, double field_mT, double theta_deg) {
        const Eigen::VectorXd e = energy_levels(s, field_mT, Orientation::from_degrees(theta_deg));
        return to_array({e.data(), static_cast<std::size_t>(e.size())});
      },
      py::arg("system"), py::arg("field_mt"), py::arg("theta_deg"));
  m.def(
      "resonance_fields_exact",
      [](const SpinSystem& s, double freq_GHz, double theta_deg) {
        return resonance_fields_exact(s, freq_GHz, Orientation::from_degrees(theta_deg));
      },
      py::arg("system"), py::arg("mw_frequency_ghz"), py::arg("theta_deg"));
  m.def(
      "splitting_first_order",
      [](const SpinSystem& s, double theta_deg) {
        return splitting_first_order(s, Orientation::from_degrees(theta_deg));
      },
      py::arg("system"), py::arg("theta_deg"));
  m.def("magic_angle", &magic_angle);

  m.def("boltzmann_delta_p", &boltzmann_delta_p, py::arg("mw_frequency_ghz"),
        py::arg("temperature_k"));
  m.def(
      "angular_delta_p",
      [](double dp_max, double theta_deg) {
        return angular_delta_p(dp_max, Orientation::from_degrees(theta_deg));
      },
      py::arg("delta_p_max"), py::arg("theta_deg"));
  m.def(
      "saturation_delta_p",
      [](double dp_max, double p0, double p_alpha, double power) {
        return saturation_delta_p(SaturationParams{dp_max, p0, p_alpha}, power);
      },
      py::arg("delta_p_max"), py::arg("p0_mw"), py::arg("p_alpha_mw"), py::arg("power_mw"));

  m.def(
      "isotope_site_probabilities",
      [](double abundance, int n_sites) {
        const auto p = isotope_site_probabilities(abundance, n_sites);
        return py::dict(py::arg("p_central") = p.p_central,
                        py::arg("p_one_satellite") = p.p_one_satellite,
                        py::arg("p_multi") = p.p_multi);
      },
      py::arg("abundance") = 0.047, py::arg("n_sites") = 12);

  m.def(
      "lorentzian_derivative",
      [](py::array_t<double> field, double hwhm, double amplitude, double center) {
        const LineShapeParams p{hwhm, amplitude, center};
        p.validate();
        auto in = field.unchecked<1>();
        py::array_t<double> out(in.shape(0));
        auto o = out.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < in.shape(0); ++i) o(i) = lorentzian_derivative(in(i), p);
        return out;
      },
      py::arg("field_mt"), py::arg("hwhm_mt"), py::arg("amplitude"), py::arg("center_mt"));

  m.def(
      "synthesize_spectrum",
      [](const SpinSystem& s, double freq_GHz, double theta_deg, double temperature_K,
         double hwhm, double dp_minus, double dp_plus, std::optional<double> dp_zero,
         double step, double noise_sigma, std::optional<std::uint64_t> seed) {
        ExperimentConditions c;
        c.mw_frequency_GHz = freq_GHz;
        c.orientation = Orientation::from_degrees(theta_deg);
        c.temperature_K = temperature_K;
        const auto set = resonance_fields_exact(s, freq_GHz, c.orientation);
        SynthesisOptions opt;
        opt.noise_sigma = noise_sigma;
        opt.seed = seed;
        const auto t = synthesize_spectrum(s, c, covering_grid(set, hwhm, step), hwhm,
                                           Polarization{dp_minus, dp_plus, dp_zero}, opt);
        return py::make_tuple(to_array(t.field_mT()), to_array(t.signal()));
      },
      py::arg("system"), py::arg("mw_frequency_ghz") = 9.3, py::arg("theta_deg") = 0.0,
      py::arg("temperature_k") = 300.0, py::arg("hwhm_mt") = 0.039,
      py::arg("delta_p_minus") = 0.0, py::arg("delta_p_plus") = 0.0,
      py::arg("delta_p_zero") = py::none(), py::arg("step_mt") = 0.002,
      py::arg("noise_sigma") = 0.0, py::arg("seed") = py::none());

  m.def(
      "peak_to_peak",
      [](const std::vector<double>& field, const std::vector<double>& signal, double lo,
         double hi) {
        const auto p = peak_to_peak(make_trace(field, signal), FieldWindow{lo, hi});
        return py::dict(py::arg("amplitude") = p.amplitude,
                        py::arg("width_pp_mt") = p.width_pp_mT,
                        py::arg("center_mt") = p.center_mT);
      },
      py::arg("field_mt"), py::arg("signal"), py::arg("lo_mt"), py::arg("hi_mt"));

  py::class_<LineGroupFit>(m, "LineGroupFit")
      .def_readonly("center_mt", &LineGroupFit::center_mT)
      .def_readonly("hwhm_central_mt", &LineGroupFit::hwhm_central_mT)
      .def_readonly("hwhm_satellite_mt", &LineGroupFit::hwhm_satellite_mT)
      .def_readonly("amplitude", &LineGroupFit::amplitude)
      .def_readonly("satellite_amplitude_low", &LineGroupFit::satellite_amplitude_low)
      .def_readonly("satellite_amplitude_high", &LineGroupFit::satellite_amplitude_high)
      .def_readonly("satellite_offset_mt", &LineGroupFit::satellite_offset_mT)
      .def_readonly("weight_mode", &LineGroupFit::weight_mode)
      .def_readonly("residual_rms", &LineGroupFit::residual_rms)
      .def_readonly("covariance_diag", &LineGroupFit::covariance_diag)
      .def_readonly("iterations", &LineGroupFit::iterations)
      .def("parameter_names", &LineGroupFit::parameter_names)
      .def("parameter_values", &LineGroupFit::parameter_values)
      .def("central_to_satellite_ratio", &LineGroupFit::central_to_satellite_ratio)
      .def("model", &LineGroupFit::model, py::arg("field_mt"));

  m.def(
      "fit_line_group",
      [](const std::vector<double>& field, const std::vector<double>& signal, double lo,
         double hi, double satellite_offset, WeightMode mode, double abundance, int n_sites,
         int max_iterations) {
        const auto trace = make_trace(field, signal);
        const FieldWindow window{lo, hi};
        auto opt = LineGroupFitOptions::from_isotopes(isotope_site_probabilities(abundance, n_sites));
        opt.max_iterations = max_iterations;
        const auto start =
            estimate_line_group(trace, window, satellite_offset, mode, opt.satellite_weight_ratio);
        return fit_line_group(trace, window, start, mode, opt);
      },
      py::arg("field_mt"), py::arg("signal"), py::arg("lo_mt"), py::arg("hi_mt"),
      py::arg("satellite_offset_mt"), py::arg("mode") = WeightMode::AbundanceConstrained,
      py::arg("abundance") = 0.047, py::arg("n_sites") = 12, py::arg("max_iterations") = 500);

  m.def(
      "superradiance_exponent",
      [](double i_plus, double i_hf, std::optional<double> n_plus, std::optional<double> n_hf) {
        if (n_plus.has_value() != n_hf.has_value())
          throw ValidationError("n_plus and n_hf must be given together");
        const auto r = n_plus ? superradiance_exponent(i_plus, i_hf, *n_plus, *n_hf)
                              : superradiance_exponent(i_plus, i_hf,
                                                       isotope_site_probabilities(0.047, 12));
        return py::dict(py::arg("intensity_ratio") = r.intensity_ratio,
                        py::arg("number_ratio") = r.number_ratio,
                        py::arg("exponent_k") = r.exponent_k);
      },
      py::arg("i_plus"), py::arg("i_hf"), py::arg("n_plus") = py::none(),
      py::arg("n_hf") = py::none());

  m.def(
      "fit_saturation",
      [](const std::vector<double>& power, const std::vector<double>& delta_p) {
        if (power.size() != delta_p.size())
          throw ValidationError("power and delta_p differ in length");
        std::vector<SaturationPoint> pts;
        for (std::size_t i = 0; i < power.size(); ++i) pts.push_back({power[i], delta_p[i]});
        const auto f = fit_saturation(pts, initial_saturation_guess(pts), {});
        return py::dict(py::arg("delta_p_max") = f.params.delta_p_max,
                        py::arg("p0_mw") = f.params.p0_mW,
                        py::arg("p_alpha_mw") = f.params.p_alpha_mW,
                        py::arg("residual_rms") = f.residual_rms,
                        py::arg("iterations") = f.iterations,
                        py::arg("degenerate") = f.degenerate);
      },
      py::arg("power_mw"), py::arg("delta_p"));

  py::class_<MaserParams>(m, "MaserParams")
      .def(py::init<double, double, double, double, double, double>(), py::arg("pump_rate"),
           py::arg("relaxation_rate"), py::arg("spin_decay_rate"), py::arg("cavity_freq"),
           py::arg("spin_count"), py::arg("spin_photon_coupling"))
      .def_readwrite("pump_rate", &MaserParams::pump_rate)
      .def_readwrite("relaxation_rate", &MaserParams::relaxation_rate)
      .def_readwrite("spin_decay_rate", &MaserParams::spin_decay_rate)
      .def_readwrite("cavity_freq", &MaserParams::cavity_freq)
      .def_readwrite("spin_count", &MaserParams::spin_count)
      .def_readwrite("spin_photon_coupling", &MaserParams::spin_photon_coupling);

  m.def("threshold_q", &threshold_q, py::arg("params"));
  m.def(
      "masing_margin",
      [](double q_actual, const MaserParams& p) {
        const auto r = masing_margin(q_actual, p);
        return py::dict(py::arg("above_threshold") = r.above_threshold,
                        py::arg("margin") = r.margin);
      },
      py::arg("q_actual"), py::arg("params"));
  m.def(
      "threshold_sweep",
      [](const MaserParams& base, const std::string& axis, const std::vector<double>& values) {
        py::list rows;
        for (const auto& r : threshold_sweep(base, axis, values))
          rows.append(py::make_tuple(r.axis_value, r.q_min, std::string(to_string(r.status))));
        return rows;
      },
      py::arg("base"), py::arg("axis"), py::arg("values"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
