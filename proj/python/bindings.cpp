#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dvsnoise/calibrate.hpp"
#include "dvsnoise/config_io.hpp"
#include "dvsnoise/optimize.hpp"
#include "dvsnoise/timesim.hpp"
#include "dvsnoise/version.hpp"

namespace py = pybind11;
using namespace dvs;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DVS pixel shot-noise model: spectra, event rates, simulation and "
            "bias selection";
  m.attr("__version__") = kVersion;

  py::register_exception<dvs::error>(m, "DvsError", PyExc_RuntimeError);

  py::enum_<Node>(m, "Node")
      .value("v_in", Node::v_in)
      .value("v_pr", Node::v_pr)
      .value("v_sf", Node::v_sf);
  py::enum_<NoiseSource>(m, "NoiseSource")
      .value("photodiode", NoiseSource::photodiode)
      .value("amplifier", NoiseSource::amplifier)
      .value("follower", NoiseSource::follower);
  py::enum_<DriveMode>(m, "DriveMode")
      .value("gaussian_white", DriveMode::gaussian_white)
      .value("poisson_photon", DriveMode::poisson_photon);
  py::enum_<RolloffPolicy>(m, "RolloffPolicy")
      .value("require_rolloff", RolloffPolicy::require_rolloff)
      .value("grid_bounded", RolloffPolicy::grid_bounded);
  py::enum_<BiasRationale>(m, "BiasRationale")
      .value("sf_limited", BiasRationale::sf_limited)
      .value("pr_limited", BiasRationale::pr_limited)
      .value("power_capped", BiasRationale::power_capped);

  py::class_<DeviceParams>(m, "DeviceParams")
      .def(py::init<>())
      .def_static("davis346", &DeviceParams::davis346)
      .def("validate", &DeviceParams::validate)
      .def_readwrite("U_T", &DeviceParams::U_T)
      .def_readwrite("kappa_fb", &DeviceParams::kappa_fb)
      .def_readwrite("kappa_n", &DeviceParams::kappa_n)
      .def_readwrite("kappa_sf", &DeviceParams::kappa_sf)
      .def_readwrite("C_in", &DeviceParams::C_in)
      .def_readwrite("C_out", &DeviceParams::C_out)
      .def_readwrite("C_sf", &DeviceParams::C_sf)
      .def_readwrite("V_A", &DeviceParams::V_A)
      .def_readwrite("q_e", &DeviceParams::q_e)
      .def_readwrite("I_leak", &DeviceParams::I_leak)
      .def_readwrite("lux_to_amps", &DeviceParams::lux_to_amps)
      .def_readwrite("C_2_equiv", &DeviceParams::C_2_equiv)
      .def_readwrite("V_dd", &DeviceParams::V_dd);

  py::class_<BiasConfig>(m, "BiasConfig")
      .def(py::init<>())
      .def_static("nominal", &BiasConfig::nominal)
      .def("validate", &BiasConfig::validate)
      .def_readwrite("I_pr", &BiasConfig::I_pr)
      .def_readwrite("I_sf", &BiasConfig::I_sf)
      .def_readwrite("theta_on", &BiasConfig::theta_on)
      .def_readwrite("theta_off", &BiasConfig::theta_off)
      .def_readwrite("delta_refr", &BiasConfig::delta_refr);

  py::class_<OperatingPoint>(m, "OperatingPoint")
      .def(py::init<>())
      .def_static("from_lux", &OperatingPoint::from_lux, py::arg("lux"),
                  py::arg("params"))
      .def_static("from_current", &OperatingPoint::from_current, py::arg("i_pd"))
      .def_readwrite("I_pd", &OperatingPoint::I_pd)
      .def_readwrite("illuminance", &OperatingPoint::illuminance);

  m.def("lux_to_photocurrent", &lux_to_photocurrent, py::arg("illuminance"),
        py::arg("params"));

  py::class_<SmallSignalSystem>(m, "SmallSignalSystem")
      .def_readonly("signal_gain_dc", &SmallSignalSystem::signal_gain_dc)
      .def_readonly("sf_gain", &SmallSignalSystem::sf_gain)
      .def_readonly("params", &SmallSignalSystem::params)
      .def_readonly("bias", &SmallSignalSystem::bias)
      .def_readonly("op", &SmallSignalSystem::op)
      .def("natural_frequencies",
           [](const SmallSignalSystem& sys) {
             Eigen::Vector3cd e = sys.natural_frequencies();
             return std::vector<std::complex<double>>{e(0), e(1), e(2)};
           })
      .def("fastest_pole_hz", &SmallSignalSystem::fastest_pole_hz)
      .def("slowest_pole_hz", &SmallSignalSystem::slowest_pole_hz)
      .def("sf_pole_hz", &SmallSignalSystem::sf_pole_hz)
      .def("injection_psd", &SmallSignalSystem::injection_psd, py::arg("source"))
      .def("without_source", &SmallSignalSystem::without_source, py::arg("source"))
      .def("node_signal_gain", &SmallSignalSystem::node_signal_gain, py::arg("node"));

  m.def("build_system", &build_system, py::arg("op"), py::arg("bias"),
        py::arg("params"));
  m.def(
      "transfer_fn",
      [](const SmallSignalSystem& sys, NoiseSource src, Node node, double f) {
        return transfer_fn(sys, src, node, f);
      },
      py::arg("sys"), py::arg("source"), py::arg("node"), py::arg("f_hz"));
  m.def(
      "signal_transfer_fn",
      [](const SmallSignalSystem& sys, Node node, double f) {
        return transfer_fn(sys, SignalSource{}, node, f);
      },
      py::arg("sys"), py::arg("node"), py::arg("f_hz"));
  m.def("bandwidth_3db", &bandwidth_3db, py::arg("sys"), py::arg("node"));

  py::class_<SignalTfClosedForm>(m, "SignalTfClosedForm")
      .def_readonly("dc_gain", &SignalTfClosedForm::dc_gain)
      .def_readonly("f0_hz", &SignalTfClosedForm::f0_hz)
      .def_readonly("q_factor", &SignalTfClosedForm::q_factor)
      .def_readonly("pole1_hz", &SignalTfClosedForm::pole1_hz)
      .def_readonly("pole2_hz", &SignalTfClosedForm::pole2_hz)
      .def_readonly("poles_real", &SignalTfClosedForm::poles_real)
      .def_readonly("pole_ratio", &SignalTfClosedForm::pole_ratio)
      .def_readonly("sf_pole_hz", &SignalTfClosedForm::sf_pole_hz)
      .def_readonly("loop_gain", &SignalTfClosedForm::loop_gain)
      .def("eval", &SignalTfClosedForm::eval, py::arg("node"), py::arg("f_hz"));
  m.def("signal_tf_closed_form", &signal_tf_closed_form, py::arg("op"),
        py::arg("bias"), py::arg("params"));

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def_static("log_spaced", &FrequencyGrid::log_spaced, py::arg("f_min"),
                  py::arg("f_max"), py::arg("points_per_decade") = kDefaultPointsPerDecade)
      .def_static("for_node", &FrequencyGrid::for_node, py::arg("sys"), py::arg("node"),
                  py::arg("points_per_decade") = kDefaultPointsPerDecade)
      .def_property_readonly("f_hz",
                             [](const FrequencyGrid& g) { return as_array(g.f_hz); })
      .def("__len__", [](const FrequencyGrid& g) { return g.size(); });

  py::class_<SpectrumSeries>(m, "SpectrumSeries")
      .def_readonly("node", &SpectrumSeries::node)
      .def_readonly("tc_referred", &SpectrumSeries::tc_referred)
      .def_property_readonly("f_hz",
                             [](const SpectrumSeries& s) { return as_array(s.grid.f_hz); })
      .def_property_readonly("pd", [](const SpectrumSeries& s) { return as_array(s.pd); })
      .def_property_readonly("pr", [](const SpectrumSeries& s) { return as_array(s.pr); })
      .def_property_readonly("sf", [](const SpectrumSeries& s) { return as_array(s.sf); })
      .def_property_readonly("total",
                             [](const SpectrumSeries& s) { return as_array(s.total); });

  m.def("psd", &psd, py::arg("sys"), py::arg("node"), py::arg("grid"));
  m.def("refer_to_tc", py::overload_cast<const SpectrumSeries&, const SmallSignalSystem&>(
                           &refer_to_tc),
        py::arg("spectrum"), py::arg("sys"));
  m.def("photon_fraction", &photon_fraction, py::arg("spectrum"));
  m.def("shot_limit_ratio", &shot_limit_ratio, py::arg("spectrum"));

  py::class_<CumulativeRms>(m, "CumulativeRms")
      .def_readonly("node", &CumulativeRms::node)
      .def_readonly("tc_referred", &CumulativeRms::tc_referred)
      .def_readonly("accuracy_warning", &CumulativeRms::accuracy_warning)
      .def_readonly("final_pd", &CumulativeRms::final_pd)
      .def_readonly("final_pr", &CumulativeRms::final_pr)
      .def_readonly("final_sf", &CumulativeRms::final_sf)
      .def_readonly("final_total", &CumulativeRms::final_total)
      .def_property_readonly("f_hz",
                             [](const CumulativeRms& c) { return as_array(c.grid.f_hz); })
      .def_property_readonly("pd", [](const CumulativeRms& c) { return as_array(c.pd); })
      .def_property_readonly("pr", [](const CumulativeRms& c) { return as_array(c.pr); })
      .def_property_readonly("sf", [](const CumulativeRms& c) { return as_array(c.sf); })
      .def_property_readonly("total",
                             [](const CumulativeRms& c) { return as_array(c.total); });
  m.def("cumulative_rms", &cumulative_rms, py::arg("spectrum"));

  py::class_<NoiseStats>(m, "NoiseStats")
      .def_readonly("sigma_tc", &NoiseStats::sigma_tc)
      .def_readonly("nu0_hz", &NoiseStats::nu0_hz)
      .def_readonly("m0", &NoiseStats::m0)
      .def_readonly("m2", &NoiseStats::m2)
      .def_readonly("tail_slope", &NoiseStats::tail_slope)
      .def_readonly("cutoff_limited", &NoiseStats::cutoff_limited);
  m.def("noise_stats", &noise_stats, py::arg("tc_spectrum"),
        py::arg("policy") = RolloffPolicy::require_rolloff);

  py::class_<RatePrediction>(m, "RatePrediction")
      .def_readonly("on_rate", &RatePrediction::on_rate)
      .def_readonly("off_rate", &RatePrediction::off_rate)
      .def_readonly("total_rate", &RatePrediction::total_rate)
      .def_readonly("leak_rate", &RatePrediction::leak_rate)
      .def_readonly("sigma_tc", &RatePrediction::sigma_tc)
      .def_readonly("nu0_hz", &RatePrediction::nu0_hz);
  m.def("rice_rate", &rice_rate, py::arg("stats"), py::arg("bias"));
  m.def("leak_rate", &leak_rate, py::arg("params"), py::arg("bias"), py::arg("sys"));
  m.def("predict_rates", &predict_rates, py::arg("op"), py::arg("bias"),
        py::arg("params"), py::arg("points_per_decade") = kDefaultPointsPerDecade);
  m.def("predict_rates_pr_ablated", &predict_rates_pr_ablated, py::arg("op"),
        py::arg("bias"), py::arg("params"),
        py::arg("points_per_decade") = kDefaultPointsPerDecade);

  py::class_<StimulusPoint>(m, "StimulusPoint")
      .def(py::init<double, double>(), py::arg("t"), py::arg("log_e"))
      .def_readwrite("t", &StimulusPoint::t)
      .def_readwrite("log_e", &StimulusPoint::log_e);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("duration", &SimConfig::duration)
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("drive_mode", &SimConfig::drive_mode)
      .def_readwrite("record_traces", &SimConfig::record_traces)
      .def_readwrite("trace_decimate", &SimConfig::trace_decimate)
      .def_readwrite("warmup", &SimConfig::warmup)
      .def_readwrite("stimulus", &SimConfig::stimulus);

  py::class_<EventRecord>(m, "EventRecord")
      .def_readonly("t", &EventRecord::t)
      .def_readonly("polarity", &EventRecord::polarity)
      .def("__repr__", [](const EventRecord& e) {
        return "EventRecord(t=" + std::to_string(e.t) +
               ", polarity=" + std::to_string(e.polarity) + ")";
      });

  py::class_<SimSummary>(m, "SimSummary")
      .def_readonly("duration", &SimSummary::duration)
      .def_readonly("warmup", &SimSummary::warmup)
      .def_readonly("dt", &SimSummary::dt)
      .def_readonly("n_steps", &SimSummary::n_steps)
      .def_readonly("mean_v_pr", &SimSummary::mean_v_pr)
      .def_readonly("var_v_pr", &SimSummary::var_v_pr)
      .def_readonly("mean_v_sf", &SimSummary::mean_v_sf)
      .def_readonly("var_v_sf", &SimSummary::var_v_sf)
      .def_readonly("on_rate", &SimSummary::on_rate)
      .def_readonly("off_rate", &SimSummary::off_rate)
      .def_readonly("total_rate", &SimSummary::total_rate)
      .def_readonly("leak_event_rate", &SimSummary::leak_event_rate)
      .def_readonly("seed", &SimSummary::seed);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("events", &SimResult::events)
      .def_readonly("summary", &SimResult::summary)
      .def_property_readonly("trace_dt",
                             [](const SimResult& r) { return r.traces.dt; })
      .def_property_readonly("v_pr",
                             [](const SimResult& r) { return as_array(r.traces.v_pr); })
      .def_property_readonly("v_sf",
                             [](const SimResult& r) { return as_array(r.traces.v_sf); });

  m.def("simulate", &simulate, py::arg("sys"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "empirical_psd",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> trace,
         double dt, Node node) {
        std::vector<double> v(trace.data(), trace.data() + trace.size());
        return empirical_psd(v, dt, node);
      },
      py::arg("trace"), py::arg("dt"), py::arg("node") = Node::v_pr);

  py::class_<SweepSpec>(m, "SweepSpec")
      .def(py::init<>())
      .def_readwrite("i_pd_values", &SweepSpec::i_pd_values)
      .def_readwrite("i_pr_values", &SweepSpec::i_pr_values)
      .def_readwrite("i_sf_values", &SweepSpec::i_sf_values)
      .def_readwrite("base_bias", &SweepSpec::base_bias)
      .def_readwrite("points_per_decade", &SweepSpec::points_per_decade)
      .def_static("log_grid", &SweepSpec::log_grid, py::arg("lo"), py::arg("hi"),
                  py::arg("per_decade"));

  py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("i_pd", &SweepRecord::i_pd)
      .def_readonly("i_pr", &SweepRecord::i_pr)
      .def_readonly("i_sf", &SweepRecord::i_sf)
      .def_readonly("rate_hz", &SweepRecord::rate_hz)
      .def_readonly("bandwidth_hz", &SweepRecord::bandwidth_hz)
      .def_readonly("rms_tc", &SweepRecord::rms_tc)
      .def_readonly("photon_fraction", &SweepRecord::photon_fraction)
      .def_readonly("power_w", &SweepRecord::power_w)
      .def_readonly("on_rate", &SweepRecord::on_rate)
      .def_readonly("off_rate", &SweepRecord::off_rate)
      .def_readonly("leak_rate", &SweepRecord::leak_rate)
      .def_readonly("sigma_tc", &SweepRecord::sigma_tc)
      .def_readonly("nu0_hz", &SweepRecord::nu0_hz)
      .def_readonly("error", &SweepRecord::error);
  m.def("sweep", &sweep, py::arg("spec"), py::arg("params"),
        py::call_guard<py::gil_scoped_release>());
  m.def("evaluate_point", &evaluate_point, py::arg("op"), py::arg("bias"),
        py::arg("params"), py::arg("points_per_decade") = kDefaultPointsPerDecade);

  py::class_<OptimizeConstraints>(m, "OptimizeConstraints")
      .def(py::init<>())
      .def_readwrite("min_bandwidth_hz", &OptimizeConstraints::min_bandwidth_hz)
      .def_readwrite("max_power_w", &OptimizeConstraints::max_power_w)
      .def_readwrite("rate_slack", &OptimizeConstraints::rate_slack)
      .def_readwrite("sf_margin", &OptimizeConstraints::sf_margin)
      .def_readwrite("i_pr_min", &OptimizeConstraints::i_pr_min)
      .def_readwrite("i_pr_max", &OptimizeConstraints::i_pr_max)
      .def_readwrite("i_sf_min", &OptimizeConstraints::i_sf_min)
      .def_readwrite("grid_per_decade", &OptimizeConstraints::grid_per_decade);

  py::class_<BiasRecommendation>(m, "BiasRecommendation")
      .def_readonly("i_pr", &BiasRecommendation::i_pr)
      .def_readonly("i_sf", &BiasRecommendation::i_sf)
      .def_readonly("predicted_rate_hz", &BiasRecommendation::predicted_rate_hz)
      .def_readonly("predicted_bandwidth_hz",
                    &BiasRecommendation::predicted_bandwidth_hz)
      .def_readonly("predicted_power_w", &BiasRecommendation::predicted_power_w)
      .def_readonly("asymptotic_rate_hz", &BiasRecommendation::asymptotic_rate_hz)
      .def_readonly("rationale", &BiasRecommendation::rationale)
      .def_readonly("feasible", &BiasRecommendation::feasible)
      .def_readonly("binding_constraint", &BiasRecommendation::binding_constraint);
  m.def("optimize", &optimize, py::arg("op"), py::arg("constraints"),
        py::arg("params"), py::arg("base_bias") = BiasConfig::nominal(),
        py::call_guard<py::gil_scoped_release>());

  py::class_<CalibrationPoint>(m, "CalibrationPoint")
      .def(py::init<double, double>(), py::arg("f_hz"), py::arg("psd_v2_hz"))
      .def_readwrite("f_hz", &CalibrationPoint::f_hz)
      .def_readwrite("psd_v2_hz", &CalibrationPoint::psd_v2_hz);

  py::class_<CalibrationOptions>(m, "CalibrationOptions")
      .def(py::init<>())
      .def_readwrite("node", &CalibrationOptions::node)
      .def_readwrite("bias", &CalibrationOptions::bias)
      .def_readwrite("op", &CalibrationOptions::op)
      .def_readwrite("free_names", &CalibrationOptions::free_names)
      .def_readwrite("n_starts", &CalibrationOptions::n_starts)
      .def_readwrite("max_cycles", &CalibrationOptions::max_cycles)
      .def_readwrite("seed", &CalibrationOptions::seed);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("params", &CalibrationResult::params)
      .def_readonly("fitted", &CalibrationResult::fitted)
      .def_readonly("residual", &CalibrationResult::residual)
      .def_readonly("converged", &CalibrationResult::converged)
      .def_readonly("warnings", &CalibrationResult::warnings);
  m.def("calibrate", &calibrate, py::arg("measured"), py::arg("known"),
        py::arg("options"), py::call_guard<py::gil_scoped_release>());
  m.def("calibratable_parameters", &calibratable_parameters);
}
