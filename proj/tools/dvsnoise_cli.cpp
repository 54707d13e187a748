// Command-line front end: every subcommand is a thin adapter over one library
// operation, reading a JSON config and emitting CSV/JSON plus a run manifest.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <complex>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dvsnoise/config_io.hpp"
#include "dvsnoise/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  bool error_json = false;
  std::string node = "v_pr";
  bool tc = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_node = false,
                bool with_tc = false) {
  cmd->add_option("--config", opts.config_path, "JSON config file")->required();
  cmd->add_option("--out", opts.out_dir, "output directory (default: .)");
  cmd->add_option("--format", opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", opts.seed, "override the simulation seed");
  cmd->add_flag("--error-json", opts.error_json,
                "print a machine-readable error object on failure");
  if (with_node) {
    cmd->add_option("--node", opts.node, "circuit node (v_in, v_pr, v_sf)")
        ->check(CLI::IsMember({"v_in", "v_pr", "v_sf"}));
  }
  if (with_tc) {
    cmd->add_flag("--tc", opts.tc, "refer values to TC log-e units");
  }
}

fs::path prepare_out_dir(const CommonOpts& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

void finish(const CommonOpts& opts, const dvs::RunConfig& config,
            const std::string& command, std::vector<std::string> outputs,
            std::vector<std::string> warnings) {
  fs::path dir(opts.out_dir);
  dvs::RunManifest manifest;
  manifest.command = command;
  manifest.outputs = std::move(outputs);
  manifest.warnings = std::move(warnings);
  if (command == "simulate") manifest.seed = config.sim.seed;
  fs::path mpath = dir / "manifest.json";
  dvs::write_manifest(mpath, manifest, config);
  for (const std::string& w : manifest.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  std::cout << command << ": wrote " << manifest.outputs.size()
            << " file(s) + manifest to " << dir.string() << "\n";
}

int run_psd(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  dvs::Node node = dvs::parse_node(opts.node);
  dvs::SmallSignalSystem sys =
      dvs::build_system(config.require_op("psd"), config.bias, config.device);
  dvs::SpectrumSeries series = dvs::psd(sys, node, config.grid.make(sys, node));
  if (opts.tc) series = dvs::refer_to_tc(series, sys);

  fs::path dir = prepare_out_dir(opts);
  std::string name = opts.format == "csv" ? "psd.csv" : "psd.json";
  if (opts.format == "csv") {
    dvs::write_spectrum_csv(dir / name, series);
  } else {
    dvs::write_json_file(dir / name, dvs::spectrum_to_json(series));
  }
  finish(opts, config, "psd", {name}, {});
  return 0;
}

int run_rms(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  dvs::Node node = dvs::parse_node(opts.node);
  dvs::SmallSignalSystem sys =
      dvs::build_system(config.require_op("rms"), config.bias, config.device);
  dvs::SpectrumSeries series = dvs::psd(sys, node, config.grid.make(sys, node));
  if (opts.tc) series = dvs::refer_to_tc(series, sys);
  dvs::CumulativeRms cum = dvs::cumulative_rms(series);

  std::vector<std::string> warnings;
  if (cum.accuracy_warning) {
    warnings.push_back("quadrature accuracy: grid too sparse for 1e-3 tolerance");
  }
  fs::path dir = prepare_out_dir(opts);
  std::string name = opts.format == "csv" ? "rms.csv" : "rms.json";
  if (opts.format == "csv") {
    dvs::write_cumulative_csv(dir / name, cum);
  } else {
    dvs::write_json_file(dir / name, dvs::cumulative_to_json(cum));
  }
  finish(opts, config, "rms", {name}, warnings);
  return 0;
}

int run_tf(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  dvs::Node node = dvs::parse_node(opts.node);
  dvs::SmallSignalSystem sys =
      dvs::build_system(config.require_op("tf"), config.bias, config.device);
  dvs::FrequencyGrid grid = config.grid.make(sys, node);

  std::vector<std::complex<double>> h(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    h[i] = dvs::transfer_fn(sys, dvs::SignalSource{}, node, grid.f_hz[i]);
  }
  dvs::SignalTfClosedForm cf =
      dvs::signal_tf_closed_form(*config.op, config.bias, config.device);

  fs::path dir = prepare_out_dir(opts);
  std::vector<std::string> outputs;
  if (opts.format == "csv") {
    dvs::write_tf_csv(dir / "tf.csv", grid.f_hz, h);
    outputs.push_back("tf.csv");
  } else {
    json rows = json::array();
    for (size_t i = 0; i < grid.size(); ++i) {
      rows.push_back(json{{"f_hz", grid.f_hz[i]},
                          {"h_abs", std::abs(h[i])},
                          {"h_phase_rad", std::arg(h[i])}});
    }
    dvs::write_json_file(dir / "tf.json", rows);
    outputs.push_back("tf.json");
  }
  json poles{{"dc_gain_v_per_loge", cf.dc_gain},
             {"f0_hz", cf.f0_hz},
             {"q_factor", cf.q_factor},
             {"poles_real", cf.poles_real},
             {"pole1_hz", {cf.pole1_hz.real(), cf.pole1_hz.imag()}},
             {"pole2_hz", {cf.pole2_hz.real(), cf.pole2_hz.imag()}},
             {"pole_ratio", cf.pole_ratio},
             {"sf_pole_hz", cf.sf_pole_hz},
             {"loop_gain", cf.loop_gain},
             {"bandwidth_3db_hz", dvs::bandwidth_3db(sys, node)}};
  dvs::write_json_file(dir / "tf_poles.json", poles);
  outputs.push_back("tf_poles.json");
  finish(opts, config, "tf", outputs, {});
  return 0;
}

int run_rate(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  dvs::RatePrediction rates =
      dvs::predict_rates(config.require_op("rate"), config.bias, config.device,
                         config.grid.points_per_decade);
  fs::path dir = prepare_out_dir(opts);
  dvs::write_json_file(dir / "rate.json", dvs::rates_to_json(rates));
  finish(opts, config, "rate", {"rate.json"}, {});
  return 0;
}

int run_sweep(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  if (!config.sweep.present) {
    throw dvs::config_error("missing config key 'sweep'");
  }
  dvs::SweepSpec spec;
  spec.i_pd_values = config.sweep.i_pd_values;
  spec.i_pr_values = config.sweep.i_pr_values;
  spec.i_sf_values = config.sweep.i_sf_values;
  spec.base_bias = config.bias;
  spec.points_per_decade = config.grid.points_per_decade;
  std::vector<dvs::SweepRecord> records = dvs::sweep(spec, config.device);

  std::vector<std::string> warnings;
  for (const dvs::SweepRecord& r : records) {
    if (!r.error.empty()) {
      warnings.push_back("sweep point (" + std::to_string(r.i_pd) + ", " +
                         std::to_string(r.i_pr) + ", " + std::to_string(r.i_sf) +
                         ") failed: " + r.error);
    }
  }
  fs::path dir = prepare_out_dir(opts);
  std::string name = opts.format == "csv" ? "sweep.csv" : "sweep.json";
  if (opts.format == "csv") {
    dvs::write_sweep_csv(dir / name, records);
  } else {
    dvs::write_json_file(dir / name, dvs::sweep_to_json(records));
  }
  finish(opts, config, "sweep", {name}, warnings);
  return 0;
}

int run_simulate(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  if (opts.seed) config.sim.seed = *opts.seed;
  dvs::SmallSignalSystem sys =
      dvs::build_system(config.require_op("simulate"), config.bias, config.device);
  dvs::SimResult result = dvs::simulate(sys, config.sim);

  fs::path dir = prepare_out_dir(opts);
  std::vector<std::string> outputs;
  if (opts.format == "csv") {
    dvs::write_events_csv(dir / "events.csv", result.events);
    outputs.push_back("events.csv");
  } else {
    dvs::write_json_file(dir / "events.json", dvs::events_to_json(result.events));
    outputs.push_back("events.json");
  }
  if (config.sim.record_traces) {
    dvs::write_traces_csv(dir / "traces.csv", result.traces);
    outputs.push_back("traces.csv");
  }
  dvs::write_json_file(dir / "summary.json", dvs::summary_to_json(result.summary));
  outputs.push_back("summary.json");
  finish(opts, config, "simulate", outputs, {});
  return 0;
}

int run_optimize(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  if (!config.optimize.present) {
    throw dvs::config_error("missing config key 'optimize'");
  }
  dvs::BiasRecommendation rec =
      dvs::optimize(config.require_op("optimize"), config.optimize.constraints,
                    config.device, config.bias);
  fs::path dir = prepare_out_dir(opts);
  dvs::write_json_file(dir / "recommendation.json", dvs::recommendation_to_json(rec));
  std::vector<std::string> warnings;
  if (!rec.feasible) {
    warnings.push_back("constraints infeasible; binding: " + rec.binding_constraint);
  }
  finish(opts, config, "optimize", {"recommendation.json"}, warnings);
  return 0;
}

int run_calibrate(const CommonOpts& opts) {
  dvs::RunConfig config = dvs::load_config(opts.config_path);
  if (!config.calibrate.present) {
    throw dvs::config_error("missing config key 'calibrate'");
  }
  fs::path data_path(config.calibrate.data_csv);
  if (data_path.is_relative()) {
    data_path = fs::path(opts.config_path).parent_path() / data_path;
  }
  std::vector<dvs::CalibrationPoint> data = dvs::read_calibration_csv(data_path);

  dvs::CalibrationOptions cal;
  cal.node = config.calibrate.node;
  cal.bias = config.bias;
  cal.op = config.require_op("calibrate");
  cal.free_names = config.calibrate.free_names;
  cal.n_starts = config.calibrate.n_starts;
  cal.max_cycles = config.calibrate.max_cycles;
  cal.seed = config.calibrate.seed;
  dvs::CalibrationResult result = dvs::calibrate(data, config.device, cal);

  fs::path dir = prepare_out_dir(opts);
  dvs::write_json_file(dir / "calibration.json", dvs::calibration_to_json(result));
  finish(opts, config, "calibrate", {"calibration.json"}, result.warnings);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DVS pixel shot-noise model: spectra, rates, sweeps and bias selection"};
  app.set_version_flag("--version", std::string(dvs::kVersion));
  app.require_subcommand(1);

  CommonOpts opts;
  struct Cmd {
    const char* name;
    const char* help;
    bool node, tc;
    int (*fn)(const CommonOpts&);
  };
  const Cmd cmds[] = {
      {"psd", "per-source noise PSD at a node", true, true, run_psd},
      {"rms", "cumulative RMS noise curves", true, true, run_rms},
      {"tf", "signal transfer function and pole summary", true, false, run_tf},
      {"rate", "predicted noise/leak event rates", false, false, run_rate},
      {"sweep", "metrics over a bias grid", false, false, run_sweep},
      {"simulate", "seeded Monte-Carlo pixel simulation", false, false, run_simulate},
      {"optimize", "constrained bias recommendation", false, false, run_optimize},
      {"calibrate", "fit device parameters to measured PSD data", false, false,
       run_calibrate},
  };
  for (const Cmd& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, opts, c.node, c.tc);
    sub->callback([&opts, &c]() {
      int rc = c.fn(opts);
      if (rc != 0) throw CLI::RuntimeError(rc);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const dvs::error& e) {
    if (opts.error_json) {
      json err{{"error", json{{"message", e.what()}}}};
      std::cout << err.dump(2) << std::endl;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    if (opts.error_json) {
      json err{{"error", json{{"message", e.what()}}}};
      std::cout << err.dump(2) << std::endl;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
