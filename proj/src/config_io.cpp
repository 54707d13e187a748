#include "dvsnoise/config_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dvsnoise/version.hpp"

namespace dvs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

// Tracks which keys of a JSON object were consumed and rejects leftovers.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw config_error("config section '" + path_ + "' must be an object");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!j_.contains(key)) return fallback;
    return take<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    if (!j_.contains(key)) {
      throw config_error("missing config key '" + full(key) + "'");
    }
    return take<T>(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw config_error("unknown config key '" + full(it.key()) + "'");
      }
    }
  }

  std::string full(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  template <typename T>
  T take(const std::string& key) {
    seen_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw config_error("bad value for config key '" + full(key) + "': " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

DeviceParams parse_device(const json& j) {
  DeviceParams p = DeviceParams::davis346();
  StrictObject o(j, "device");
  p.U_T = o.get("U_T", p.U_T);
  p.kappa_fb = o.get("kappa_fb", p.kappa_fb);
  p.kappa_n = o.get("kappa_n", p.kappa_n);
  p.kappa_sf = o.get("kappa_sf", p.kappa_sf);
  p.C_in = o.get("C_in", p.C_in);
  p.C_out = o.get("C_out", p.C_out);
  p.C_sf = o.get("C_sf", p.C_sf);
  p.V_A = o.get("V_A", p.V_A);
  p.q_e = o.get("q_e", p.q_e);
  p.I_leak = o.get("I_leak", p.I_leak);
  p.lux_to_amps = o.get("lux_to_amps", p.lux_to_amps);
  p.C_2_equiv = o.get("C_2_equiv", p.C_2_equiv);
  p.V_dd = o.get("V_dd", p.V_dd);
  o.finish();
  p.validate();
  return p;
}

BiasConfig parse_bias(const json& j) {
  BiasConfig b = BiasConfig::nominal();
  StrictObject o(j, "bias");
  b.I_pr = o.get("I_pr", b.I_pr);
  b.I_sf = o.get("I_sf", b.I_sf);
  b.theta_on = o.get("theta_on", b.theta_on);
  b.theta_off = o.get("theta_off", b.theta_off);
  b.delta_refr = o.get("delta_refr", b.delta_refr);
  o.finish();
  b.validate();
  return b;
}

OperatingPoint parse_op(const json& j, const DeviceParams& device) {
  StrictObject o(j, "operating_point");
  bool has_lux = o.has("illuminance");
  bool has_ipd = o.has("I_pd");
  if (!has_lux && !has_ipd) {
    throw config_error(
        "missing config key 'operating_point.illuminance' (or 'operating_point.I_pd')");
  }
  OperatingPoint op;
  if (has_ipd) {
    op = OperatingPoint::from_current(o.require<double>("I_pd"));
    if (has_lux) op.illuminance = o.require<double>("illuminance");
  } else {
    op = OperatingPoint::from_lux(o.require<double>("illuminance"), device);
  }
  o.finish();
  op.validate();
  return op;
}

SimConfig parse_sim(const json& j) {
  SimConfig s;
  StrictObject o(j, "sim");
  s.duration = o.get("duration", s.duration);
  s.dt = o.get("dt", s.dt);
  s.seed = o.get("seed", s.seed);
  s.drive_mode = parse_drive_mode(o.get<std::string>("drive_mode", "gaussian-white"));
  s.record_traces = o.get("record_traces", s.record_traces);
  s.trace_decimate = o.get("trace_decimate", s.trace_decimate);
  s.warmup = o.get("warmup", s.warmup);
  if (o.has("stimulus")) {
    const json& stim = o.raw("stimulus");
    if (!stim.is_array()) {
      throw config_error("'sim.stimulus' must be an array of [t, log_e] pairs");
    }
    for (const json& pt : stim) {
      if (!pt.is_array() || pt.size() != 2) {
        throw config_error("'sim.stimulus' entries must be [t, log_e] pairs");
      }
      s.stimulus.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
  }
  o.finish();
  return s;
}

GridOptions parse_grid(const json& j) {
  GridOptions g;
  StrictObject o(j, "grid");
  g.points_per_decade = o.get("points_per_decade", g.points_per_decade);
  if (o.has("f_min")) g.f_min = o.require<double>("f_min");
  if (o.has("f_max")) g.f_max = o.require<double>("f_max");
  o.finish();
  return g;
}

SweepOptions parse_sweep(const json& j, const DeviceParams& device) {
  SweepOptions s;
  s.present = true;
  StrictObject o(j, "sweep");
  if (o.has("illuminances")) {
    for (double lux : o.require<std::vector<double>>("illuminances")) {
      s.i_pd_values.push_back(lux_to_photocurrent(lux, device));
    }
  }
  if (o.has("i_pd_values")) {
    auto v = o.require<std::vector<double>>("i_pd_values");
    s.i_pd_values.insert(s.i_pd_values.end(), v.begin(), v.end());
  }
  if (s.i_pd_values.empty()) {
    throw config_error("missing config key 'sweep.illuminances' (or 'sweep.i_pd_values')");
  }
  if (o.has("i_pr_values")) {
    s.i_pr_values = o.require<std::vector<double>>("i_pr_values");
  } else {
    double lo = o.get("i_pr_min", 1e-12);
    double hi = o.get("i_pr_max", 10e-9);
    int ppd = o.get("i_pr_points_per_decade", 8);
    s.i_pr_values = SweepSpec::log_grid(lo, hi, ppd);
  }
  if (o.has("i_sf_values")) {
    s.i_sf_values = o.require<std::vector<double>>("i_sf_values");
  }
  o.finish();
  return s;
}

OptimizeOptions parse_optimize(const json& j) {
  OptimizeOptions opt;
  opt.present = true;
  StrictObject o(j, "optimize");
  OptimizeConstraints& c = opt.constraints;
  c.min_bandwidth_hz = o.require<double>("min_bandwidth_hz");
  c.max_power_w = o.require<double>("max_power_w");
  c.rate_slack = o.get("rate_slack", c.rate_slack);
  c.sf_margin = o.get("sf_margin", c.sf_margin);
  c.i_pr_min = o.get("i_pr_min", c.i_pr_min);
  c.i_pr_max = o.get("i_pr_max", c.i_pr_max);
  c.i_sf_min = o.get("i_sf_min", c.i_sf_min);
  c.grid_per_decade = o.get("grid_per_decade", c.grid_per_decade);
  o.finish();
  c.validate();
  return opt;
}

CalibrateOptions parse_calibrate(const json& j) {
  CalibrateOptions c;
  c.present = true;
  StrictObject o(j, "calibrate");
  c.data_csv = o.require<std::string>("data_csv");
  c.free_names = o.require<std::vector<std::string>>("free");
  c.node = parse_node(o.get<std::string>("node", "v_pr"));
  c.n_starts = o.get("n_starts", c.n_starts);
  c.max_cycles = o.get("max_cycles", c.max_cycles);
  c.seed = o.get("seed", c.seed);
  o.finish();
  return c;
}

json device_to_json(const DeviceParams& p) {
  return json{{"U_T", p.U_T},       {"kappa_fb", p.kappa_fb},
              {"kappa_n", p.kappa_n}, {"kappa_sf", p.kappa_sf},
              {"C_in", p.C_in},     {"C_out", p.C_out},
              {"C_sf", p.C_sf},     {"V_A", p.V_A},
              {"q_e", p.q_e},       {"I_leak", p.I_leak},
              {"lux_to_amps", p.lux_to_amps}, {"C_2_equiv", p.C_2_equiv},
              {"V_dd", p.V_dd}};
}

json bias_to_json(const BiasConfig& b) {
  return json{{"I_pr", b.I_pr},
              {"I_sf", b.I_sf},
              {"theta_on", b.theta_on},
              {"theta_off", b.theta_off},
              {"delta_refr", b.delta_refr}};
}

}  // namespace

FrequencyGrid GridOptions::make(const SmallSignalSystem& sys, Node node) const {
  if (f_min && f_max) {
    return FrequencyGrid::log_spaced(*f_min, *f_max, points_per_decade);
  }
  FrequencyGrid def = FrequencyGrid::for_node(sys, node, points_per_decade);
  double lo = f_min.value_or(def.f_hz.front());
  double hi = f_max.value_or(def.f_hz.back());
  return FrequencyGrid::log_spaced(lo, hi, points_per_decade);
}

const OperatingPoint& RunConfig::require_op(const std::string& command) const {
  if (!op) {
    throw config_error("missing config key 'operating_point' (required by '" +
                       command + "')");
  }
  return *op;
}

RunConfig parse_config(const json& j) {
  StrictObject root(j, "");
  RunConfig cfg;
  if (root.has("device")) cfg.device = parse_device(root.raw("device"));
  if (root.has("bias")) cfg.bias = parse_bias(root.raw("bias"));
  if (root.has("operating_point")) {
    cfg.op = parse_op(root.raw("operating_point"), cfg.device);
  }
  if (root.has("grid")) cfg.grid = parse_grid(root.raw("grid"));
  if (root.has("sim")) cfg.sim = parse_sim(root.raw("sim"));
  if (root.has("sweep")) cfg.sweep = parse_sweep(root.raw("sweep"), cfg.device);
  if (root.has("optimize")) cfg.optimize = parse_optimize(root.raw("optimize"));
  if (root.has("calibrate")) cfg.calibrate = parse_calibrate(root.raw("calibrate"));
  root.finish();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error("cannot open config file '" + path.string() + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error("malformed JSON in '" + path.string() + "': " + e.what());
  }
  return parse_config(j);
}

json config_snapshot(const RunConfig& config) {
  json snap;
  snap["device"] = device_to_json(config.device);
  snap["bias"] = bias_to_json(config.bias);
  if (config.op) {
    json op{{"I_pd", config.op->I_pd}};
    if (config.op->illuminance) op["illuminance"] = *config.op->illuminance;
    snap["operating_point"] = op;
  }
  json grid{{"points_per_decade", config.grid.points_per_decade}};
  if (config.grid.f_min) grid["f_min"] = *config.grid.f_min;
  if (config.grid.f_max) grid["f_max"] = *config.grid.f_max;
  snap["grid"] = grid;
  json sim{{"duration", config.sim.duration},
           {"dt", config.sim.dt},
           {"seed", config.sim.seed},
           {"drive_mode", to_string(config.sim.drive_mode)},
           {"record_traces", config.sim.record_traces},
           {"trace_decimate", config.sim.trace_decimate},
           {"warmup", config.sim.warmup}};
  json stim = json::array();
  for (const StimulusPoint& p : config.sim.stimulus) {
    stim.push_back(json::array({p.t, p.log_e}));
  }
  sim["stimulus"] = stim;
  snap["sim"] = sim;
  if (config.sweep.present) {
    snap["sweep"] = json{{"i_pd_values", config.sweep.i_pd_values},
                         {"i_pr_values", config.sweep.i_pr_values},
                         {"i_sf_values", config.sweep.i_sf_values}};
  }
  if (config.optimize.present) {
    const OptimizeConstraints& c = config.optimize.constraints;
    snap["optimize"] = json{{"min_bandwidth_hz", c.min_bandwidth_hz},
                            {"max_power_w", c.max_power_w},
                            {"rate_slack", c.rate_slack},
                            {"sf_margin", c.sf_margin},
                            {"i_pr_min", c.i_pr_min},
                            {"i_pr_max", c.i_pr_max},
                            {"i_sf_min", c.i_sf_min},
                            {"grid_per_decade", c.grid_per_decade}};
  }
  if (config.calibrate.present) {
    snap["calibrate"] = json{{"data_csv", config.calibrate.data_csv},
                             {"free", config.calibrate.free_names},
                             {"node", to_string(config.calibrate.node)},
                             {"n_starts", config.calibrate.n_starts},
                             {"max_cycles", config.calibrate.max_cycles},
                             {"seed", config.calibrate.seed}};
  }
  return snap;
}

void atomic_write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw config_error("cannot write '" + tmp.string() + "'");
    }
    out << text;
    if (!out.good()) {
      throw config_error("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

void write_json_file(const fs::path& path, const json& j) {
  atomic_write_text(path, j.dump(2) + "\n");
}

void write_spectrum_csv(const fs::path& path, const SpectrumSeries& s) {
  std::ostringstream out;
  out << "f_hz,psd_total,psd_pd,psd_pr,psd_sf\n";
  for (size_t i = 0; i < s.grid.size(); ++i) {
    out << fmt(s.grid.f_hz[i]) << ',' << fmt(s.total[i]) << ',' << fmt(s.pd[i]) << ','
        << fmt(s.pr[i]) << ',' << fmt(s.sf[i]) << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_cumulative_csv(const fs::path& path, const CumulativeRms& c) {
  std::ostringstream out;
  out << "f_hz,cum_rms_total,cum_rms_pd,cum_rms_pr,cum_rms_sf\n";
  for (size_t i = 0; i < c.grid.size(); ++i) {
    out << fmt(c.grid.f_hz[i]) << ',' << fmt(c.total[i]) << ',' << fmt(c.pd[i]) << ','
        << fmt(c.pr[i]) << ',' << fmt(c.sf[i]) << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_tf_csv(const fs::path& path, const std::vector<double>& f_hz,
                  const std::vector<std::complex<double>>& h) {
  std::ostringstream out;
  out << "f_hz,h_abs,h_phase_rad\n";
  for (size_t i = 0; i < f_hz.size(); ++i) {
    out << fmt(f_hz[i]) << ',' << fmt(std::abs(h[i])) << ',' << fmt(std::arg(h[i]))
        << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_events_csv(const fs::path& path, const std::vector<EventRecord>& events) {
  std::ostringstream out;
  out << "t_seconds,polarity\n";
  for (const EventRecord& e : events) {
    out << fmt(e.t) << ',' << e.polarity << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_traces_csv(const fs::path& path, const TraceRecord& traces) {
  std::ostringstream out;
  out << "t_seconds,v_pr,v_sf\n";
  for (size_t i = 0; i < traces.v_pr.size(); ++i) {
    out << fmt(static_cast<double>(i) * traces.dt) << ',' << fmt(traces.v_pr[i]) << ','
        << fmt(traces.v_sf[i]) << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "i_pd,i_pr,i_sf,rate_hz,bandwidth_hz,rms_tc,photon_fraction,power_w\n";
  for (const SweepRecord& r : records) {
    out << fmt(r.i_pd) << ',' << fmt(r.i_pr) << ',' << fmt(r.i_sf) << ','
        << fmt(r.rate_hz) << ',' << fmt(r.bandwidth_hz) << ',' << fmt(r.rms_tc) << ','
        << fmt(r.photon_fraction) << ',' << fmt(r.power_w) << '\n';
  }
  atomic_write_text(path, out.str());
}

json spectrum_to_json(const SpectrumSeries& s) {
  return json{{"node", to_string(s.node)},       {"tc_referred", s.tc_referred},
              {"f_hz", s.grid.f_hz},             {"psd_total", s.total},
              {"psd_pd", s.pd},                  {"psd_pr", s.pr},
              {"psd_sf", s.sf}};
}

json cumulative_to_json(const CumulativeRms& c) {
  return json{{"node", to_string(c.node)},
              {"tc_referred", c.tc_referred},
              {"f_hz", c.grid.f_hz},
              {"cum_rms_total", c.total},
              {"cum_rms_pd", c.pd},
              {"cum_rms_pr", c.pr},
              {"cum_rms_sf", c.sf},
              {"final_rms",
               json{{"total", c.final_total},
                    {"pd", c.final_pd},
                    {"pr", c.final_pr},
                    {"sf", c.final_sf}}},
              {"accuracy_warning", c.accuracy_warning}};
}

json events_to_json(const std::vector<EventRecord>& events) {
  json arr = json::array();
  for (const EventRecord& e : events) {
    arr.push_back(json{{"t_seconds", e.t}, {"polarity", e.polarity}});
  }
  return arr;
}

json sweep_to_json(const std::vector<SweepRecord>& records) {
  json arr = json::array();
  for (const SweepRecord& r : records) {
    json row{{"i_pd", r.i_pd},
             {"i_pr", r.i_pr},
             {"i_sf", r.i_sf},
             {"rate_hz", r.rate_hz},
             {"bandwidth_hz", r.bandwidth_hz},
             {"rms_tc", r.rms_tc},
             {"photon_fraction", r.photon_fraction},
             {"power_w", r.power_w}};
    if (!r.error.empty()) row["error"] = r.error;
    arr.push_back(std::move(row));
  }
  return arr;
}

json rates_to_json(const RatePrediction& rates) {
  return json{{"on_rate", rates.on_rate},
              {"off_rate", rates.off_rate},
              {"total_rate", rates.total_rate},
              {"leak_rate", rates.leak_rate},
              {"sigma_tc", rates.sigma_tc},
              {"nu0", rates.nu0_hz},
              {"units",
               json{{"on_rate", "Hz"},
                    {"off_rate", "Hz"},
                    {"total_rate", "Hz"},
                    {"leak_rate", "Hz"},
                    {"sigma_tc", "TC log-e"},
                    {"nu0", "Hz"}}}};
}

json recommendation_to_json(const BiasRecommendation& rec) {
  json j{{"I_pr", rec.i_pr},
         {"I_sf", rec.i_sf},
         {"predicted_rate_hz", rec.predicted_rate_hz},
         {"predicted_bandwidth_hz", rec.predicted_bandwidth_hz},
         {"predicted_power_w", rec.predicted_power_w},
         {"asymptotic_rate_hz", rec.asymptotic_rate_hz},
         {"rationale", to_string(rec.rationale)},
         {"feasible", rec.feasible}};
  if (!rec.binding_constraint.empty()) j["binding_constraint"] = rec.binding_constraint;
  return j;
}

json calibration_to_json(const CalibrationResult& result) {
  return json{{"fitted", result.fitted},
              {"residual_log10_mse", result.residual},
              {"converged", result.converged},
              {"warnings", result.warnings},
              {"params", device_to_json(result.params)}};
}

json summary_to_json(const SimSummary& s) {
  return json{{"duration_s", s.duration},
              {"warmup_s", s.warmup},
              {"dt_s", s.dt},
              {"n_steps", s.n_steps},
              {"seed", s.seed},
              {"mean_v_pr", s.mean_v_pr},
              {"var_v_pr", s.var_v_pr},
              {"mean_v_sf", s.mean_v_sf},
              {"var_v_sf", s.var_v_sf},
              {"on_rate_hz", s.on_rate},
              {"off_rate_hz", s.off_rate},
              {"total_rate_hz", s.total_rate},
              {"leak_event_rate_hz", s.leak_event_rate}};
}

std::vector<CalibrationPoint> read_calibration_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error("cannot open calibration data '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw config_error("empty calibration data '" + path.string() + "'");
  }
  auto strip = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  if (strip(line) != "f_hz,psd_v2hz") {
    throw config_error("calibration CSV must start with header 'f_hz,psd_v2hz'");
  }
  std::vector<CalibrationPoint> out;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw config_error("bad calibration CSV row at line " + std::to_string(lineno));
    }
    try {
      out.push_back({std::stod(a), std::stod(b)});
    } catch (const std::exception&) {
      throw config_error("bad number in calibration CSV at line " +
                         std::to_string(lineno));
    }
  }
  return out;
}

void write_manifest(const fs::path& path, const RunManifest& manifest,
                    const RunConfig& config) {
  json j{{"command", manifest.command},
         {"version", kVersion},
         {"config", config_snapshot(config)},
         {"outputs", manifest.outputs},
         {"warnings", manifest.warnings}};
  if (manifest.seed) j["seed"] = *manifest.seed;
  write_json_file(path, j);
}

}  // namespace dvs
