#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dvsnoise/calibrate.hpp"
#include "dvsnoise/optimize.hpp"
#include "dvsnoise/sweep.hpp"
#include "dvsnoise/timesim.hpp"

namespace dvs {

// Frequency-grid overrides; unset bounds fall back to the node defaults.
struct GridOptions {
  int points_per_decade = kDefaultPointsPerDecade;
  std::optional<double> f_min;
  std::optional<double> f_max;

  FrequencyGrid make(const SmallSignalSystem& sys, Node node) const;
};

struct SweepOptions {
  std::vector<double> i_pd_values;
  std::vector<double> i_pr_values;
  std::vector<double> i_sf_values;
  bool present = false;
};

struct OptimizeOptions {
  OptimizeConstraints constraints;
  bool present = false;
};

struct CalibrateOptions {
  std::string data_csv;
  std::vector<std::string> free_names;
  Node node = Node::v_pr;
  int n_starts = 8;
  int max_cycles = 60;
  std::uint64_t seed = 42;
  bool present = false;
};

// Parsed and validated configuration file. Unknown keys are rejected with
// the full key path; missing required keys are reported by name.
struct RunConfig {
  DeviceParams device;  // defaults: davis346
  BiasConfig bias;      // defaults: nominal
  std::optional<OperatingPoint> op;
  GridOptions grid;
  SimConfig sim;
  SweepOptions sweep;
  OptimizeOptions optimize;
  CalibrateOptions calibrate;

  // Throws config_error when the command needs an operating point and the
  // config has none.
  const OperatingPoint& require_op(const std::string& command) const;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& j);

// Fully resolved snapshot (every field explicit) for the run manifest.
nlohmann::json config_snapshot(const RunConfig& config);

// CSV emission. Scientific notation, 12 significant digits. All writers are
// atomic (temp file + rename).
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumSeries& s);
void write_cumulative_csv(const std::filesystem::path& path, const CumulativeRms& c);
void write_tf_csv(const std::filesystem::path& path, const std::vector<double>& f_hz,
                  const std::vector<std::complex<double>>& h);
void write_events_csv(const std::filesystem::path& path,
                      const std::vector<EventRecord>& events);
void write_traces_csv(const std::filesystem::path& path, const TraceRecord& traces);
void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRecord>& records);

nlohmann::json spectrum_to_json(const SpectrumSeries& s);
nlohmann::json cumulative_to_json(const CumulativeRms& c);
nlohmann::json events_to_json(const std::vector<EventRecord>& events);
nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records);
nlohmann::json rates_to_json(const RatePrediction& rates);
nlohmann::json recommendation_to_json(const BiasRecommendation& rec);
nlohmann::json calibration_to_json(const CalibrationResult& result);
nlohmann::json summary_to_json(const SimSummary& summary);

std::vector<CalibrationPoint> read_calibration_csv(const std::filesystem::path& path);

void atomic_write_text(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// Run manifest: command, tool version, seeds, resolved config and the list of
// files the command produced.
struct RunManifest {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest,
                    const RunConfig& config);

}  // namespace dvs
