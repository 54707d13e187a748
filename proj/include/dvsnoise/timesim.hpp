#pragma once

#include <cstdint>
#include <vector>

#include "dvsnoise/spectrum.hpp"

namespace dvs {

enum class DriveMode { gaussian_white, poisson_photon };

DriveMode parse_drive_mode(const std::string& name);
const char* to_string(DriveMode mode);

// Piecewise-linear log-intensity stimulus sample.
struct StimulusPoint {
  double t;      // [s]
  double log_e;  // [TC log-e units]
};

struct SimConfig {
  double duration = 10.0;  // recorded time after warm-up [s]
  double dt = 0.0;         // step [s]; 0 selects min time constant / 12
  std::uint64_t seed = 1;
  DriveMode drive_mode = DriveMode::gaussian_white;
  bool record_traces = false;
  int trace_decimate = 1;            // keep every n-th sample in traces
  double warmup = -1.0;              // [s]; negative selects 5 slowest time constants
  std::vector<StimulusPoint> stimulus;  // empty means static input
};

// polarity: 1 = ON, -1 = OFF, 2 = leak-driven ON.
struct EventRecord {
  double t;      // [s], relative to the start of the recorded window
  int polarity;
};

struct TraceRecord {
  double dt = 0.0;
  std::vector<double> v_pr;
  std::vector<double> v_sf;
};

struct SimSummary {
  double duration = 0.0;
  double warmup = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;
  double mean_v_pr = 0.0, var_v_pr = 0.0;
  double mean_v_sf = 0.0, var_v_sf = 0.0;
  double on_rate = 0.0, off_rate = 0.0, total_rate = 0.0, leak_event_rate = 0.0;
  std::uint64_t seed = 0;
};

struct SimResult {
  std::vector<EventRecord> events;
  TraceRecord traces;
  SimSummary summary;
};

// Seeded Monte-Carlo simulation of the linear pixel dynamics driven by shot
// noise, with the change-amp / comparator / refractory pipeline on top.
// The linear update is the exact matrix-exponential propagation of the state
// with the per-step noise currents held constant over the step.
//
// Identical (system, SimConfig) pairs produce bit-identical event lists.
SimResult simulate(const SmallSignalSystem& sys, const SimConfig& cfg);

// Welch-averaged one-sided periodogram of a uniformly sampled trace.
// Normalized so that the integral of the PSD equals the sample variance
// (Hann window, 50% overlap, per-segment mean removal). Only the `total`
// column of the result is populated.
SpectrumSeries empirical_psd(const std::vector<double>& trace, double dt,
                             Node node = Node::v_pr);

}  // namespace dvs
