#pragma once

#include <string>
#include <vector>

#include "dvsnoise/event_rate.hpp"

namespace dvs {

// Bias grid over which the noise metrics are evaluated. Records are produced
// in lexicographic order (I_pd outer, then I_pr, then I_sf).
struct SweepSpec {
  std::vector<double> i_pd_values;  // [A]
  std::vector<double> i_pr_values;  // [A], log-spaced by convention
  std::vector<double> i_sf_values;  // [A]; empty means base_bias.I_sf only
  BiasConfig base_bias;             // thresholds / refractory for every point
  int points_per_decade = kDefaultPointsPerDecade;

  static std::vector<double> log_grid(double lo, double hi, int per_decade);
  void validate() const;
};

struct SweepRecord {
  double i_pd = 0, i_pr = 0, i_sf = 0;
  double rate_hz = 0;          // predicted total noise event rate
  double bandwidth_hz = 0;     // signal 3 dB bandwidth at v_sf
  double rms_tc = 0;           // total noise RMS at v_sf [TC log-e]
  double photon_fraction = 0;  // at v_sf
  double power_w = 0;          // V_dd * (I_pr + I_sf + I_pd)
  double on_rate = 0, off_rate = 0, leak_rate = 0;
  double sigma_tc = 0, nu0_hz = 0;
  std::string error;           // non-empty when this point failed; metrics are NaN
};

std::vector<SweepRecord> sweep(const SweepSpec& spec, const DeviceParams& params);

// Single-point evaluation used by sweep() and the optimizer.
SweepRecord evaluate_point(const OperatingPoint& op, const BiasConfig& bias,
                           const DeviceParams& params,
                           int points_per_decade = kDefaultPointsPerDecade);

}  // namespace dvs
