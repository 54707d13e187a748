#pragma once

#include <map>
#include <string>
#include <vector>

#include "dvsnoise/spectrum.hpp"

namespace dvs {

struct CalibrationPoint {
  double f_hz;
  double psd_v2_hz;  // measured total PSD at the node [V^2/Hz]
};

struct CalibrationOptions {
  Node node = Node::v_pr;
  BiasConfig bias;                      // measurement bias condition
  OperatingPoint op;                    // measurement operating point
  std::vector<std::string> free_names;  // parameters to fit, e.g. {"C_in","C_out"}
  int n_starts = 8;                     // multi-start count
  int max_cycles = 60;                  // coordinate-descent cycles per start
  std::uint64_t seed = 42;              // start jitter
};

struct CalibrationResult {
  DeviceParams params;                   // known values with fitted ones substituted
  std::map<std::string, double> fitted;  // per free parameter
  double residual = 0.0;      // mean squared log10-PSD error at the optimum
  bool converged = true;
  std::vector<std::string> warnings;
};

// Names accepted in CalibrationOptions::free_names.
const std::vector<std::string>& calibratable_parameters();

// Fits the free parameters so that the model PSD at the measurement node
// matches the data in mean squared log10 error, via multi-start log-space
// coordinate descent with a final local refinement.
//
// Preconditions: at least 8 points; free set non-empty. Data spanning less
// than two decades proceeds with a conditioning warning.
CalibrationResult calibrate(const std::vector<CalibrationPoint>& measured,
                            const DeviceParams& known,
                            const CalibrationOptions& options);

}  // namespace dvs
