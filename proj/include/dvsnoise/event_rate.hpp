#pragma once

#include "dvsnoise/noise_stats.hpp"
#include "dvsnoise/small_signal.hpp"

namespace dvs {

struct RatePrediction {
  double on_rate = 0.0;     // [Hz], refractory-corrected
  double off_rate = 0.0;    // [Hz]
  double total_rate = 0.0;  // on + off
  double leak_rate = 0.0;   // reported separately, not part of total
  double sigma_tc = 0.0;
  double nu0_hz = 0.0;
};

// Expected threshold-crossing rates of a stationary Gaussian process:
// raw rate nu = nu0 * exp(-theta^2 / (2 sigma^2)) per polarity, then the
// refractory correction nu' = nu / (1 + nu * delta_refr).
RatePrediction rice_rate(const NoiseStats& stats, const BiasConfig& bias);

// Leak event rate I_leak / Q_theta with Q_theta the charge required to
// traverse one ON threshold at the change-amp input:
// Q_theta = C_2_equiv * theta_on * node signal gain at v_sf.
double leak_rate(const DeviceParams& params, const BiasConfig& bias,
                 const SmallSignalSystem& sys);

// Full pipeline: build system, synthesize the v_sf spectrum on its default
// band, refer to TC, take moments (grid-bounded) and apply the crossing-rate
// estimate plus the leak rate.
RatePrediction predict_rates(const OperatingPoint& op, const BiasConfig& bias,
                             const DeviceParams& params,
                             int points_per_decade = kDefaultPointsPerDecade);

// Same, but with the photoreceptor-bias noise source zeroed. Serves as the
// asymptotic high-bias reference for sweeps and the optimizer.
RatePrediction predict_rates_pr_ablated(const OperatingPoint& op,
                                        const BiasConfig& bias,
                                        const DeviceParams& params,
                                        int points_per_decade = kDefaultPointsPerDecade);

}  // namespace dvs
