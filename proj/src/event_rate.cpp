#include "dvsnoise/event_rate.hpp"

#include <cmath>

namespace dvs {

namespace {

double refractory_corrected(double nu, double delta_refr) {
  return nu / (1.0 + nu * delta_refr);
}

RatePrediction rates_for_system(const SmallSignalSystem& sys, int ppd) {
  FrequencyGrid grid = FrequencyGrid::for_node(sys, Node::v_sf, ppd);
  SpectrumSeries tc = refer_to_tc(psd(sys, Node::v_sf, grid), sys);
  NoiseStats stats = noise_stats(tc, RolloffPolicy::grid_bounded);
  RatePrediction out = rice_rate(stats, sys.bias);
  out.leak_rate = leak_rate(sys.params, sys.bias, sys);
  return out;
}

}  // namespace

RatePrediction rice_rate(const NoiseStats& stats, const BiasConfig& bias) {
  bias.validate();
  RatePrediction out;
  out.sigma_tc = stats.sigma_tc;
  out.nu0_hz = stats.nu0_hz;
  if (stats.sigma_tc <= 0.0) {
    return out;  // no noise, no events
  }
  double s2 = 2.0 * stats.sigma_tc * stats.sigma_tc;
  double nu_on = stats.nu0_hz * std::exp(-bias.theta_on * bias.theta_on / s2);
  double nu_off = stats.nu0_hz * std::exp(-bias.theta_off * bias.theta_off / s2);
  out.on_rate = refractory_corrected(nu_on, bias.delta_refr);
  out.off_rate = refractory_corrected(nu_off, bias.delta_refr);
  out.total_rate = out.on_rate + out.off_rate;
  return out;
}

double leak_rate(const DeviceParams& params, const BiasConfig& bias,
                 const SmallSignalSystem& sys) {
  params.validate();
  bias.validate();
  if (params.I_leak == 0.0) return 0.0;
  double q_theta = params.C_2_equiv * bias.theta_on * sys.node_signal_gain(Node::v_sf);
  if (!(q_theta > 0.0)) {
    throw domain_error("zero threshold charge, leak rate undefined");
  }
  return params.I_leak / q_theta;
}

RatePrediction predict_rates(const OperatingPoint& op, const BiasConfig& bias,
                             const DeviceParams& params, int ppd) {
  return rates_for_system(build_system(op, bias, params), ppd);
}

RatePrediction predict_rates_pr_ablated(const OperatingPoint& op,
                                        const BiasConfig& bias,
                                        const DeviceParams& params, int ppd) {
  SmallSignalSystem sys =
      build_system(op, bias, params).without_source(NoiseSource::amplifier);
  return rates_for_system(sys, ppd);
}

}  // namespace dvs
