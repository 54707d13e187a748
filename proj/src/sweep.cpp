#include "dvsnoise/sweep.hpp"

#include <cmath>
#include <limits>

namespace dvs {

std::vector<double> SweepSpec::log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) {
    throw domain_error("log grid requires 0 < lo < hi and per_decade >= 1");
  }
  int n = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  }
  out.back() = hi;
  return out;
}

void SweepSpec::validate() const {
  auto check = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw domain_error(std::string(name) + " grid is empty");
    double prev = 0.0;
    for (double x : v) {
      if (!(x > prev)) {
        throw domain_error(std::string(name) +
                           " grid must be strictly increasing and positive");
      }
      prev = x;
    }
  };
  check(i_pd_values, "I_pd");
  check(i_pr_values, "I_pr");
  if (!i_sf_values.empty()) check(i_sf_values, "I_sf");
  base_bias.validate();
}

SweepRecord evaluate_point(const OperatingPoint& op, const BiasConfig& bias,
                           const DeviceParams& params, int ppd) {
  SweepRecord rec;
  rec.i_pd = op.I_pd;
  rec.i_pr = bias.I_pr;
  rec.i_sf = bias.I_sf;
  rec.power_w = params.V_dd * (bias.I_pr + bias.I_sf + op.I_pd);

  SmallSignalSystem sys = build_system(op, bias, params);
  FrequencyGrid grid = FrequencyGrid::for_node(sys, Node::v_sf, ppd);
  SpectrumSeries tc = refer_to_tc(psd(sys, Node::v_sf, grid), sys);
  NoiseStats stats = noise_stats(tc, RolloffPolicy::grid_bounded);
  RatePrediction rates = rice_rate(stats, bias);

  rec.rate_hz = rates.total_rate;
  rec.on_rate = rates.on_rate;
  rec.off_rate = rates.off_rate;
  rec.leak_rate = leak_rate(params, bias, sys);
  rec.sigma_tc = stats.sigma_tc;
  rec.nu0_hz = stats.nu0_hz;
  rec.rms_tc = stats.sigma_tc;
  rec.photon_fraction = photon_fraction(tc);
  rec.bandwidth_hz = bandwidth_3db(sys, Node::v_sf);
  return rec;
}

std::vector<SweepRecord> sweep(const SweepSpec& spec, const DeviceParams& params) {
  spec.validate();
  params.validate();

  std::vector<double> i_sf =
      spec.i_sf_values.empty() ? std::vector<double>{spec.base_bias.I_sf}
                               : spec.i_sf_values;

  std::vector<SweepRecord> out;
  out.reserve(spec.i_pd_values.size() * spec.i_pr_values.size() * i_sf.size());
  for (double pd : spec.i_pd_values) {
    for (double pr : spec.i_pr_values) {
      for (double sf : i_sf) {
        BiasConfig bias = spec.base_bias;
        bias.I_pr = pr;
        bias.I_sf = sf;
        try {
          out.push_back(evaluate_point(OperatingPoint::from_current(pd), bias,
                                       params, spec.points_per_decade));
        } catch (const error& e) {
          SweepRecord rec;
          rec.i_pd = pd;
          rec.i_pr = pr;
          rec.i_sf = sf;
          double nan = std::numeric_limits<double>::quiet_NaN();
          rec.rate_hz = rec.bandwidth_hz = rec.rms_tc = nan;
          rec.photon_fraction = rec.power_w = nan;
          rec.on_rate = rec.off_rate = rec.leak_rate = nan;
          rec.sigma_tc = rec.nu0_hz = nan;
          rec.error = e.what();
          out.push_back(std::move(rec));
        }
      }
    }
  }
  return out;
}

}  // namespace dvs
