#include "dvsnoise/noise_stats.hpp"

#include <cmath>
#include <numbers>

namespace dvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Least-squares slope of log S vs log f over the top half decade of the grid.
double tail_log_slope(const FrequencyGrid& grid, const std::vector<double>& s) {
  double f_top = grid.f_hz.back();
  double f_lo = f_top / std::sqrt(10.0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid.f_hz[i] < f_lo || s[i] <= 0.0) continue;
    double x = std::log10(grid.f_hz[i]);
    double y = std::log10(s[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) return -1e9;  // zero tail rolls off as fast as anything
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) return -1e9;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace

NoiseStats noise_stats(const SpectrumSeries& tc_spectrum, RolloffPolicy policy) {
  tc_spectrum.validate();
  if (!tc_spectrum.tc_referred) {
    throw precondition_error("noise_stats expects a TC-referred spectrum");
  }
  const std::vector<double>& f = tc_spectrum.grid.f_hz;
  const std::vector<double>& s = tc_spectrum.total;

  NoiseStats stats;
  double m0 = 0.0, m2 = 0.0;
  for (size_t i = 1; i < f.size(); ++i) {
    double df = f[i] - f[i - 1];
    double w1 = kTwoPi * f[i - 1];
    double w2 = kTwoPi * f[i];
    m0 += 0.5 * (s[i] + s[i - 1]) * df;
    m2 += 0.5 * (s[i] * w2 * w2 + s[i - 1] * w1 * w1) * df;
  }
  if (!std::isfinite(m0) || !std::isfinite(m2)) {
    throw numerical_error("non-finite spectral moments");
  }

  stats.m0 = m0;
  stats.m2 = m2;
  stats.tail_slope = tail_log_slope(tc_spectrum.grid, s);
  stats.cutoff_limited = stats.tail_slope >= -3.0;
  if (policy == RolloffPolicy::require_rolloff && stats.cutoff_limited) {
    throw model_error(
        "PSD rolls off slower than 1/f^3 at the grid edge (tail slope " +
        std::to_string(stats.tail_slope) +
        "); m2 diverges without at least second-order roll-off");
  }

  if (m0 > 0.0) {
    stats.sigma_tc = std::sqrt(m0);
    stats.nu0_hz = std::sqrt(m2 / m0) / kTwoPi;
  }
  return stats;
}

}  // namespace dvs
