#include "dvsnoise/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double trapz(const std::vector<double>& f, const std::vector<double>& y) {
  double acc = 0.0;
  for (size_t i = 1; i < f.size(); ++i) {
    acc += 0.5 * (y[i] + y[i - 1]) * (f[i] - f[i - 1]);
  }
  return acc;
}

// Same integral on every other grid point; the difference estimates the
// quadrature error.
double trapz_half(const std::vector<double>& f, const std::vector<double>& y) {
  double acc = 0.0;
  size_t prev = 0;
  for (size_t i = 2; i < f.size(); i += 2) {
    acc += 0.5 * (y[i] + y[prev]) * (f[i] - f[prev]);
    prev = i;
  }
  if (prev + 1 < f.size()) {
    size_t last = f.size() - 1;
    acc += 0.5 * (y[last] + y[prev]) * (f[last] - f[prev]);
  }
  return acc;
}

std::vector<double> cumulative_sqrt_integral(const std::vector<double>& f,
                                             const std::vector<double>& y) {
  std::vector<double> out(f.size(), 0.0);
  double acc = 0.0;
  out[0] = 0.0;
  for (size_t i = 1; i < f.size(); ++i) {
    acc += 0.5 * (y[i] + y[i - 1]) * (f[i] - f[i - 1]);
    out[i] = std::sqrt(std::max(acc, 0.0));
  }
  return out;
}

}  // namespace

FrequencyGrid FrequencyGrid::log_spaced(double f_min, double f_max,
                                        int points_per_decade) {
  if (!(f_min > 0.0) || !(f_max > f_min)) {
    throw domain_error("frequency grid requires 0 < f_min < f_max");
  }
  if (points_per_decade < 16) {
    throw domain_error("frequency grid requires at least 16 points per decade");
  }
  double decades = std::log10(f_max / f_min);
  int n = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
  FrequencyGrid grid;
  grid.f_hz.resize(n);
  for (int i = 0; i < n; ++i) {
    grid.f_hz[i] = f_min * std::pow(f_max / f_min, static_cast<double>(i) / (n - 1));
  }
  grid.f_hz.back() = f_max;
  return grid;
}

FrequencyGrid FrequencyGrid::for_node(const SmallSignalSystem& sys, Node node,
                                      int points_per_decade) {
  double f_max = 10.0 * (node == Node::v_sf ? sys.sf_pole_hz() : sys.fastest_pole_hz());
  double f_min = std::max(sys.slowest_pole_hz() / 100.0, 1e-5);
  f_min = std::min(f_min, f_max / 1e3);
  return log_spaced(f_min, f_max, points_per_decade);
}

void FrequencyGrid::validate() const {
  if (f_hz.empty()) throw domain_error("empty frequency grid");
  double prev = 0.0;
  for (double f : f_hz) {
    if (!(f > prev) || !std::isfinite(f)) {
      throw domain_error("frequency grid must be strictly increasing and positive");
    }
    prev = f;
  }
}

void SpectrumSeries::validate() const {
  grid.validate();
  size_t n = grid.size();
  if (pd.size() != n || pr.size() != n || sf.size() != n || total.size() != n) {
    throw domain_error("spectrum column length mismatch");
  }
  for (size_t i = 0; i < n; ++i) {
    if (pd[i] < 0 || pr[i] < 0 || sf[i] < 0 || total[i] < 0) {
      throw domain_error("negative PSD value");
    }
  }
}

SpectrumSeries psd(const SmallSignalSystem& sys, Node node, const FrequencyGrid& grid) {
  grid.validate();
  SpectrumSeries out;
  out.node = node;
  out.grid = grid;
  size_t n = grid.size();
  out.pd.resize(n);
  out.pr.resize(n);
  out.sf.resize(n);
  out.total.resize(n);

  int row = static_cast<int>(node);
  for (size_t i = 0; i < n; ++i) {
    std::complex<double> jw(0.0, kTwoPi * grid.f_hz[i]);
    Eigen::Matrix3cd m = sys.G.cast<std::complex<double>>();
    m(0, 0) += jw * sys.C(0);
    m(1, 1) += jw * sys.C(1);
    m(2, 2) += jw * sys.C(2);
    Eigen::FullPivLU<Eigen::Matrix3cd> lu(m);
    if (!lu.isInvertible()) {
      throw numerical_error("singular system matrix at f = " +
                            std::to_string(grid.f_hz[i]));
    }
    Eigen::Matrix3cd z = lu.inverse();
    double vals[3];
    for (const NoiseInjection& inj : sys.injections) {
      double mag = std::abs(z(row, inj.node));
      vals[static_cast<int>(inj.id)] = inj.psd_a2_hz * mag * mag;
    }
    out.pd[i] = vals[0];
    out.pr[i] = vals[1];
    out.sf[i] = vals[2];
    out.total[i] = vals[0] + vals[1] + vals[2];
  }
  return out;
}

CumulativeRms cumulative_rms(const SpectrumSeries& spectrum) {
  spectrum.validate();
  const std::vector<double>& f = spectrum.grid.f_hz;

  CumulativeRms out;
  out.node = spectrum.node;
  out.grid = spectrum.grid;
  out.tc_referred = spectrum.tc_referred;
  out.pd = cumulative_sqrt_integral(f, spectrum.pd);
  out.pr = cumulative_sqrt_integral(f, spectrum.pr);
  out.sf = cumulative_sqrt_integral(f, spectrum.sf);
  out.total = cumulative_sqrt_integral(f, spectrum.total);
  out.final_pd = out.pd.back();
  out.final_pr = out.pr.back();
  out.final_sf = out.sf.back();
  out.final_total = out.total.back();

  double full = trapz(f, spectrum.total);
  double half = trapz_half(f, spectrum.total);
  if (full > 0.0 && std::abs(full - half) / full > 1e-3) {
    out.accuracy_warning = true;
  }
  return out;
}

SpectrumSeries refer_to_tc(const SpectrumSeries& spectrum, const SmallSignalSystem& sys) {
  double gain = sys.node_signal_gain(spectrum.node);
  if (!(gain > 0.0)) {
    throw domain_error("zero signal gain, cannot refer to TC units");
  }
  SpectrumSeries out = spectrum;
  double g2 = gain * gain;
  for (size_t i = 0; i < out.grid.size(); ++i) {
    out.pd[i] /= g2;
    out.pr[i] /= g2;
    out.sf[i] /= g2;
    out.total[i] /= g2;
  }
  out.tc_referred = true;
  return out;
}

double refer_rms_to_tc(double rms_volts, const SmallSignalSystem& sys, Node node) {
  double gain = sys.node_signal_gain(node);
  if (!(gain > 0.0)) {
    throw domain_error("zero signal gain, cannot refer to TC units");
  }
  return rms_volts / gain;
}

double photon_fraction(const SpectrumSeries& spectrum) {
  spectrum.validate();
  double total = trapz(spectrum.grid.f_hz, spectrum.total);
  if (!(total > 0.0)) {
    throw domain_error("zero total noise power, photon fraction undefined");
  }
  double photon = 0.5 * trapz(spectrum.grid.f_hz, spectrum.pd);
  return photon / total;
}

double shot_limit_ratio(const SpectrumSeries& spectrum) {
  spectrum.validate();
  double photon = 0.5 * trapz(spectrum.grid.f_hz, spectrum.pd);
  if (!(photon > 0.0)) {
    throw domain_error("zero photon shot power, ratio undefined");
  }
  double total = trapz(spectrum.grid.f_hz, spectrum.total);
  return total / photon;
}

double integrate_psd(const FrequencyGrid& grid, const std::vector<double>& psd) {
  if (psd.size() != grid.size()) throw domain_error("grid/psd length mismatch");
  return trapz(grid.f_hz, psd);
}

}  // namespace dvs
