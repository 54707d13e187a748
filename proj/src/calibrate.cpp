#include "dvsnoise/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace dvs {

namespace {

using Accessor = double DeviceParams::*;

const std::map<std::string, Accessor>& accessor_map() {
  static const std::map<std::string, Accessor> m = {
      {"C_in", &DeviceParams::C_in},       {"C_out", &DeviceParams::C_out},
      {"C_sf", &DeviceParams::C_sf},       {"V_A", &DeviceParams::V_A},
      {"kappa_fb", &DeviceParams::kappa_fb}, {"kappa_n", &DeviceParams::kappa_n},
      {"kappa_sf", &DeviceParams::kappa_sf}, {"U_T", &DeviceParams::U_T},
      {"lux_to_amps", &DeviceParams::lux_to_amps},
  };
  return m;
}

struct Objective {
  const std::vector<CalibrationPoint>& data;
  const CalibrationOptions& opts;
  DeviceParams base;
  std::vector<Accessor> members;

  double operator()(const std::vector<double>& log10_values) const {
    DeviceParams p = base;
    for (size_t i = 0; i < members.size(); ++i) {
      p.*(members[i]) = std::pow(10.0, log10_values[i]);
    }
    try {
      SmallSignalSystem sys = build_system(opts.op, opts.bias, p);
      FrequencyGrid grid;
      grid.f_hz.reserve(data.size());
      for (const CalibrationPoint& pt : data) grid.f_hz.push_back(pt.f_hz);
      SpectrumSeries model = psd(sys, opts.node, grid);
      double acc = 0.0;
      for (size_t i = 0; i < data.size(); ++i) {
        double m = std::max(model.total[i], 1e-300);
        double d = std::log10(m) - std::log10(data[i].psd_v2_hz);
        acc += d * d;
      }
      return acc / static_cast<double>(data.size());
    } catch (const error&) {
      return std::numeric_limits<double>::infinity();
    }
  }
};

// Golden-section minimum of f along coordinate i inside [x_i - span, x_i + span].
double line_search(const Objective& obj, std::vector<double>& x, size_t i,
                   double span) {
  constexpr double kPhi = 0.6180339887498949;
  double lo = x[i] - span, hi = x[i] + span;
  double a = hi - kPhi * (hi - lo);
  double b = lo + kPhi * (hi - lo);
  auto eval = [&](double v) {
    double saved = x[i];
    x[i] = v;
    double j = obj(x);
    x[i] = saved;
    return j;
  };
  double fa = eval(a), fb = eval(b);
  for (int it = 0; it < 40; ++it) {
    if (fa < fb) {
      hi = b; b = a; fb = fa;
      a = hi - kPhi * (hi - lo);
      fa = eval(a);
    } else {
      lo = a; a = b; fa = fb;
      b = lo + kPhi * (hi - lo);
      fb = eval(b);
    }
  }
  double best = 0.5 * (lo + hi);
  double f_best = eval(best);
  if (f_best <= obj(x)) {
    x[i] = best;
    return f_best;
  }
  return obj(x);
}

double coordinate_descent(const Objective& obj, std::vector<double>& x,
                          int max_cycles, double initial_span) {
  double j = obj(x);
  double span = initial_span;
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    double j_before = j;
    for (size_t i = 0; i < x.size(); ++i) {
      j = line_search(obj, x, i, span);
    }
    span = std::max(span * 0.7, 1e-4);
    if (j_before - j < 1e-14 && cycle > 4) break;
  }
  return j;
}

}  // namespace

const std::vector<std::string>& calibratable_parameters() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : accessor_map()) v.push_back(name);
    return v;
  }();
  return names;
}

CalibrationResult calibrate(const std::vector<CalibrationPoint>& measured,
                            const DeviceParams& known,
                            const CalibrationOptions& options) {
  if (options.free_names.empty()) {
    throw precondition_error("calibration free parameter set is empty");
  }
  if (measured.size() < 8) {
    throw precondition_error("calibration needs at least 8 frequency points, got " +
                             std::to_string(measured.size()));
  }
  double f_lo = std::numeric_limits<double>::infinity(), f_hi = 0.0;
  for (const CalibrationPoint& pt : measured) {
    if (!(pt.f_hz > 0.0) || !(pt.psd_v2_hz > 0.0)) {
      throw precondition_error("calibration data must have positive f and PSD");
    }
    f_lo = std::min(f_lo, pt.f_hz);
    f_hi = std::max(f_hi, pt.f_hz);
  }
  std::vector<CalibrationPoint> data = measured;
  std::sort(data.begin(), data.end(),
            [](const CalibrationPoint& a, const CalibrationPoint& b) {
              return a.f_hz < b.f_hz;
            });

  CalibrationResult result;
  if (std::log10(f_hi / f_lo) < 2.0) {
    result.warnings.push_back(
        "conditioning: data spans less than two decades; fit may be degenerate");
  }

  Objective obj{data, options, known, {}};
  for (const std::string& name : options.free_names) {
    auto it = accessor_map().find(name);
    if (it == accessor_map().end()) {
      throw precondition_error("unknown calibration parameter '" + name + "'");
    }
    obj.members.push_back(it->second);
  }

  std::vector<double> x0(obj.members.size());
  for (size_t i = 0; i < obj.members.size(); ++i) {
    x0[i] = std::log10(known.*(obj.members[i]));
  }

  std::mt19937_64 rng(options.seed);
  std::vector<double> best_x = x0;
  double best_j = std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(options.n_starts, 1); ++start) {
    std::vector<double> x = x0;
    if (start > 0) {
      for (double& v : x) {
        double u = (static_cast<double>(rng() >> 11) * 0x1.0p-53) * 2.0 - 1.0;
        v += 0.7 * u;
      }
    }
    double j = coordinate_descent(obj, x, options.max_cycles, 1.5);
    if (j < best_j) {
      best_j = j;
      best_x = x;
    }
  }
  // Local refinement with a tight bracket around the best start.
  best_j = coordinate_descent(obj, best_x, 25, 0.05);

  if (!std::isfinite(best_j)) {
    result.converged = false;
    result.warnings.push_back("fit did not converge; returning the initial guess");
    best_x = x0;
    best_j = obj(x0);
  } else if (best_j > 1.0) {
    result.converged = false;
    result.warnings.push_back("large residual after fit budget; best-so-far returned");
  }

  result.params = known;
  for (size_t i = 0; i < obj.members.size(); ++i) {
    double value = std::pow(10.0, best_x[i]);
    result.params.*(obj.members[i]) = value;
    result.fitted[options.free_names[i]] = value;
  }
  result.residual = best_j;
  return result;
}

}  // namespace dvs
