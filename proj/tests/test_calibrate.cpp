#include <doctest.h>

#include <cmath>
#include <random>

#include "dvsnoise/calibrate.hpp"

using namespace dvs;

namespace {

// PSD samples generated from known parameters.
std::vector<CalibrationPoint> synthesize(const DeviceParams& p, const BiasConfig& b,
                                         const OperatingPoint& op, Node node,
                                         int n_points = 24) {
  SmallSignalSystem sys = build_system(op, b, p);
  FrequencyGrid grid = FrequencyGrid::log_spaced(0.05, 500.0, 16);
  SpectrumSeries s = psd(sys, node, grid);
  std::vector<CalibrationPoint> out;
  size_t stride = std::max<size_t>(1, grid.size() / n_points);
  for (size_t i = 0; i < grid.size(); i += stride) {
    out.push_back({grid.f_hz[i], s.total[i]});
  }
  return out;
}

}  // namespace

TEST_CASE("round trip recovers capacitances") {
  DeviceParams truth = DeviceParams::davis346();
  CalibrationOptions opts;
  opts.bias = BiasConfig::nominal();
  opts.op = OperatingPoint::from_lux(0.1, truth);
  opts.free_names = {"C_in", "C_out"};

  std::vector<CalibrationPoint> data =
      synthesize(truth, opts.bias, opts.op, Node::v_pr);

  DeviceParams start = truth;
  start.C_in *= 3.0;   // detuned initial guess
  start.C_out *= 0.4;
  CalibrationResult result = calibrate(data, start, opts);

  CHECK(result.converged);
  CHECK(result.fitted.at("C_in") == doctest::Approx(truth.C_in).epsilon(0.05));
  CHECK(result.fitted.at("C_out") == doctest::Approx(truth.C_out).epsilon(0.05));
  CHECK(result.residual < 1e-4);
}

TEST_CASE("noiseless start at the truth leaves the curve unchanged") {
  DeviceParams truth = DeviceParams::davis346();
  CalibrationOptions opts;
  opts.bias = BiasConfig::nominal();
  opts.op = OperatingPoint::from_lux(0.1, truth);
  opts.free_names = {"C_in", "C_out", "V_A"};
  opts.n_starts = 1;
  std::vector<CalibrationPoint> data =
      synthesize(truth, opts.bias, opts.op, Node::v_pr);
  CalibrationResult result = calibrate(data, truth, opts);
  CHECK(result.residual < 1e-8);
}

TEST_CASE("multiplicatively noisy data still lands near the truth") {
  DeviceParams truth = DeviceParams::davis346();
  CalibrationOptions opts;
  opts.bias = BiasConfig::nominal();
  opts.op = OperatingPoint::from_lux(0.1, truth);
  opts.free_names = {"C_in", "C_out"};

  std::vector<CalibrationPoint> data =
      synthesize(truth, opts.bias, opts.op, Node::v_pr);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> jitter(0.0, 0.2);
  for (CalibrationPoint& pt : data) {
    pt.psd_v2_hz *= std::exp(jitter(rng));  // ~20% multiplicative noise
  }
  DeviceParams start = truth;
  start.C_in *= 2.0;
  start.C_out *= 0.5;
  CalibrationResult result = calibrate(data, start, opts);

  CHECK(result.fitted.at("C_in") == doctest::Approx(truth.C_in).epsilon(0.25));
  CHECK(result.fitted.at("C_out") == doctest::Approx(truth.C_out).epsilon(0.25));
  CHECK(result.residual < 0.1);
}

TEST_CASE("preconditions") {
  DeviceParams p = DeviceParams::davis346();
  CalibrationOptions opts;
  opts.bias = BiasConfig::nominal();
  opts.op = OperatingPoint::from_lux(0.1, p);
  std::vector<CalibrationPoint> data = synthesize(p, opts.bias, opts.op, Node::v_pr);

  SUBCASE("empty free set") {
    opts.free_names = {};
    CHECK_THROWS_AS(calibrate(data, p, opts), precondition_error);
  }
  SUBCASE("unknown parameter name") {
    opts.free_names = {"C_bogus"};
    CHECK_THROWS_AS(calibrate(data, p, opts), precondition_error);
  }
  SUBCASE("too few points") {
    opts.free_names = {"C_in"};
    data.resize(5);
    CHECK_THROWS_AS(calibrate(data, p, opts), precondition_error);
  }
  SUBCASE("non-positive PSD") {
    opts.free_names = {"C_in"};
    data[0].psd_v2_hz = 0.0;
    CHECK_THROWS_AS(calibrate(data, p, opts), precondition_error);
  }
}

TEST_CASE("narrow-band data carries a conditioning warning") {
  DeviceParams truth = DeviceParams::davis346();
  CalibrationOptions opts;
  opts.bias = BiasConfig::nominal();
  opts.op = OperatingPoint::from_lux(0.1, truth);
  opts.free_names = {"C_in"};
  opts.n_starts = 2;
  opts.max_cycles = 10;

  SmallSignalSystem sys = build_system(opts.op, opts.bias, truth);
  FrequencyGrid grid = FrequencyGrid::log_spaced(1.0, 9.0, 16);  // < 1 decade
  SpectrumSeries s = psd(sys, Node::v_pr, grid);
  std::vector<CalibrationPoint> data;
  for (size_t i = 0; i < grid.size(); ++i) data.push_back({grid.f_hz[i], s.total[i]});

  CalibrationResult result = calibrate(data, truth, opts);
  bool warned = false;
  for (const std::string& w : result.warnings) {
    warned = warned || w.find("conditioning") != std::string::npos;
  }
  CHECK(warned);
}
