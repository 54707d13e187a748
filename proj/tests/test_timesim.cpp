#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dvsnoise/event_rate.hpp"
#include "dvsnoise/timesim.hpp"

using namespace dvs;

namespace {

SmallSignalSystem default_system(double i_pr) {
  DeviceParams p = DeviceParams::davis346();
  BiasConfig b = BiasConfig::nominal();
  b.I_pr = i_pr;
  return build_system(OperatingPoint::from_lux(0.1, p), b, p);
}

SmallSignalSystem noiseless(SmallSignalSystem sys) {
  return sys.without_source(NoiseSource::photodiode)
      .without_source(NoiseSource::amplifier)
      .without_source(NoiseSource::follower);
}

double band_power(const SpectrumSeries& s, double f_lo, double f_hi) {
  double acc = 0.0;
  for (size_t i = 1; i < s.grid.size(); ++i) {
    double f0 = s.grid.f_hz[i - 1], f1 = s.grid.f_hz[i];
    if (f0 < f_lo || f1 > f_hi) continue;
    acc += 0.5 * (s.total[i] + s.total[i - 1]) * (f1 - f0);
  }
  return acc;
}

}  // namespace

TEST_CASE("seeded runs are bit-identical") {
  SmallSignalSystem sys = default_system(10e-12);
  SimConfig cfg;
  cfg.duration = 30.0;
  cfg.seed = 42;
  SimResult a = simulate(sys, cfg);
  SimResult b = simulate(sys, cfg);
  REQUIRE(a.events.size() == b.events.size());
  for (size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].t == b.events[i].t);
    CHECK(a.events[i].polarity == b.events[i].polarity);
  }
  CHECK(a.summary.var_v_pr == b.summary.var_v_pr);

  SimConfig other = cfg;
  other.seed = 43;
  SimResult c = simulate(sys, other);
  bool differs = c.events.size() != a.events.size();
  for (size_t i = 0; !differs && i < a.events.size(); ++i) {
    differs = a.events[i].t != c.events[i].t;
  }
  CHECK(differs);
}

TEST_CASE("no noise and static input produce no events") {
  SmallSignalSystem sys = noiseless(default_system(3e-9));
  sys.params.I_leak = 0.0;
  SimConfig cfg;
  cfg.duration = 5.0;
  SimResult r = simulate(sys, cfg);
  CHECK(r.events.empty());
  CHECK(r.summary.total_rate == 0.0);
}

TEST_CASE("a step of two thresholds fires exactly two ON events") {
  DeviceParams p = DeviceParams::davis346();
  p.I_leak = 0.0;
  BiasConfig b = BiasConfig::nominal();
  b.delta_refr = 1e-3;
  SmallSignalSystem sys =
      noiseless(build_system(OperatingPoint::from_lux(0.1, p), b, p));
  SimConfig cfg;
  cfg.duration = 8.0;
  double step = 2.0 * b.theta_on;
  cfg.stimulus = {{0.0, 0.0}, {1.0, 0.0}, {1.01, step}, {8.0, step}};
  SimResult r = simulate(sys, cfg);
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].polarity == 1);
  CHECK(r.events[1].polarity == 1);
  CHECK(r.events[0].t > 1.0);
  CHECK(r.events[1].t > r.events[0].t);
}

TEST_CASE("refractory period separates events") {
  DeviceParams p = DeviceParams::davis346();
  BiasConfig b = BiasConfig::nominal();
  b.I_pr = 10e-12;
  b.theta_on = b.theta_off = 0.05;
  b.delta_refr = 0.02;
  SmallSignalSystem sys = build_system(OperatingPoint::from_lux(0.1, p), b, p);
  SimConfig cfg;
  cfg.duration = 100.0;
  cfg.seed = 7;
  SimResult r = simulate(sys, cfg);
  REQUIRE(r.events.size() > 20);
  for (size_t i = 1; i < r.events.size(); ++i) {
    CHECK(r.events[i].t - r.events[i - 1].t >= b.delta_refr - 1e-12);
    CHECK(r.events[i].t >= r.events[i - 1].t);
  }
}

TEST_CASE("leak ramp fires periodic leak-tagged events") {
  DeviceParams p = DeviceParams::davis346();
  p.I_leak = 1e-15;  // ~1 Hz against the 1 fC threshold charge
  BiasConfig b = BiasConfig::nominal();
  SmallSignalSystem sys =
      noiseless(build_system(OperatingPoint::from_lux(0.1, p), b, p));
  double expected = leak_rate(p, b, sys);
  SimConfig cfg;
  cfg.duration = 30.0;
  SimResult r = simulate(sys, cfg);
  REQUIRE_FALSE(r.events.empty());
  for (const EventRecord& e : r.events) {
    CHECK(e.polarity == 2);
  }
  CHECK(r.summary.leak_event_rate ==
        doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("dt coarser than a tenth of the fastest time constant is rejected") {
  SmallSignalSystem sys = default_system(3e-9);
  double tau_min = 1.0 / sys.natural_frequencies().cwiseAbs().maxCoeff();
  SimConfig cfg;
  cfg.duration = 1.0;
  cfg.dt = tau_min;  // 10x too coarse
  CHECK_THROWS_AS(simulate(sys, cfg), precondition_error);
}

TEST_CASE("welch estimate of white noise") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = 1e-3;
  std::vector<double> x(65536);
  double var = 0.0, mean = 0.0;
  for (double& v : x) v = normal(rng);
  for (double v : x) mean += v;
  mean /= x.size();
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (x.size() - 1);

  SpectrumSeries psd = empirical_psd(x, dt);
  // flat at sigma^2 / (fs/2)
  double level = var / (0.5 / dt);
  double acc = 0.0;
  for (double v : psd.total) acc += v;
  CHECK(acc / psd.total.size() == doctest::Approx(level).epsilon(0.10));
  // integral reproduces the sample variance
  double integral = 0.0;
  for (size_t i = 1; i < psd.grid.size(); ++i) {
    integral += 0.5 * (psd.total[i] + psd.total[i - 1]) *
                (psd.grid.f_hz[i] - psd.grid.f_hz[i - 1]);
  }
  CHECK(integral == doctest::Approx(var).epsilon(0.05));
}

TEST_CASE("welch recovers sinusoid power") {
  const double dt = 1e-3, a = 0.3, f0 = 50.37;
  std::vector<double> x(65536);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = a * std::sin(2.0 * std::numbers::pi * f0 * i * dt);
  }
  SpectrumSeries psd = empirical_psd(x, dt);
  double integral = 0.0;
  for (size_t i = 1; i < psd.grid.size(); ++i) {
    integral += 0.5 * (psd.total[i] + psd.total[i - 1]) *
                (psd.grid.f_hz[i] - psd.grid.f_hz[i - 1]);
  }
  CHECK(integral == doctest::Approx(a * a / 2.0).epsilon(0.05));
}

TEST_CASE("welch rejects short traces") {
  std::vector<double> x(1000, 0.0);
  CHECK_THROWS_AS(empirical_psd(x, 1e-3), accuracy_error);
}

TEST_CASE("time-domain statistics match the model spectrum") {
  SmallSignalSystem sys = default_system(10e-12);
  SimConfig cfg;
  cfg.duration = 600.0;
  cfg.seed = 11;
  cfg.record_traces = true;
  SimResult r = simulate(sys, cfg);

  FrequencyGrid grid = FrequencyGrid::for_node(sys, Node::v_pr);
  SpectrumSeries model = psd(sys, Node::v_pr, grid);
  double model_var = integrate_psd(grid, model.total);

  SUBCASE("variance within 10%") {
    CHECK(r.summary.var_v_pr == doctest::Approx(model_var).epsilon(0.10));
  }

  SUBCASE("empirical PSD within 3 dB of the model over the mid band") {
    SpectrumSeries emp = empirical_psd(r.traces.v_pr, r.traces.dt);
    for (auto [lo, hi] : {std::pair{0.3, 1.0}, {1.0, 3.0}, {3.0, 8.0}}) {
      double pe = band_power(emp, lo, hi);
      double pm = 0.0;
      {
        // model on the same band
        FrequencyGrid g = FrequencyGrid::log_spaced(lo, hi, 96);
        SpectrumSeries m = psd(sys, Node::v_pr, g);
        pm = integrate_psd(g, m.total);
      }
      CAPTURE(lo);
      CHECK(pe / pm > 0.5);
      CHECK(pe / pm < 2.0);
    }
  }
}

TEST_CASE("photon-arrival and gaussian drives agree at high photon rate") {
  DeviceParams p = DeviceParams::davis346();
  BiasConfig b = BiasConfig::nominal();
  SmallSignalSystem sys = build_system(OperatingPoint::from_current(1e-13), b, p);

  SimConfig cfg;
  cfg.duration = 60.0;
  cfg.seed = 5;
  cfg.record_traces = true;

  SimResult gauss = simulate(sys, cfg);
  cfg.drive_mode = DriveMode::poisson_photon;
  SimResult poisson = simulate(sys, cfg);

  CHECK(poisson.summary.var_v_pr ==
        doctest::Approx(gauss.summary.var_v_pr).epsilon(0.20));
  SpectrumSeries pg = empirical_psd(gauss.traces.v_pr, gauss.traces.dt);
  SpectrumSeries pp = empirical_psd(poisson.traces.v_pr, poisson.traces.dt);
  double bg = band_power(pg, 10.0, 200.0);
  double bp = band_power(pp, 10.0, 200.0);
  CHECK(bp / bg > 0.8);
  CHECK(bp / bg < 1.25);
}

TEST_CASE("simulated event rate is near the analytic prediction") {
  DeviceParams p = DeviceParams::davis346();
  BiasConfig b = BiasConfig::nominal();
  b.I_pr = 10e-12;
  OperatingPoint op = OperatingPoint::from_lux(0.1, p);
  SmallSignalSystem sys = build_system(op, b, p);
  double predicted = predict_rates(op, b, p).total_rate;
  REQUIRE(predicted > 0.1);

  SimConfig cfg;
  cfg.duration = 400.0;
  cfg.seed = 3;
  SimResult r = simulate(sys, cfg);
  double measured = r.summary.total_rate;
  CHECK(measured / predicted > 0.5);
  CHECK(measured / predicted < 2.0);
}
