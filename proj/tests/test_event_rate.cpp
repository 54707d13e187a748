#include <doctest.h>

#include <cmath>

#include "dvsnoise/event_rate.hpp"

using namespace dvs;

namespace {

NoiseStats stats_of(double sigma, double nu0) {
  NoiseStats s;
  s.sigma_tc = sigma;
  s.nu0_hz = nu0;
  s.m0 = sigma * sigma;
  return s;
}

BiasConfig bias_theta(double theta, double refr = 0.0) {
  BiasConfig b = BiasConfig::nominal();
  b.theta_on = b.theta_off = theta;
  b.delta_refr = refr;
  return b;
}

}  // namespace

TEST_CASE("crossing-rate closed form") {
  // sigma = 1, nu0 = 100 Hz, theta = 3 -> nu = 100 exp(-4.5) = 1.111 Hz
  RatePrediction r = rice_rate(stats_of(1.0, 100.0), bias_theta(3.0));
  CHECK(r.on_rate == doctest::Approx(1.111).epsilon(1e-3));
  CHECK(r.on_rate == doctest::Approx(100.0 * std::exp(-4.5)).epsilon(1e-12));
  CHECK(r.off_rate == doctest::Approx(r.on_rate).epsilon(1e-12));
  CHECK(r.total_rate == doctest::Approx(r.on_rate + r.off_rate).epsilon(1e-12));
}

TEST_CASE("rate limits") {
  SUBCASE("huge threshold silences the pixel") {
    RatePrediction r = rice_rate(stats_of(1.0, 100.0), bias_theta(1e3));
    CHECK(r.total_rate == doctest::Approx(0.0));
  }
  SUBCASE("zero noise produces zero rates") {
    RatePrediction r = rice_rate(stats_of(0.0, 0.0), bias_theta(0.1));
    CHECK(r.total_rate == 0.0);
    CHECK(r.on_rate == 0.0);
  }
}

TEST_CASE("monotonicity in threshold and noise") {
  double prev = 1e300;
  for (double theta : {0.5, 1.0, 2.0, 4.0}) {
    double rate = rice_rate(stats_of(1.0, 100.0), bias_theta(theta)).total_rate;
    CHECK(rate < prev);
    prev = rate;
  }
  prev = 0.0;
  for (double sigma : {0.25, 0.5, 1.0, 2.0}) {
    double rate = rice_rate(stats_of(sigma, 100.0), bias_theta(1.0)).total_rate;
    CHECK(rate > prev);
    prev = rate;
  }
}

TEST_CASE("refractory correction") {
  NoiseStats hot = stats_of(10.0, 1e6);
  SUBCASE("never increases a rate") {
    double raw = rice_rate(hot, bias_theta(0.5, 0.0)).on_rate;
    double corrected = rice_rate(hot, bias_theta(0.5, 1e-3)).on_rate;
    CHECK(corrected < raw);
  }
  SUBCASE("saturates below 1/delta_refr") {
    double corrected = rice_rate(hot, bias_theta(0.01, 1e-3)).on_rate;
    CHECK(corrected < 1.0 / 1e-3);
  }
}

TEST_CASE("leak event rate") {
  DeviceParams p = DeviceParams::davis346();
  BiasConfig b = BiasConfig::nominal();
  SmallSignalSystem sys = build_system(OperatingPoint::from_lux(0.1, p), b, p);

  SUBCASE("no leak current, no leak events") {
    DeviceParams zero = p;
    zero.I_leak = 0.0;
    CHECK(leak_rate(zero, b, sys) == 0.0);
  }
  SUBCASE("1 fA against a 1e-15 C threshold charge gives 1 Hz") {
    DeviceParams q = p;
    q.I_leak = 1e-15;
    // choose the change-amp cap so Q_theta is exactly 1e-15 C
    q.C_2_equiv = 1e-15 / (b.theta_on * sys.node_signal_gain(Node::v_sf));
    CHECK(leak_rate(q, b, sys) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("doubling theta_on halves the rate") {
    double base = leak_rate(p, b, sys);
    BiasConfig b2 = b;
    b2.theta_on *= 2.0;
    CHECK(leak_rate(p, b2, sys) == doctest::Approx(0.5 * base).epsilon(1e-9));
  }
  SUBCASE("default charge budget is one femtocoulomb") {
    double q_theta = p.C_2_equiv * b.theta_on * sys.node_signal_gain(Node::v_sf);
    CHECK(q_theta == doctest::Approx(1e-15).epsilon(0.01));
  }
}

TEST_CASE("rate pipeline structure") {
  DeviceParams p = DeviceParams::davis346();
  OperatingPoint op = OperatingPoint::from_lux(0.1, p);
  RatePrediction r = predict_rates(op, BiasConfig::nominal(), p);
  CHECK(r.total_rate == doctest::Approx(r.on_rate + r.off_rate).epsilon(1e-12));
  CHECK(r.total_rate > 0.0);
  CHECK(r.leak_rate > 0.0);
  CHECK(r.sigma_tc > 0.0);
  CHECK(r.nu0_hz > 0.0);

  // ablating the photoreceptor source lowers the predicted rate
  RatePrediction abl = predict_rates_pr_ablated(op, BiasConfig::nominal(), p);
  CHECK(abl.total_rate < r.total_rate);
}
