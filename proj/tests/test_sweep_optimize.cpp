#include <doctest.h>

#include <cmath>

#include "dvsnoise/optimize.hpp"

using namespace dvs;

TEST_CASE("single grid point equals direct module calls") {
  DeviceParams p = DeviceParams::davis346();
  SweepSpec spec;
  spec.i_pd_values = {2.5e-15};
  spec.i_pr_values = {3e-9};
  spec.base_bias = BiasConfig::nominal();
  std::vector<SweepRecord> records = sweep(spec, p);
  REQUIRE(records.size() == 1);
  const SweepRecord& r = records[0];
  CHECK(r.error.empty());

  RatePrediction direct =
      predict_rates(OperatingPoint::from_current(2.5e-15), spec.base_bias, p);
  CHECK(r.rate_hz == doctest::Approx(direct.total_rate).epsilon(1e-12));
  CHECK(r.power_w ==
        doctest::Approx(p.V_dd * (3e-9 + spec.base_bias.I_sf + 2.5e-15)).epsilon(1e-12));
  CHECK(r.photon_fraction > 0.0);
  CHECK(r.bandwidth_hz > 0.0);
}

TEST_CASE("records come out in lexicographic order and errors stay in-row") {
  DeviceParams p = DeviceParams::davis346();
  SweepSpec spec;
  spec.i_pd_values = {1e-15, 1e-14};
  spec.i_pr_values = {1e-11, 1e-9};
  // the second follower bias is absurdly small: its pole underflows the
  // analysis band and that point must fail without aborting the sweep
  spec.i_sf_values = {10e-12, 1e-300};
  spec.base_bias = BiasConfig::nominal();
  std::vector<SweepRecord> records = sweep(spec, p);
  REQUIRE(records.size() == 8);
  CHECK(records[0].i_pd == 1e-15);
  CHECK(records[0].i_pr == 1e-11);
  CHECK(records[0].i_sf == 10e-12);
  CHECK(records[1].i_sf == 1e-300);
  CHECK(records[2].i_pr == 1e-9);
  CHECK(records[4].i_pd == 1e-14);

  int failed = 0;
  for (const SweepRecord& r : records) {
    if (!r.error.empty()) {
      ++failed;
      CHECK(std::isnan(r.rate_hz));
    } else {
      CHECK(std::isfinite(r.rate_hz));
    }
  }
  CHECK(failed == 4);
}

TEST_CASE("rate curve over I_pr rises, peaks and settles onto a plateau") {
  DeviceParams p = DeviceParams::davis346();
  SweepSpec spec;
  spec.i_pd_values = {lux_to_photocurrent(0.002, p), lux_to_photocurrent(0.04, p)};
  spec.i_pr_values = SweepSpec::log_grid(1e-12, 10e-9, 4);
  spec.base_bias = BiasConfig::nominal();
  std::vector<SweepRecord> records = sweep(spec, p);

  size_t n = spec.i_pr_values.size();
  for (size_t row = 0; row < spec.i_pd_values.size(); ++row) {
    double left = records[row * n].rate_hz;
    double peak = 0.0;
    size_t peak_idx = 0;
    for (size_t i = 0; i < n; ++i) {
      double r = records[row * n + i].rate_hz;
      if (r > peak) {
        peak = r;
        peak_idx = i;
      }
    }
    double right = records[row * n + n - 1].rate_hz;
    CAPTURE(row);
    CHECK(left < 0.9 * peak);        // rises from low I_pr
    CHECK(peak_idx > 0);             // peak is interior
    CHECK(peak_idx < n - 1);
    CHECK(right < 0.5 * peak);       // and falls back down

    // plateau: constant within 10% over the top half decade
    for (size_t i = 0; i < n; ++i) {
      if (spec.i_pr_values[i] < 10e-9 / std::sqrt(10.0)) continue;
      CHECK(records[row * n + i].rate_hz ==
            doctest::Approx(right).epsilon(0.10));
    }
    // plateau matches the source-ablation oracle within 10%
    BiasConfig b = spec.base_bias;
    b.I_pr = spec.i_pr_values.back();
    double ablated = predict_rates_pr_ablated(
                         OperatingPoint::from_current(spec.i_pd_values[row]), b, p)
                         .total_rate;
    CHECK(right == doctest::Approx(ablated).epsilon(0.10));
  }
}

TEST_CASE("optimizer picks the follower pole from the bandwidth constraint") {
  DeviceParams p = DeviceParams::davis346();
  OperatingPoint op = OperatingPoint::from_lux(0.1, p);
  OptimizeConstraints c;
  c.min_bandwidth_hz = 1.0;
  c.max_power_w = 1.0;  // generous
  BiasRecommendation rec = optimize(op, c, p);

  CHECK(rec.feasible);
  CHECK(rec.rationale == BiasRationale::sf_limited);
  // follower pole at margin * bandwidth
  double f_sf = p.kappa_sf * rec.i_sf / (2.0 * 3.14159265358979 * p.U_T * p.C_sf);
  CHECK(f_sf == doctest::Approx(c.min_bandwidth_hz * c.sf_margin).epsilon(1e-6));
  CHECK(rec.predicted_bandwidth_hz >= c.min_bandwidth_hz);
  // recommended I_pr sits in the plateau: prediction close to the asymptote
  CHECK(rec.predicted_rate_hz <=
        rec.asymptotic_rate_hz * (1.0 + c.rate_slack) * (1.0 + 1e-9));

  SUBCASE("prediction equals the sweep metric at the same grid point") {
    SweepSpec spec;
    spec.i_pd_values = {op.I_pd};
    spec.i_pr_values = {rec.i_pr};
    spec.i_sf_values = {rec.i_sf};
    spec.base_bias = BiasConfig::nominal();
    std::vector<SweepRecord> records = sweep(spec, p);
    REQUIRE(records.size() == 1);
    CHECK(records[0].rate_hz ==
          doctest::Approx(rec.predicted_rate_hz).epsilon(1e-9));
  }
}

TEST_CASE("raising the bandwidth floor never lowers the follower bias") {
  DeviceParams p = DeviceParams::davis346();
  OperatingPoint op = OperatingPoint::from_lux(0.1, p);
  double prev = 0.0;
  for (double bw : {0.5, 1.0, 2.0, 5.0}) {
    OptimizeConstraints c;
    c.min_bandwidth_hz = bw;
    c.max_power_w = 1.0;
    BiasRecommendation rec = optimize(op, c, p);
    CHECK(rec.i_sf >= prev);
    prev = rec.i_sf;
  }
}

TEST_CASE("impossible power cap is reported infeasible") {
  DeviceParams p = DeviceParams::davis346();
  OperatingPoint op = OperatingPoint::from_lux(0.1, p);
  OptimizeConstraints c;
  c.min_bandwidth_hz = 1.0;
  c.max_power_w = 1e-15;  // below even the minimal-bias power
  BiasRecommendation rec = optimize(op, c, p);
  CHECK_FALSE(rec.feasible);
  CHECK(rec.binding_constraint == "max_power");
}

TEST_CASE("power cap backoff is labelled power-capped") {
  DeviceParams p = DeviceParams::davis346();
  OperatingPoint op = OperatingPoint::from_lux(0.1, p);
  OptimizeConstraints c;
  c.min_bandwidth_hz = 1.0;
  // cap chosen above minimal power but below the plateau choice
  BiasRecommendation unlimited = optimize(op, [] {
    OptimizeConstraints cc;
    cc.min_bandwidth_hz = 1.0;
    cc.max_power_w = 1.0;
    return cc;
  }(), p);
  REQUIRE(unlimited.feasible);
  c.max_power_w = 0.5 * unlimited.predicted_power_w;
  BiasRecommendation rec = optimize(op, c, p);
  CHECK(rec.rationale == BiasRationale::power_capped);
  CHECK(rec.predicted_power_w <= c.max_power_w);
  CHECK(rec.i_pr < unlimited.i_pr);
}

TEST_CASE("very dark scene with a high bandwidth floor is pr-limited") {
  DeviceParams p = DeviceParams::davis346();
  OperatingPoint op = OperatingPoint::from_current(0.5e-15);
  OptimizeConstraints c;
  c.min_bandwidth_hz = 100.0;  // photoreceptor cannot reach this in the dark
  c.max_power_w = 1.0;
  BiasRecommendation rec = optimize(op, c, p);
  CHECK(rec.rationale == BiasRationale::pr_limited);
  CHECK_FALSE(rec.feasible);
  CHECK(rec.binding_constraint == "min_bandwidth");
  CHECK(rec.predicted_rate_hz >= 0.0);
  CHECK(rec.i_pr > 0.0);
  CHECK(rec.i_sf > 0.0);
}

TEST_CASE("constraint validation") {
  OptimizeConstraints c;
  CHECK_THROWS_AS(c.validate(), domain_error);  // zero bandwidth/power
  c.min_bandwidth_hz = 1.0;
  c.max_power_w = 1.0;
  CHECK_NOTHROW(c.validate());
  c.sf_margin = 0.5;
  CHECK_THROWS_AS(c.validate(), domain_error);
}
