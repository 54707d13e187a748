#include <doctest.h>

#include "dvsnoise/params.hpp"

using namespace dvs;

TEST_CASE("lux to photocurrent") {
  DeviceParams p = DeviceParams::davis346();
  p.lux_to_amps = 25e-15;
  CHECK(lux_to_photocurrent(0.1, p) == doctest::Approx(2.5e-15).epsilon(1e-12));
  CHECK(lux_to_photocurrent(1.0, p) == doctest::Approx(25e-15).epsilon(1e-12));
  CHECK_THROWS_AS(lux_to_photocurrent(0.0, p), domain_error);
  CHECK_THROWS_AS(lux_to_photocurrent(-1.0, p), domain_error);
}

TEST_CASE("device parameter invariants") {
  DeviceParams p = DeviceParams::davis346();
  CHECK_NOTHROW(p.validate());

  SUBCASE("capacitances strictly positive") {
    p.C_in = 0.0;
    CHECK_THROWS_AS(p.validate(), domain_error);
  }
  SUBCASE("kappa in (0,1]") {
    p.kappa_fb = 1.2;
    CHECK_THROWS_AS(p.validate(), domain_error);
    p.kappa_fb = 0.0;
    CHECK_THROWS_AS(p.validate(), domain_error);
    p.kappa_fb = 1.0;
    CHECK_NOTHROW(p.validate());
  }
  SUBCASE("leak may be zero but not negative") {
    p.I_leak = 0.0;
    CHECK_NOTHROW(p.validate());
    p.I_leak = -1e-18;
    CHECK_THROWS_AS(p.validate(), domain_error);
  }
}

TEST_CASE("bias invariants") {
  BiasConfig b = BiasConfig::nominal();
  CHECK_NOTHROW(b.validate());
  b.I_pr = 0.0;
  CHECK_THROWS_AS(b.validate(), domain_error);
  b = BiasConfig::nominal();
  b.theta_on = -0.1;
  CHECK_THROWS_AS(b.validate(), domain_error);
  b = BiasConfig::nominal();
  b.delta_refr = 0.0;
  CHECK_NOTHROW(b.validate());
}

TEST_CASE("operating point") {
  DeviceParams p = DeviceParams::davis346();
  OperatingPoint op = OperatingPoint::from_lux(0.1, p);
  CHECK(op.I_pd == doctest::Approx(0.1 * p.lux_to_amps));
  CHECK(op.illuminance.has_value());
  CHECK_THROWS_AS(OperatingPoint::from_current(0.0), domain_error);
  CHECK_FALSE(OperatingPoint::from_current(1e-15).illuminance.has_value());
}
