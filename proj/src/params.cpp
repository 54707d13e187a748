#include "dvsnoise/params.hpp"

#include <cmath>
#include <string>

namespace dvs {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw domain_error(std::string(name) + " must be strictly positive, got " +
                       std::to_string(v));
  }
}

void require_kappa(double v, const char* name) {
  if (!(v > 0.0) || !(v <= 1.0)) {
    throw domain_error(std::string(name) + " must lie in (0, 1], got " +
                       std::to_string(v));
  }
}

}  // namespace

void DeviceParams::validate() const {
  require_positive(U_T, "U_T");
  require_kappa(kappa_fb, "kappa_fb");
  require_kappa(kappa_n, "kappa_n");
  require_kappa(kappa_sf, "kappa_sf");
  require_positive(C_in, "C_in");
  require_positive(C_out, "C_out");
  require_positive(C_sf, "C_sf");
  require_positive(V_A, "V_A");
  require_positive(q_e, "q_e");
  if (I_leak < 0.0 || !std::isfinite(I_leak)) {
    throw domain_error("I_leak must be non-negative");
  }
  require_positive(lux_to_amps, "lux_to_amps");
  require_positive(C_2_equiv, "C_2_equiv");
  require_positive(V_dd, "V_dd");
}

void BiasConfig::validate() const {
  require_positive(I_pr, "I_pr");
  require_positive(I_sf, "I_sf");
  require_positive(theta_on, "theta_on");
  require_positive(theta_off, "theta_off");
  if (delta_refr < 0.0 || !std::isfinite(delta_refr)) {
    throw domain_error("delta_refr must be non-negative");
  }
}

void OperatingPoint::validate() const {
  require_positive(I_pd, "I_pd");
  if (illuminance && !(*illuminance > 0.0)) {
    throw domain_error("illuminance must be strictly positive");
  }
}

OperatingPoint OperatingPoint::from_current(double i_pd) {
  OperatingPoint op;
  op.I_pd = i_pd;
  op.illuminance.reset();
  op.validate();
  return op;
}

OperatingPoint OperatingPoint::from_lux(double lux, const DeviceParams& params) {
  OperatingPoint op;
  op.I_pd = lux_to_photocurrent(lux, params);
  op.illuminance = lux;
  return op;
}

double lux_to_photocurrent(double illuminance, const DeviceParams& params) {
  if (!(illuminance > 0.0) || !std::isfinite(illuminance)) {
    throw domain_error("illuminance must be strictly positive, got " +
                       std::to_string(illuminance));
  }
  params.validate();
  return illuminance * params.lux_to_amps;
}

}  // namespace dvs
