#pragma once

#include <optional>

#include "dvsnoise/errors.hpp"

namespace dvs {

// Fixed silicon/process constants of the pixel front-end.
//
// The defaults describe a DAVIS346-class pixel. Capacitances, the Early
// voltage and the lux-to-photocurrent gain are fitted calibration values
// (they absorb Miller/overlap parasitics and measurement loading), not
// numbers read off a layout. Override any of them through the JSON config
// or refit with the calibration module.
struct DeviceParams {
  double U_T = 0.025;            // thermal voltage [V]
  double kappa_fb = 0.97;        // subthreshold slope, feedback transistor
  double kappa_n = 0.97;         // subthreshold slope, amplifier input pair
  double kappa_sf = 0.055;       // effective follower transconductance factor;
                                 // absorbs follower loading and the readout chain
  double C_in = 560e-15;         // photodiode node capacitance [F]
  double C_out = 227e-15;        // photoreceptor output node capacitance [F]
  double C_sf = 1.71e-12;        // source-follower load capacitance [F]
  double V_A = 4.1;              // amplifier Early voltage [V], sets DC loop gain
  double q_e = 1.602176634e-19;  // elementary charge [C]
  double I_leak = 5e-17;         // reset-switch junction/parasitic leak [A]
  double lux_to_amps = 25e-15;   // photocurrent per on-chip illuminance [A/lux]
  double C_2_equiv = 456e-15;    // effective change-amp feedback cap for leak charge [F]
  double V_dd = 1.8;             // supply voltage used for power estimates [V]

  static DeviceParams davis346() { return DeviceParams{}; }

  // Throws dvs::domain_error naming the offending field.
  void validate() const;
};

// User-controllable bias currents and event-pipeline settings.
struct BiasConfig {
  double I_pr = 3e-9;        // photoreceptor amplifier bias [A]
  double I_sf = 10e-12;      // source-follower bias [A]
  double theta_on = 0.085;   // ON threshold [TC log-e units]
  double theta_off = 0.085;  // OFF threshold [TC log-e units]
  double delta_refr = 2e-3;  // refractory period [s]

  static BiasConfig nominal() { return BiasConfig{}; }

  void validate() const;
};

// DC operating condition of the photodiode.
struct OperatingPoint {
  double I_pd = 2.5e-15;                  // photodiode DC current [A]
  std::optional<double> illuminance;      // on-chip illuminance [lux], informational

  static OperatingPoint from_current(double i_pd);
  static OperatingPoint from_lux(double lux, const DeviceParams& params);

  void validate() const;
};

// illuminance [lux] -> photocurrent [A]. Throws dvs::domain_error for
// non-positive illuminance.
double lux_to_photocurrent(double illuminance, const DeviceParams& params);

}  // namespace dvs
