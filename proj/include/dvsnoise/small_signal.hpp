#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>

#include "dvsnoise/params.hpp"

namespace dvs {

enum class Node { v_in = 0, v_pr = 1, v_sf = 2 };

enum class NoiseSource { photodiode = 0, amplifier = 1, follower = 2 };

// Tag for the log-intensity signal path (current -I_pd * dl injected at the
// photodiode node).
struct SignalSource {};

const char* to_string(Node node);
const char* to_string(NoiseSource source);
Node parse_node(const std::string& name);

// Small-signal conductances at the operating point.
struct Conductances {
  double g_s;    // feedback transistor source conductance, I_pd/U_T
  double g_mfb;  // feedback transistor gate transconductance, kappa_fb*I_pd/U_T
  double g_ma;   // amplifier transconductance, kappa_n*I_pr/U_T
  double g_oa;   // amplifier output conductance, I_pr/V_A
  double g_msf;  // source-follower transconductance, kappa_sf*I_sf/U_T
};

struct NoiseInjection {
  NoiseSource id;
  int node;            // row index of the injection
  double psd_a2_hz;    // one-sided white current PSD [A^2/Hz]
};

// Linearized photoreceptor + source-follower circuit at one operating point.
// Node equations: (G + s*C) v = i with nodes ordered {v_in, v_pr, v_sf}.
struct SmallSignalSystem {
  Eigen::Matrix3d G;                        // conductance matrix [S]
  Eigen::Vector3d C;                        // node capacitances (diagonal) [F]
  std::array<NoiseInjection, 3> injections; // pd, pr, sf white current sources
  double signal_gain_dc = 0.0;              // V per log-e at v_pr, U_T/kappa_fb
  double sf_gain = 1.0;                     // source follower treated as ideal buffer
  Conductances g{};

  DeviceParams params;
  BiasConfig bias;
  OperatingPoint op;

  // Eigenvalues of -C^-1 G [rad/s]; all have negative real part for a valid system.
  Eigen::Vector3cd natural_frequencies() const;
  double fastest_pole_hz() const;
  double slowest_pole_hz() const;
  double sf_pole_hz() const;  // g_msf / (2 pi C_sf)

  double injection_psd(NoiseSource source) const;

  // Copy with one white-noise source zeroed. The circuit itself is unchanged.
  SmallSignalSystem without_source(NoiseSource source) const;

  // DC gain from log-e input to the given node (v_in has no defined signal gain).
  double node_signal_gain(Node node) const;
};

// Builds the linearized system. Throws on invalid inputs, and model_error if
// the linearization is unstable (non-physical parameters).
SmallSignalSystem build_system(const OperatingPoint& op, const BiasConfig& bias,
                               const DeviceParams& params);

// Complex node response at frequency f.
//  - noise sources: impedance v_node / i_source [V/A]
//  - signal: v_node per unit log-e input [V]
// Throws domain_error for f < 0 and numerical_error for a singular matrix.
std::complex<double> transfer_fn(const SmallSignalSystem& sys, NoiseSource source,
                                 Node node, double f_hz);
std::complex<double> transfer_fn(const SmallSignalSystem& sys, SignalSource,
                                 Node node, double f_hz);

// Analytic second-order form of the signal path (plus the follower pole),
// derived independently of the nodal solver. Used as a cross-check.
struct SignalTfClosedForm {
  double dc_gain = 0.0;    // V per log-e at v_pr, includes finite loop gain
  double f0_hz = 0.0;      // natural frequency of the photoreceptor pair
  double q_factor = 0.0;
  std::complex<double> pole1_hz;  // slower / lower-magnitude pole
  std::complex<double> pole2_hz;
  bool poles_real = false;
  double pole_ratio = 0.0;        // |pole2|/|pole1|
  double sf_pole_hz = 0.0;
  double loop_gain = 0.0;         // (g_ma/g_oa)*(g_mfb/g_s)

  std::complex<double> eval(Node node, double f_hz) const;
};

SignalTfClosedForm signal_tf_closed_form(const OperatingPoint& op,
                                         const BiasConfig& bias,
                                         const DeviceParams& params);

// Smallest f where |H_signal(f)| falls to |H_signal(0)|/sqrt(2), located by
// bracketed bisection on a log grid over [1e-3, 1e9] Hz.
double bandwidth_3db(const SmallSignalSystem& sys, Node node);

}  // namespace dvs
