#include "dvsnoise/small_signal.hpp"

#include <cmath>
#include <numbers>

namespace dvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix3cd system_matrix(const SmallSignalSystem& sys, double f_hz) {
  std::complex<double> jw(0.0, kTwoPi * f_hz);
  Eigen::Matrix3cd m = sys.G.cast<std::complex<double>>();
  m(0, 0) += jw * sys.C(0);
  m(1, 1) += jw * sys.C(1);
  m(2, 2) += jw * sys.C(2);
  return m;
}

Eigen::Vector3cd solve_injection(const SmallSignalSystem& sys, double f_hz,
                                 const Eigen::Vector3cd& rhs) {
  if (f_hz < 0.0 || !std::isfinite(f_hz)) {
    throw domain_error("transfer_fn requires f >= 0");
  }
  Eigen::Matrix3cd m = system_matrix(sys, f_hz);
  Eigen::FullPivLU<Eigen::Matrix3cd> lu(m);
  if (!lu.isInvertible()) {
    throw numerical_error("singular system matrix at f = " + std::to_string(f_hz));
  }
  return lu.solve(rhs);
}

}  // namespace

const char* to_string(Node node) {
  switch (node) {
    case Node::v_in: return "v_in";
    case Node::v_pr: return "v_pr";
    case Node::v_sf: return "v_sf";
  }
  return "?";
}

const char* to_string(NoiseSource source) {
  switch (source) {
    case NoiseSource::photodiode: return "pd";
    case NoiseSource::amplifier: return "pr";
    case NoiseSource::follower: return "sf";
  }
  return "?";
}

Node parse_node(const std::string& name) {
  if (name == "v_in") return Node::v_in;
  if (name == "v_pr") return Node::v_pr;
  if (name == "v_sf") return Node::v_sf;
  throw config_error("unknown node '" + name + "' (expected v_in, v_pr or v_sf)");
}

Eigen::Vector3cd SmallSignalSystem::natural_frequencies() const {
  Eigen::Matrix3d a = -(C.cwiseInverse().asDiagonal() * G);
  Eigen::EigenSolver<Eigen::Matrix3d> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues();
}

double SmallSignalSystem::fastest_pole_hz() const {
  return natural_frequencies().cwiseAbs().maxCoeff() / kTwoPi;
}

double SmallSignalSystem::slowest_pole_hz() const {
  return natural_frequencies().cwiseAbs().minCoeff() / kTwoPi;
}

double SmallSignalSystem::sf_pole_hz() const { return g.g_msf / (kTwoPi * C(2)); }

double SmallSignalSystem::injection_psd(NoiseSource source) const {
  return injections[static_cast<int>(source)].psd_a2_hz;
}

SmallSignalSystem SmallSignalSystem::without_source(NoiseSource source) const {
  SmallSignalSystem copy = *this;
  copy.injections[static_cast<int>(source)].psd_a2_hz = 0.0;
  return copy;
}

double SmallSignalSystem::node_signal_gain(Node node) const {
  switch (node) {
    case Node::v_pr: return signal_gain_dc;
    case Node::v_sf: return signal_gain_dc * sf_gain;
    case Node::v_in:
      throw domain_error("v_in has no defined signal gain");
  }
  throw domain_error("bad node");
}

SmallSignalSystem build_system(const OperatingPoint& op, const BiasConfig& bias,
                               const DeviceParams& params) {
  params.validate();
  bias.validate();
  op.validate();

  SmallSignalSystem sys;
  sys.params = params;
  sys.bias = bias;
  sys.op = op;

  Conductances& g = sys.g;
  g.g_s = op.I_pd / params.U_T;
  g.g_mfb = params.kappa_fb * op.I_pd / params.U_T;
  g.g_ma = params.kappa_n * bias.I_pr / params.U_T;
  g.g_oa = bias.I_pr / params.V_A;
  g.g_msf = params.kappa_sf * bias.I_sf / params.U_T;

  sys.G << g.g_s, -g.g_mfb, 0.0,
           g.g_ma, g.g_oa, 0.0,
           0.0, -g.g_msf, g.g_msf;
  sys.C << params.C_in, params.C_out, params.C_sf;

  sys.signal_gain_dc = params.U_T / params.kappa_fb;
  sys.sf_gain = 1.0;

  double s_pd = 4.0 * params.q_e * op.I_pd;   // photodiode 2qI + feedback 2qI
  double s_pr = 4.0 * params.q_e * bias.I_pr; // amplifier input + bias transistor
  double s_sf = 4.0 * params.q_e * bias.I_sf; // follower + bias transistor
  sys.injections = {NoiseInjection{NoiseSource::photodiode, 0, s_pd},
                    NoiseInjection{NoiseSource::amplifier, 1, s_pr},
                    NoiseInjection{NoiseSource::follower, 2, s_sf}};

  Eigen::Vector3cd eig = sys.natural_frequencies();
  for (int i = 0; i < 3; ++i) {
    if (!(eig(i).real() < 0.0)) {
      throw model_error("linearized system is unstable (non-physical parameters)");
    }
  }
  return sys;
}

std::complex<double> transfer_fn(const SmallSignalSystem& sys, NoiseSource source,
                                 Node node, double f_hz) {
  Eigen::Vector3cd rhs = Eigen::Vector3cd::Zero();
  rhs(sys.injections[static_cast<int>(source)].node) = 1.0;
  return solve_injection(sys, f_hz, rhs)(static_cast<int>(node));
}

std::complex<double> transfer_fn(const SmallSignalSystem& sys, SignalSource,
                                 Node node, double f_hz) {
  Eigen::Vector3cd rhs = Eigen::Vector3cd::Zero();
  rhs(0) = -sys.op.I_pd;
  return solve_injection(sys, f_hz, rhs)(static_cast<int>(node));
}

SignalTfClosedForm signal_tf_closed_form(const OperatingPoint& op,
                                         const BiasConfig& bias,
                                         const DeviceParams& params) {
  SmallSignalSystem sys = build_system(op, bias, params);
  const Conductances& g = sys.g;

  // Characteristic polynomial of the 2-node loop: a s^2 + b s + c.
  double a = params.C_in * params.C_out;
  double b = params.C_in * g.g_oa + params.C_out * g.g_s;
  double c = g.g_s * g.g_oa + g.g_ma * g.g_mfb;

  SignalTfClosedForm tf;
  tf.dc_gain = op.I_pd * g.g_ma / c;
  tf.f0_hz = std::sqrt(c / a) / kTwoPi;
  tf.q_factor = std::sqrt(a * c) / b;
  tf.loop_gain = (g.g_ma / g.g_oa) * (g.g_mfb / g.g_s);
  tf.sf_pole_hz = sys.sf_pole_hz();

  double disc = b * b - 4.0 * a * c;
  if (disc >= 0.0) {
    tf.poles_real = true;
    double r = std::sqrt(disc);
    double p_slow = (b - r) / (2.0 * a);  // magnitudes of -Re(s)/2pi
    double p_fast = (b + r) / (2.0 * a);
    tf.pole1_hz = p_slow / kTwoPi;
    tf.pole2_hz = p_fast / kTwoPi;
    tf.pole_ratio = p_fast / std::max(p_slow, 1e-300);
  } else {
    tf.poles_real = false;
    double re = b / (2.0 * a);
    double im = std::sqrt(-disc) / (2.0 * a);
    tf.pole1_hz = std::complex<double>(re, -im) / kTwoPi;
    tf.pole2_hz = std::complex<double>(re, im) / kTwoPi;
    tf.pole_ratio = 1.0;
  }
  return tf;
}

std::complex<double> SignalTfClosedForm::eval(Node node, double f_hz) const {
  if (node == Node::v_in) {
    throw domain_error("closed form describes v_pr and v_sf only");
  }
  double x = f_hz / f0_hz;
  std::complex<double> den(1.0 - x * x, x / q_factor);
  std::complex<double> h = dc_gain / den;
  if (node == Node::v_sf) {
    h /= std::complex<double>(1.0, f_hz / sf_pole_hz);
  }
  return h;
}

double bandwidth_3db(const SmallSignalSystem& sys, Node node) {
  double h0 = std::abs(transfer_fn(sys, SignalSource{}, node, 0.0));
  if (!(h0 > 0.0)) {
    throw domain_error("zero DC gain, 3 dB bandwidth undefined");
  }
  double target = h0 / std::numbers::sqrt2;

  constexpr double kFmin = 1e-3;
  constexpr double kFmax = 1e9;
  constexpr int kPerDecade = 16;

  double log_lo = std::log10(kFmin);
  double log_hi = std::log10(kFmax);
  int n = static_cast<int>((log_hi - log_lo) * kPerDecade) + 1;

  double prev_f = kFmin;
  if (std::abs(transfer_fn(sys, SignalSource{}, node, kFmin)) < target) {
    // Already below target at the bottom of the search range.
    throw dvs::range_error("no 3 dB crossing found in [1e-3, 1e9] Hz");
  }
  for (int i = 1; i <= n; ++i) {
    double f = std::pow(10.0, log_lo + (log_hi - log_lo) * i / n);
    double mag = std::abs(transfer_fn(sys, SignalSource{}, node, f));
    if (mag < target) {
      double lo = prev_f, hi = f;
      for (int it = 0; it < 100; ++it) {
        double mid = std::sqrt(lo * hi);
        double m = std::abs(transfer_fn(sys, SignalSource{}, node, mid));
        (m >= target ? lo : hi) = mid;
      }
      return std::sqrt(lo * hi);
    }
    prev_f = f;
  }
  throw dvs::range_error("no 3 dB crossing found in [1e-3, 1e9] Hz");
}

}  // namespace dvs
