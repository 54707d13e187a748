#include "dvsnoise/timesim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dvsnoise/event_rate.hpp"

namespace dvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Deterministic normal/Poisson draws on top of mt19937_64. The standard
// distributions are implementation-defined, which would break the
// bit-reproducibility contract across standard libraries.
class NoiseRng {
 public:
  explicit NoiseRng(std::uint64_t seed) : engine_(seed ^ 0x9e3779b97f4a7c15ull) {}

  double uniform() {
    // 53-bit mantissa in (0, 1].
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Knuth multiplication below lambda = 32, Gaussian approximation above
  // (adequate for photon counts at the rates where the mode is used).
  double centered_poisson(double lambda) {
    if (lambda <= 0.0) return 0.0;
    if (lambda < 32.0) {
      double l = std::exp(-lambda);
      int k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= uniform();
      } while (p > l);
      return static_cast<double>(k - 1) - lambda;
    }
    double n = std::round(lambda + std::sqrt(lambda) * normal());
    return std::max(n, 0.0) - lambda;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

double interp_stimulus(const std::vector<StimulusPoint>& stim, double t) {
  if (stim.empty()) return 0.0;
  if (t <= stim.front().t) return stim.front().log_e;
  if (t >= stim.back().t) return stim.back().log_e;
  auto it = std::upper_bound(stim.begin(), stim.end(), t,
                             [](double v, const StimulusPoint& p) { return v < p.t; });
  const StimulusPoint& hi = *it;
  const StimulusPoint& lo = *(it - 1);
  double w = (t - lo.t) / (hi.t - lo.t);
  return lo.log_e + w * (hi.log_e - lo.log_e);
}

struct Welford {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
};

// In-place iterative radix-2 FFT; n must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -kTwoPi / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace

DriveMode parse_drive_mode(const std::string& name) {
  if (name == "gaussian-white") return DriveMode::gaussian_white;
  if (name == "poisson-photon") return DriveMode::poisson_photon;
  throw config_error("unknown drive_mode '" + name +
                     "' (expected gaussian-white or poisson-photon)");
}

const char* to_string(DriveMode mode) {
  return mode == DriveMode::gaussian_white ? "gaussian-white" : "poisson-photon";
}

SimResult simulate(const SmallSignalSystem& sys, const SimConfig& cfg) {
  Eigen::Vector3cd eig = sys.natural_frequencies();
  double w_max = eig.cwiseAbs().maxCoeff();
  double w_min = eig.cwiseAbs().minCoeff();
  double tau_min = 1.0 / w_max;

  double dt = cfg.dt;
  if (dt == 0.0) {
    dt = tau_min / 12.0;
  } else if (!(dt > 0.0)) {
    throw precondition_error("dt must be positive");
  } else if (dt > tau_min / 10.0 * (1.0 + 1e-12)) {
    throw precondition_error("dt too coarse: must be at most min time constant / 10 = " +
                             std::to_string(tau_min / 10.0) + " s");
  }
  if (!(cfg.duration >= dt)) {
    throw precondition_error("duration must be at least one step");
  }
  if (cfg.trace_decimate < 1) {
    throw precondition_error("trace_decimate must be >= 1");
  }

  double warmup = cfg.warmup >= 0.0 ? cfg.warmup : 5.0 / w_min;
  std::size_t n_warm = static_cast<std::size_t>(std::ceil(warmup / dt));
  std::size_t n_rec = static_cast<std::size_t>(std::llround(cfg.duration / dt));

  // Exact propagation of x' = A x + C^-1 i(t) for step-wise constant i:
  // x+ = Phi x + Gamma i, Phi = exp(A dt), Gamma = A^-1 (Phi - I) C^-1.
  Eigen::Matrix3d cinv = sys.C.cwiseInverse().asDiagonal();
  Eigen::Matrix3d a = -(cinv * sys.G);
  Eigen::Matrix3d phi = (a * dt).exp();
  Eigen::Matrix3d gamma =
      a.partialPivLu().solve((phi - Eigen::Matrix3d::Identity()) * cinv);

  const double q = sys.params.q_e;
  const double i_pd = sys.op.I_pd;
  const bool poisson = cfg.drive_mode == DriveMode::poisson_photon;

  // Held-current standard deviations per step, sqrt(S / (2 dt)).
  double s_pd = sys.injection_psd(NoiseSource::photodiode);
  double s_pr = sys.injection_psd(NoiseSource::amplifier);
  double s_sf = sys.injection_psd(NoiseSource::follower);
  // In poisson-photon mode the photon half of the photodiode source becomes
  // discrete arrivals; the feedback-transistor half stays Gaussian.
  double sd_pd = std::sqrt((poisson ? 0.5 * s_pd : s_pd) / (2.0 * dt));
  double sd_pr = std::sqrt(s_pr / (2.0 * dt));
  double sd_sf = std::sqrt(s_sf / (2.0 * dt));
  double photon_rate = s_pd > 0.0 ? i_pd / q : 0.0;  // ablating pd disables arrivals

  // The comparator sees the pixel's actual DC signal path, including the
  // finite loop gain, so a static log-e step of k*theta trips k thresholds.
  double tc_gain = std::abs(transfer_fn(sys, SignalSource{}, Node::v_sf, 0.0));
  double leak_hz = leak_rate(sys.params, sys.bias, sys);
  double leak_ramp = leak_hz * sys.bias.theta_on;  // [log-e / s]
  const double theta_on = sys.bias.theta_on;
  const double theta_off = sys.bias.theta_off;
  const double refr = sys.bias.delta_refr;
  // Comparator resolution: crossings within 1e-9 of a threshold count.
  const double on_trip = theta_on * (1.0 - 1e-9);
  const double off_trip = theta_off * (1.0 - 1e-9);

  NoiseRng rng(cfg.seed);
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Eigen::Vector3d drive = Eigen::Vector3d::Zero();

  SimResult result;
  result.summary.dt = dt;
  result.summary.warmup = static_cast<double>(n_warm) * dt;
  result.summary.duration = static_cast<double>(n_rec) * dt;
  result.summary.seed = cfg.seed;
  result.summary.n_steps = n_rec;
  if (cfg.record_traces) {
    result.traces.dt = dt * cfg.trace_decimate;
    result.traces.v_pr.reserve(n_rec / cfg.trace_decimate + 1);
    result.traces.v_sf.reserve(n_rec / cfg.trace_decimate + 1);
  }

  Welford stat_pr, stat_sf;
  double mem = 0.0;
  double u_prev = 0.0;
  double t_release = -1.0;      // refractory hold until this time
  double t_leak_anchor = 0.0;   // last event time, for leak attribution
  std::size_t n_on = 0, n_off = 0, n_leak = 0;
  bool eventing = false;

  const std::size_t n_total = n_warm + n_rec;
  for (std::size_t k = 0; k < n_total; ++k) {
    double t_abs = static_cast<double>(k) * dt;
    double t_rec = t_abs - result.summary.warmup;  // time within recorded window

    // Held input currents over [t, t+dt).
    double i_noise_pd = sd_pd > 0.0 ? sd_pd * rng.normal() : 0.0;
    double i_noise_pr = sd_pr > 0.0 ? sd_pr * rng.normal() : 0.0;
    double i_noise_sf = sd_sf > 0.0 ? sd_sf * rng.normal() : 0.0;
    double i_signal =
        cfg.stimulus.empty() ? 0.0 : -i_pd * interp_stimulus(cfg.stimulus, t_rec);
    drive(0) = i_noise_pd + i_signal;
    drive(1) = i_noise_pr;
    drive(2) = i_noise_sf;

    if (poisson && photon_rate > 0.0) {
      // Each arrival removes charge q from the photodiode node.
      double centered = rng.centered_poisson(photon_rate * dt);
      x(0) -= centered * q / sys.C(0);
    }
    x = phi * x + gamma * drive;

    if ((k & 0xffff) == 0 && !x.allFinite()) {
      throw numerical_error("non-finite state at t = " + std::to_string(t_abs) + " s");
    }
    if (k < n_warm) continue;

    double v_pr_now = x(1);
    double v_sf_now = x(2);
    stat_pr.add(v_pr_now);
    stat_sf.add(v_sf_now);
    if (cfg.record_traces &&
        ((k - n_warm) % static_cast<std::size_t>(cfg.trace_decimate)) == 0) {
      result.traces.v_pr.push_back(v_pr_now);
      result.traces.v_sf.push_back(v_sf_now);
    }

    double t_now = t_rec + dt;  // state applies at the end of the step
    double u = v_sf_now / tc_gain + leak_ramp * t_now;
    if (!eventing) {
      mem = u;  // change amp balances at the first recorded sample
      u_prev = u;
      eventing = true;
      t_leak_anchor = t_now;
      continue;
    }
    if (t_now < t_release) {
      u_prev = u;
      continue;
    }

    // Crossing instants are linearly interpolated between samples; the
    // memorized level then moves by exactly one threshold, which equals the
    // interpolated level at the crossing.
    if (u - mem >= on_trip) {
      double level = mem + theta_on;
      double frac = (u_prev < level && u > u_prev) ? (level - u_prev) / (u - u_prev)
                                                   : 1.0;
      frac = std::clamp(frac, 0.0, 1.0);
      double t_event = std::max(t_now - dt + frac * dt, t_release);
      bool is_leak = leak_ramp * (t_event - t_leak_anchor) >= 0.5 * theta_on;
      result.events.push_back({t_event, is_leak ? 2 : 1});
      if (is_leak) ++n_leak; else ++n_on;
      mem += theta_on;
      t_release = t_event + refr;
      t_leak_anchor = t_event;
    } else if (mem - u >= off_trip) {
      double level = mem - theta_off;
      double frac = (u_prev > level && u < u_prev) ? (u_prev - level) / (u_prev - u)
                                                   : 1.0;
      frac = std::clamp(frac, 0.0, 1.0);
      double t_event = std::max(t_now - dt + frac * dt, t_release);
      result.events.push_back({t_event, -1});
      ++n_off;
      mem -= theta_off;
      t_release = t_event + refr;
      t_leak_anchor = t_event;
    }
    u_prev = u;
  }

  double dur = result.summary.duration;
  result.summary.mean_v_pr = stat_pr.mean;
  result.summary.var_v_pr = stat_pr.variance();
  result.summary.mean_v_sf = stat_sf.mean;
  result.summary.var_v_sf = stat_sf.variance();
  result.summary.on_rate = n_on / dur;
  result.summary.off_rate = n_off / dur;
  result.summary.leak_event_rate = n_leak / dur;
  result.summary.total_rate = (n_on + n_off) / dur;
  return result;
}

SpectrumSeries empirical_psd(const std::vector<double>& trace, double dt, Node node) {
  if (!(dt > 0.0)) throw domain_error("dt must be positive");
  const std::size_t n = trace.size();
  if (n < 4096) {
    throw accuracy_error("trace too short for a PSD estimate (need >= 4096 samples)");
  }

  std::size_t nseg = 256;
  while (nseg * 4 <= n && nseg < (1u << 16)) nseg <<= 1;
  const std::size_t hop = nseg / 2;
  const double fs = 1.0 / dt;

  std::vector<double> window(nseg);
  double u = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) /
                                      static_cast<double>(nseg - 1)));
    u += window[i] * window[i];
  }

  const std::size_t n_bins = nseg / 2 + 1;
  std::vector<double> acc(n_bins, 0.0);
  std::vector<std::complex<double>> buf(nseg);
  std::size_t n_segments = 0;
  for (std::size_t start = 0; start + nseg <= n; start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) mean += trace[start + i];
    mean /= static_cast<double>(nseg);
    for (std::size_t i = 0; i < nseg; ++i) {
      buf[i] = (trace[start + i] - mean) * window[i];
    }
    fft_pow2(buf);
    for (std::size_t k = 0; k < n_bins; ++k) {
      acc[k] += std::norm(buf[k]);
    }
    ++n_segments;
  }

  SpectrumSeries out;
  out.node = node;
  out.grid.f_hz.resize(n_bins - 1);
  out.total.resize(n_bins - 1);
  double scale = 1.0 / (fs * u * static_cast<double>(n_segments));
  for (std::size_t k = 1; k < n_bins; ++k) {
    double one_sided = (k + 1 == n_bins) ? 1.0 : 2.0;  // Nyquist bin not doubled
    out.grid.f_hz[k - 1] = static_cast<double>(k) * fs / static_cast<double>(nseg);
    out.total[k - 1] = one_sided * acc[k] * scale;
  }
  out.pd.assign(n_bins - 1, 0.0);
  out.pr.assign(n_bins - 1, 0.0);
  out.sf.assign(n_bins - 1, 0.0);
  return out;
}

}  // namespace dvs
