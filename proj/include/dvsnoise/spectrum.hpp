#pragma once

#include <vector>

#include "dvsnoise/small_signal.hpp"

namespace dvs {

inline constexpr int kDefaultPointsPerDecade = 64;

// Strictly increasing positive frequency grid, log-spaced by default.
struct FrequencyGrid {
  std::vector<double> f_hz;

  static FrequencyGrid log_spaced(double f_min, double f_max,
                                  int points_per_decade = kDefaultPointsPerDecade);

  // Default analysis band for a node of the given system.
  //   v_in, v_pr : [slowest pole / 100, 10 x fastest pole]
  //   v_sf       : [slowest pole / 100, 10 x follower pole]
  // The follower pole bounds the band at the output node so that sweep
  // metrics share one band across photoreceptor biases.
  static FrequencyGrid for_node(const SmallSignalSystem& sys, Node node,
                                int points_per_decade = kDefaultPointsPerDecade);

  size_t size() const { return f_hz.size(); }
  void validate() const;
};

// One-sided noise PSD at a node, decomposed by source. Values are V^2/Hz,
// or TC log-e^2/Hz after refer_to_tc(). Exactly half of the photodiode
// column is photon shot noise; the other half is feedback-transistor noise.
struct SpectrumSeries {
  Node node = Node::v_pr;
  FrequencyGrid grid;
  std::vector<double> pd;     // photodiode + feedback transistor
  std::vector<double> pr;     // amplifier + photoreceptor bias transistor
  std::vector<double> sf;     // follower + follower bias transistor
  std::vector<double> total;  // power sum of the above
  bool tc_referred = false;

  void validate() const;
};

// per_source(f) = S_source * |Z_source->node(j 2 pi f)|^2.
SpectrumSeries psd(const SmallSignalSystem& sys, Node node, const FrequencyGrid& grid);

// Square root of the running trapezoidal integral of each PSD column.
struct CumulativeRms {
  Node node = Node::v_pr;
  FrequencyGrid grid;
  std::vector<double> pd, pr, sf, total;  // cumulative RMS curves
  double final_pd = 0, final_pr = 0, final_sf = 0, final_total = 0;
  bool tc_referred = false;
  // Set when halving the grid changes the integral by more than 1e-3
  // relative; the grid is too sparse for the stated quadrature tolerance.
  bool accuracy_warning = false;
};

CumulativeRms cumulative_rms(const SpectrumSeries& spectrum);

// Divides a voltage-referred spectrum by the node's DC signal gain squared.
// Throws domain_error at v_in (no defined signal gain).
SpectrumSeries refer_to_tc(const SpectrumSeries& spectrum, const SmallSignalSystem& sys);
double refer_rms_to_tc(double rms_volts, const SmallSignalSystem& sys, Node node);

// (photon-part integrated power) / (total integrated power); photon part is
// half of the photodiode column.
double photon_fraction(const SpectrumSeries& spectrum);

// (total integrated power) / (photon-part integrated power); approaches 2
// from above as the photoreceptor contribution is filtered out and the
// follower noise vanishes.
double shot_limit_ratio(const SpectrumSeries& spectrum);

// Trapezoidal quadrature in linear f.
double integrate_psd(const FrequencyGrid& grid, const std::vector<double>& psd);

}  // namespace dvs
