#pragma once

#include "dvsnoise/spectrum.hpp"

namespace dvs {

// How to treat spectra that do not roll off faster than 1/f^3 by the top of
// their grid (their second spectral moment diverges without a band limit).
//
//  require_rolloff : throw model_error. Use when the moments must be
//                    band-limit independent, e.g. validating a model fit.
//  grid_bounded    : integrate over the grid as given and flag the result.
//                    The circuit's follower noise ends in a first-order tail,
//                    so the rate pipeline uses this policy with the node's
//                    default analysis band.
enum class RolloffPolicy { require_rolloff, grid_bounded };

// RMS and characteristic frequency of a TC-referred noise spectrum.
// nu0 = sqrt(m2/m0)/(2 pi) with spectral moments m_k = integral (2 pi f)^k S df.
struct NoiseStats {
  double sigma_tc = 0.0;      // sqrt(m0) [TC log-e units]
  double nu0_hz = 0.0;        // characteristic frequency
  double m0 = 0.0;
  double m2 = 0.0;
  double tail_slope = 0.0;    // d log S / d log f over the top half decade
  bool cutoff_limited = false;  // tail slope >= -3: m2 depends on the band edge
};

NoiseStats noise_stats(const SpectrumSeries& tc_spectrum,
                       RolloffPolicy policy = RolloffPolicy::require_rolloff);

}  // namespace dvs
