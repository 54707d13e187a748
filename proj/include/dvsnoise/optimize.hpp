#pragma once

#include "dvsnoise/sweep.hpp"

namespace dvs {

struct OptimizeConstraints {
  double min_bandwidth_hz = 0.0;  // required signal bandwidth at v_sf
  double max_power_w = 0.0;       // bias power cap, V_dd * sum of currents
  double rate_slack = 0.10;       // accepted excess over the asymptotic rate
  double sf_margin = 1.2;         // follower pole = min_bandwidth * margin
  double i_pr_min = 1e-12;        // search grid [A]
  double i_pr_max = 10e-9;
  double i_sf_min = 1e-12;        // practical floor of the follower bias
  int grid_per_decade = 12;

  void validate() const;
};

enum class BiasRationale { sf_limited, pr_limited, power_capped };

const char* to_string(BiasRationale rationale);

struct BiasRecommendation {
  double i_pr = 0.0;
  double i_sf = 0.0;
  double predicted_rate_hz = 0.0;
  double predicted_bandwidth_hz = 0.0;
  double predicted_power_w = 0.0;
  double asymptotic_rate_hz = 0.0;  // photoreceptor-noise-ablated reference
  BiasRationale rationale = BiasRationale::sf_limited;
  bool feasible = true;
  std::string binding_constraint;   // set when infeasible
};

// Constrained bias selection:
//  1. I_sf so that the follower pole sits at min_bandwidth * sf_margin.
//  2. Smallest I_pr on a log grid whose predicted rate is within rate_slack
//     of the asymptotic (photoreceptor-noise-ablated) rate.
//  3. Power cap violations back I_pr off and mark the result power-capped.
//  4. If the photoreceptor cannot reach the follower bandwidth even at the
//     top of the search grid (dark scene), the result is marked pr-limited
//     and both biases are chosen jointly for minimum rate.
BiasRecommendation optimize(const OperatingPoint& op,
                            const OptimizeConstraints& constraints,
                            const DeviceParams& params,
                            const BiasConfig& base_bias = BiasConfig::nominal());

}  // namespace dvs
