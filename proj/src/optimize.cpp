#include "dvsnoise/optimize.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace dvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double point_rate(const OperatingPoint& op, BiasConfig bias, double i_pr,
                  const DeviceParams& params) {
  bias.I_pr = i_pr;
  return evaluate_point(op, bias, params).rate_hz;
}

}  // namespace

void OptimizeConstraints::validate() const {
  if (!(min_bandwidth_hz > 0.0)) throw domain_error("min_bandwidth_hz must be positive");
  if (!(max_power_w > 0.0)) throw domain_error("max_power_w must be positive");
  if (!(rate_slack >= 0.0)) throw domain_error("rate_slack must be non-negative");
  if (!(sf_margin >= 1.0)) throw domain_error("sf_margin must be at least 1");
  if (!(i_pr_min > 0.0) || !(i_pr_max > i_pr_min)) {
    throw domain_error("I_pr search range must satisfy 0 < min < max");
  }
  if (!(i_sf_min > 0.0)) throw domain_error("i_sf_min must be positive");
  if (grid_per_decade < 2) throw domain_error("grid_per_decade must be >= 2");
}

const char* to_string(BiasRationale rationale) {
  switch (rationale) {
    case BiasRationale::sf_limited: return "sf-limited";
    case BiasRationale::pr_limited: return "pr-limited";
    case BiasRationale::power_capped: return "power-capped";
  }
  return "?";
}

BiasRecommendation optimize(const OperatingPoint& op,
                            const OptimizeConstraints& constraints,
                            const DeviceParams& params, const BiasConfig& base_bias) {
  constraints.validate();
  params.validate();
  op.validate();

  BiasRecommendation rec;
  auto power_of = [&](double i_pr, double i_sf) {
    return params.V_dd * (i_pr + i_sf + op.I_pd);
  };

  // Step 1: follower pole at min_bandwidth * margin.
  double i_sf = kTwoPi * constraints.min_bandwidth_hz * constraints.sf_margin *
                params.C_sf * params.U_T / params.kappa_sf;
  i_sf = std::max(i_sf, constraints.i_sf_min);

  if (power_of(constraints.i_pr_min, constraints.i_sf_min) > constraints.max_power_w) {
    rec.feasible = false;
    rec.binding_constraint = "max_power";
    rec.i_pr = constraints.i_pr_min;
    rec.i_sf = constraints.i_sf_min;
    return rec;
  }
  if (power_of(constraints.i_pr_min, i_sf) > constraints.max_power_w) {
    // The follower bias needed for the bandwidth already exceeds the cap.
    rec.feasible = false;
    rec.binding_constraint = "max_power";
    rec.i_pr = constraints.i_pr_min;
    rec.i_sf = i_sf;
    return rec;
  }

  std::vector<double> grid = SweepSpec::log_grid(
      constraints.i_pr_min, constraints.i_pr_max, constraints.grid_per_decade);

  BiasConfig bias = base_bias;
  bias.I_sf = i_sf;

  // Step 2: asymptotic reference with the photoreceptor noise ablated, then
  // the smallest I_pr whose prediction is within the slack of it.
  BiasConfig ref_bias = bias;
  ref_bias.I_pr = grid.back();
  rec.asymptotic_rate_hz =
      predict_rates_pr_ablated(op, ref_bias, params).total_rate;
  double accept = rec.asymptotic_rate_hz * (1.0 + constraints.rate_slack);

  double chosen = grid.back();
  for (double i_pr : grid) {
    if (point_rate(op, bias, i_pr, params) <= accept) {
      chosen = i_pr;
      break;
    }
  }
  rec.rationale = BiasRationale::sf_limited;

  // Step 3: power cap backoff.
  if (power_of(chosen, i_sf) > constraints.max_power_w) {
    double capped = constraints.i_pr_min;
    for (double i_pr : grid) {
      if (power_of(i_pr, i_sf) <= constraints.max_power_w) capped = i_pr;
    }
    chosen = capped;
    rec.rationale = BiasRationale::power_capped;
  }

  // Step 4: bandwidth repair. The composite 3 dB point can sit below the
  // follower pole when the photoreceptor pole is nearby, so first walk the
  // follower bias up, then the photoreceptor bias, within the power cap.
  auto composite_bw = [&](double i_pr, double i_sf_val) {
    BiasConfig probe = bias;
    probe.I_pr = i_pr;
    probe.I_sf = i_sf_val;
    return bandwidth_3db(build_system(op, probe, params), Node::v_sf);
  };
  double bw = composite_bw(chosen, i_sf);
  double f_sf_cap = 30.0 * constraints.min_bandwidth_hz;
  while (bw < constraints.min_bandwidth_hz) {
    double i_sf_next = i_sf * 1.2;
    double f_sf = params.kappa_sf * i_sf_next / (kTwoPi * params.U_T * params.C_sf);
    if (f_sf > f_sf_cap || power_of(chosen, i_sf_next) > constraints.max_power_w) break;
    i_sf = i_sf_next;
    bw = composite_bw(chosen, i_sf);
  }
  if (bw < constraints.min_bandwidth_hz) {
    for (double i_pr : grid) {
      if (i_pr <= chosen) continue;
      if (power_of(i_pr, i_sf) > constraints.max_power_w) break;
      double candidate = composite_bw(i_pr, i_sf);
      if (candidate >= constraints.min_bandwidth_hz) {
        chosen = i_pr;
        bw = candidate;
        break;
      }
    }
  }

  if (bw < constraints.min_bandwidth_hz) {
    // The photoreceptor is the binding filter at this operating point.
    rec.rationale = BiasRationale::pr_limited;
    rec.feasible = false;
    rec.binding_constraint = "min_bandwidth";

    // Dark-scene exception: when the photoreceptor cannot even match the
    // slowest follower, running the follower fast buys nothing; pick both
    // biases jointly for minimum rate under the power cap.
    BiasConfig dark = bias;
    dark.I_pr = constraints.i_pr_min;
    double pr_floor_bw = bandwidth_3db(build_system(op, dark, params), Node::v_pr);
    double sf_floor_hz =
        params.kappa_sf * constraints.i_sf_min / (kTwoPi * params.U_T * params.C_sf);
    if (pr_floor_bw < sf_floor_hz) {
      std::vector<double> sf_grid = SweepSpec::log_grid(
          constraints.i_sf_min, std::max(i_sf, constraints.i_sf_min * 10.0),
          constraints.grid_per_decade);
      double best_rate = std::numeric_limits<double>::infinity();
      for (double i_pr : grid) {
        for (double i_sf_try : sf_grid) {
          if (power_of(i_pr, i_sf_try) > constraints.max_power_w) continue;
          BiasConfig b = bias;
          b.I_pr = i_pr;
          b.I_sf = i_sf_try;
          double r = evaluate_point(op, b, params).rate_hz;
          if (r < best_rate) {
            best_rate = r;
            chosen = i_pr;
            i_sf = i_sf_try;
          }
        }
      }
    }
  }

  bias.I_pr = chosen;
  bias.I_sf = i_sf;
  SweepRecord final_point = evaluate_point(op, bias, params);
  rec.i_pr = chosen;
  rec.i_sf = i_sf;
  rec.predicted_rate_hz = final_point.rate_hz;
  rec.predicted_bandwidth_hz = final_point.bandwidth_hz;
  rec.predicted_power_w = final_point.power_w;

  if (rec.feasible) {
    if (rec.predicted_bandwidth_hz < constraints.min_bandwidth_hz) {
      rec.feasible = false;
      rec.binding_constraint = "min_bandwidth";
    } else if (rec.predicted_power_w > constraints.max_power_w) {
      rec.feasible = false;
      rec.binding_constraint = "max_power";
    }
  }
  return rec;
}

}  // namespace dvs
