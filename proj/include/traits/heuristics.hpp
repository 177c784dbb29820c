#pragma once

#include <algorithm>
#include <cmath>

#include "traits/model.hpp"

namespace traits {

// Allocation-quality heuristics guiding the best-first search.

// Normalized trait/rate mismatch blend. A zero demand total drops its term
// and reassigns the weight to the other one, so demand-free dimensions never
// poison the score.
inline double apr(double trait_mismatch, double rate_mismatch, double total_trait_demand,
                  double total_rate_demand, double gamma) {
    const bool has_y = total_trait_demand > 0.0;
    const bool has_yd = total_rate_demand > 0.0;
    if (has_y && has_yd)
        return gamma * trait_mismatch / total_trait_demand +
               (1.0 - gamma) * rate_mismatch / total_rate_demand;
    if (has_y) return trait_mismatch / total_trait_demand;
    if (has_yd) return rate_mismatch / total_rate_demand;
    return 0.0;
}

struct NsqValue {
    double value = 0.0;
    bool clamped_high = false;  // makespan exceeded the upper bound pre-clamp
};

// Normalized schedule quality: position of the makespan between the bounds,
// clamped into [0,1].
inline NsqValue nsq(double makespan, double lower_bound, double upper_bound) {
    if (!(upper_bound > lower_bound))
        throw DegenerateBounds("makespan bounds are degenerate: lower equals upper");
    const double raw = (makespan - lower_bound) / (upper_bound - lower_bound);
    NsqValue out;
    out.clamped_high = raw > 1.0;
    out.value = std::clamp(raw, 0.0, 1.0);
    return out;
}

inline double tetaq(double alpha, double apr_value, double nsq_value) {
    return alpha * apr_value + (1.0 - alpha) * nsq_value;
}

}  // namespace traits
