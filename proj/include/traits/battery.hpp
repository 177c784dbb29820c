#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "traits/model.hpp"
#include "traits/router.hpp"

namespace traits {

// Battery current / energy model and velocity optimization.

struct CRatingViolation : Error {
    CRatingViolation(const std::string& msg, double excess) : Error(msg), excess(excess) {}
    double excess;
};

// Current drawn to hold `x` units of a trait while provisioning at `rate`.
inline double trait_current(double x, double rate, double value_coeff, double rate_coeff) {
    return value_coeff * x + rate_coeff * rate;
}

// Total trait draw of one robot for one task (excluding idle and motion terms).
inline double trait_draw(const Robot& r, const std::vector<double>& provisions,
                         const std::vector<double>& rates) {
    double draw = 0.0;
    for (size_t u = 0; u < provisions.size(); ++u)
        draw += trait_current(provisions[u], rates[u], r.trait_current_coeffs[u],
                              r.rate_current_coeffs[u]);
    return draw;
}

// Average current while executing a task (Peukert input). Throws when the
// C-rating limit is exceeded.
inline double task_current(const Robot& r, const std::vector<double>& provisions,
                           const std::vector<double>& rates, double intra_speed) {
    const double current =
        r.idle_current + r.velocity_current_coeff * intra_speed + trait_draw(r, provisions, rates);
    if (current > r.max_current + 1e-9 * std::max(1.0, r.max_current))
        throw CRatingViolation("task current " + std::to_string(current) + " A exceeds C-rating limit " +
                                   std::to_string(r.max_current) + " A",
                               current - r.max_current);
    return current;
}

inline double task_energy(double voltage, double current, double peukert, double duration) {
    return voltage * std::pow(current, peukert) * duration;
}

// Fastest uniform intra-task speed the coalition can sustain without anyone
// exceeding their C-rating; `draws` holds each member's trait draw.
inline double intra_velocity(const Scenario& s, const std::vector<int>& coalition,
                             const std::vector<double>& draws) {
    double v = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < coalition.size(); ++i) {
        const Robot& r = s.robots[coalition[i]];
        const double headroom = r.max_current - r.idle_current - draws[i];
        double vi;
        if (r.velocity_current_coeff <= 0.0)
            vi = headroom < 0.0 ? 0.0 : r.max_speed;
        else
            vi = std::min(r.max_speed, std::max(0.0, headroom / r.velocity_current_coeff));
        v = std::min(v, vi);
    }
    return std::isfinite(v) ? v : 0.0;
}

// Transition-distance overestimate: out-and-back legs between the robot's
// start cell and every assigned task.
inline double inter_length_estimate(const Scenario& s, int robot, const std::vector<int>& tasks,
                                    const Router& router) {
    const Robot& r = s.robots[robot];
    double total = 0.0;
    for (int k : tasks) {
        try {
            total += router.path_length(r.initial_position, s.tasks[k].start_position, r.bounding_radius);
            total += router.path_length(s.tasks[k].end_position, r.initial_position, r.bounding_radius);
        } catch (const RoutingError& e) {
            throw RoutingError("task '" + s.tasks[k].name + "' unreachable for robot '" + r.name +
                               "': " + e.what());
        }
    }
    return total;
}

// Energy to cover `length` meters at speed v.
inline double transit_energy(const Robot& r, double length, double v) {
    if (length <= 0.0) return 0.0;
    return r.voltage * std::pow(r.idle_current + r.velocity_current_coeff * v, r.peukert_exponent) *
           (length / v);
}

// Idle drain over a wait of `duration` seconds.
inline double idle_energy(const Robot& r, double duration) {
    if (duration <= 0.0) return 0.0;
    return r.voltage * std::pow(r.idle_current, r.peukert_exponent) * duration;
}

namespace detail {

// Speed minimizing per-meter transit cost g(v) = (I_idle + c_v v)^p / v.
// Returns +inf when g is nonincreasing over (0, v_max] (cheapest at v_max).
inline double transit_cost_minimizer(const Robot& r) {
    if (r.velocity_current_coeff <= 0.0 || r.peukert_exponent <= 1.0)
        return std::numeric_limits<double>::infinity();
    return r.idle_current / ((r.peukert_exponent - 1.0) * r.velocity_current_coeff);
}

}  // namespace detail

// Cheapest possible energy to cover `length` meters at any legal speed.
inline double min_transit_energy(const Robot& r, double length) {
    if (length <= 0.0) return 0.0;
    const double vstar = detail::transit_cost_minimizer(r);
    if (vstar >= r.max_speed) return transit_energy(r, length, r.max_speed);
    if (vstar > 0.0) return transit_energy(r, length, vstar);
    // I_idle = 0 with superlinear drain: cost vanishes as v -> 0+
    return 0.0;
}

// Largest inter-task speed in (0, v_max] whose transit cost fits the budget.
// The cost curve falls then rises with speed; after checking v_max the search
// bisects the rising segment. Tolerance 1e-6 m/s, 200 iterations.
inline double max_inter_velocity(const Robot& r, double length, double budget) {
    if (length <= 0.0) return r.max_speed;
    if (transit_energy(r, length, r.max_speed) <= budget) return r.max_speed;
    double lo = std::min(detail::transit_cost_minimizer(r), r.max_speed);
    if (!(lo > 0.0)) lo = 1e-12 * r.max_speed;
    if (transit_energy(r, length, lo) > budget)
        throw BatteryInfeasible("no transition speed fits the remaining battery budget for robot '" +
                                r.name + "'");
    double hi = r.max_speed;
    for (int it = 0; it < 200 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (transit_energy(r, length, mid) <= budget)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace traits
