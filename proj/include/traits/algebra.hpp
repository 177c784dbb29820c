#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "traits/model.hpp"

namespace traits {

// Pure trait-taxonomy arithmetic: exhaustibility budgets, provisioning
// durations, coalition aggregation and makespan bounds.

struct ExhaustibilityVerdict {
    bool ok = true;
    int trait = -1;
    double excess = 0.0;
};

// A robot's cross-task provisions respect its initial stock: the max rule for
// inexhaustible traits, the sum rule for exhaustible ones.
inline ExhaustibilityVerdict exhaustibility_ok(const Scenario& s, int robot,
                                               const std::map<int, std::vector<double>>& provisions_by_task) {
    const auto& r = s.robots[robot];
    for (int u = 0; u < s.num_traits(); ++u) {
        double used = 0.0;
        for (const auto& [k, x] : provisions_by_task) {
            (void)k;
            if (s.is_et(u))
                used += x[u];
            else
                used = std::max(used, x[u]);
        }
        if (used > r.initial_traits[u] + 1e-12 * std::max(1.0, r.initial_traits[u]))
            return {false, u, used - r.initial_traits[u]};
    }
    return {true, -1, 0.0};
}

// Time one robot needs to apply `x` units of a trait at rate `rate`.
inline double provision_duration(double x, double rate, Provisioning cls) {
    if (cls != Provisioning::GPT) return 0.0;
    if (x <= 0.0) return 0.0;
    if (rate <= 0.0) throw SemanticError("gradual provisioning with zero rate is unprovisionable");
    return x / rate;
}

// Coalition aggregate: weakest member for NCT, team total for CT. An empty
// coalition provides nothing.
inline double aggregate_coalition_trait(const std::vector<double>& values, Cumulativity cum) {
    if (values.empty()) return 0.0;
    if (cum == Cumulativity::NCT) return *std::min_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

// Simultaneous coalition provisioning rate over the slowest member's window.
inline double coalition_rate(double coalition_trait, double d_kuq, Provisioning cls) {
    if (cls != Provisioning::GPT) return 0.0;
    if (coalition_trait <= 0.0) return 0.0;
    return coalition_trait / d_kuq;
}

inline double task_duration(double d_static, double d_provision, double d_intra) {
    return d_static + d_provision + d_intra;
}

struct MakespanBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// C_lb sums static durations; C_ub adds per-task demand-implied provisioning
// spans and a generous travel allowance from the map diameter estimate.
inline MakespanBounds makespan_bounds(const Scenario& s) {
    double lb = 0.0, ub = 0.0;
    double nu_min = std::numeric_limits<double>::infinity();
    for (const auto& r : s.robots) nu_min = std::min(nu_min, r.max_speed);
    if (!(nu_min > 0.0)) throw SemanticError("makespan bounds need a positive minimum robot speed");
    const double l_max = bfs_diameter_estimate(s.map);
    for (const auto& t : s.tasks) {
        lb += t.static_duration;
        double gpt_span = 0.0;  // max over gradual demands; 0 when the task has none
        for (int u = 0; u < s.num_traits(); ++u) {
            if (!s.is_gpt(u) || t.desired_traits[u] <= 0.0) continue;
            if (t.desired_rates[u] <= 0.0)
                throw SemanticError("task '" + t.name + "' has a gradual demand for trait '" +
                                    s.traits[u].name + "' with zero desired rate: unbounded upper bound");
            gpt_span = std::max(gpt_span, t.desired_traits[u] / t.desired_rates[u]);
        }
        ub += t.static_duration + gpt_span + 2.0 * l_max / nu_min;
    }
    return {lb, ub};
}

}  // namespace traits
