#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "traits/errors.hpp"
#include "traits/gridmap.hpp"

namespace traits {

// ---------------------------------------------------------------------------
// Trait taxonomy

enum class Exhaustibility { IET, ET };
enum class Provisioning { NPT, IPT, GPT };
enum class ValueKind { Continuous, Discrete, Binary };
enum class Cumulativity { NCT, CT };
enum class Endpoint { Start, Finish };

inline const char* to_string(Exhaustibility e) { return e == Exhaustibility::IET ? "IET" : "ET"; }
inline const char* to_string(Provisioning p) {
    switch (p) {
        case Provisioning::NPT: return "NPT";
        case Provisioning::IPT: return "IPT";
        default: return "GPT";
    }
}
inline const char* to_string(ValueKind v) {
    switch (v) {
        case ValueKind::Continuous: return "continuous";
        case ValueKind::Discrete: return "discrete";
        default: return "binary";
    }
}
inline const char* to_string(Cumulativity c) { return c == Cumulativity::NCT ? "NCT" : "CT"; }
inline const char* to_string(Endpoint e) { return e == Endpoint::Start ? "start" : "finish"; }

struct TraitDef {
    int index = 0;
    std::string name;
    std::string unit;  // free-form, no semantic enforcement
    Exhaustibility exhaustibility = Exhaustibility::IET;
    Provisioning provisioning = Provisioning::NPT;
    ValueKind value_kind = ValueKind::Continuous;
};

// ---------------------------------------------------------------------------
// Robots and tasks

struct Robot {
    std::string name;
    std::vector<double> initial_traits;       // stock per trait
    std::vector<double> max_rates;            // units/s, 0 for non-GPT traits
    double battery_capacity = 0.0;            // J
    double voltage = 0.0;                     // V
    double idle_current = 0.0;                // A
    double max_current = 0.0;                 // A, from the C-rating
    double peukert_exponent = 1.0;
    double max_speed = 0.0;                   // m/s
    double velocity_current_coeff = 0.0;      // A*s/m
    std::vector<double> trait_current_coeffs; // A per trait unit
    std::vector<double> rate_current_coeffs;  // A per trait-unit/s
    double bounding_radius = 0.0;             // m
    Cell initial_position{0, 0};
};

struct Task {
    std::string name;
    std::vector<double> desired_traits;       // minimum trait quantities
    std::vector<double> desired_rates;        // minimum provisioning rates
    std::vector<Cumulativity> cumulativity;   // per trait
    double static_duration = 0.0;             // s
    Cell start_position{0, 0};
    Cell end_position{0, 0};
};

struct AbsoluteDeadline {
    int task = 0;
    Endpoint endpoint = Endpoint::Finish;
    double bound = 0.0;
};

struct RelativeDeadline {
    int first_task = 0;
    Endpoint first_endpoint = Endpoint::Start;
    int second_task = 0;
    Endpoint second_endpoint = Endpoint::Finish;
    double bound = 0.0;
};

struct TemporalConstraints {
    std::vector<std::pair<int, int>> precedence;   // (i, j): i finishes before j starts
    std::vector<std::pair<int, int>> mutex_pairs;  // unordered, stored i < j
    std::vector<AbsoluteDeadline> absolute_deadlines;
    std::vector<RelativeDeadline> relative_deadlines;
};

struct Scenario {
    std::vector<TraitDef> traits;
    std::vector<Robot> robots;
    std::vector<Task> tasks;
    TemporalConstraints temporal;
    GridMap map;
    double alpha = 0.5;
    double gamma = 0.5;
    double timeout_s = 300.0;

    int num_traits() const { return static_cast<int>(traits.size()); }
    int num_robots() const { return static_cast<int>(robots.size()); }
    int num_tasks() const { return static_cast<int>(tasks.size()); }

    bool is_gpt(int u) const { return traits[u].provisioning == Provisioning::GPT; }
    bool is_et(int u) const { return traits[u].exhaustibility == Exhaustibility::ET; }
};

// ---------------------------------------------------------------------------
// Allocation: binary K x N assignment matrix

class Allocation {
public:
    Allocation() = default;
    Allocation(int num_tasks, int num_robots)
        : k_(num_tasks), n_(num_robots), bits_(static_cast<size_t>(num_tasks) * num_robots, 0) {}

    int num_tasks() const { return k_; }
    int num_robots() const { return n_; }

    bool at(int k, int n) const { return bits_[static_cast<size_t>(k) * n_ + n] != 0; }
    void set(int k, int n, bool v) { bits_[static_cast<size_t>(k) * n_ + n] = v ? 1 : 0; }

    // robots allocated to task k
    std::vector<int> coalition(int k) const {
        std::vector<int> out;
        for (int n = 0; n < n_; ++n)
            if (at(k, n)) out.push_back(n);
        return out;
    }

    // tasks allocated to robot n
    std::vector<int> tasks_of(int n) const {
        std::vector<int> out;
        for (int k = 0; k < k_; ++k)
            if (at(k, n)) out.push_back(k);
        return out;
    }

    int count() const {
        int c = 0;
        for (auto b : bits_) c += b;
        return c;
    }

    // bitmap key for visited sets
    std::string key() const { return std::string(bits_.begin(), bits_.end()); }

    bool operator==(const Allocation& o) const {
        return k_ == o.k_ && n_ == o.n_ && bits_ == o.bits_;
    }

private:
    int k_ = 0, n_ = 0;
    std::vector<uint8_t> bits_;
};

// ---------------------------------------------------------------------------
// Plan, schedule and solution payloads

struct EnergyLedger {
    double task_energy = 0.0;       // J spent executing assigned tasks
    double inter_energy = 0.0;      // J reserved for transitions + idle drain
    double total = 0.0;             // task_energy + inter_energy
    double inter_velocity = 0.0;    // m/s
    double est_inter_length = 0.0;  // m, transition-distance overestimate
};

struct ProvisionPlan {
    // provisions[k][n][u], rates[k][n][u]
    std::vector<std::vector<std::vector<double>>> provisions;
    std::vector<std::vector<std::vector<double>>> rates;
    std::vector<std::vector<double>> coalition_traits;  // [k][u]
    std::vector<std::vector<double>> coalition_rates;   // [k][u]
    std::vector<std::vector<double>> trait_durations;   // [k][u], longest per-robot provisioning time
    std::vector<double> provisioning_durations;         // [k], max over traits
    std::vector<double> intra_speeds;                   // [k], m/s
    std::vector<double> intra_durations;                // [k], s
    std::vector<double> task_durations;                 // [k], s
    std::vector<double> inter_velocities;               // [n], m/s
    std::vector<EnergyLedger> energy;                   // [n]
    std::vector<std::vector<double>> trait_shortfall;   // [k][u]
    std::vector<std::vector<double>> rate_shortfall;    // [k][u]
    double trait_mismatch = 0.0;                        // sum of trait shortfalls
    double rate_mismatch = 0.0;                         // sum of rate shortfalls
};

struct MutexOrientation {
    int i = 0, j = 0;
    bool i_before_j = true;
};

struct Schedule {
    bool feasible = false;
    std::vector<double> start;
    std::vector<double> finish;
    double makespan = 0.0;
    std::vector<MutexOrientation> orientations;
    std::vector<std::string> conflict;  // minimal conflicting subset on infeasibility
};

struct PathSegment {
    enum class Kind { Initial, Inter, Intra };
    Kind kind = Kind::Initial;
    int task = -1;  // destination task
    Cell from{0, 0}, to{0, 0};
    double length = 0.0;  // m
    double speed = 0.0;   // m/s
    std::vector<Cell> cells;
};

struct TraceEntry {
    long expanded = 0;
    double apr = 0.0, nsq = 0.0, tetaq = 0.0;
};

struct Solution {
    Allocation allocation;
    ProvisionPlan plan;
    Schedule schedule;
    std::vector<std::vector<PathSegment>> paths;  // per robot, chronological
    std::vector<std::pair<int, int>> auto_mutex_pairs;
    std::vector<TraceEntry> trace;
    long expansions = 0;
    double runtime_s = 0.0;
};

struct ViolationReport {
    bool plan_feasible = false;
    double task_trait_insufficiency = 0.0;
    double rate_insufficiency = 0.0;
    double under_resourced_robots = 0.0;
    double c_rating_violations = 0.0;
    double battery_violations = 0.0;
    double deadline_violations = 0.0;

    std::vector<double> as_fractions() const {
        return {task_trait_insufficiency, rate_insufficiency,   under_resourced_robots,
                c_rating_violations,      battery_violations,   deadline_violations};
    }
};

// ---------------------------------------------------------------------------
// Structural validation (scenario invariants)

inline void validate_temporal(const TemporalConstraints& tc, int num_tasks);

inline void validate_scenario(const Scenario& s) {
    const int nu = s.num_traits();
    const int nn = s.num_robots();
    const int nk = s.num_tasks();
    if (nu < 1) throw SemanticError("scenario needs at least one trait");
    if (nn < 1) throw SemanticError("scenario needs at least one robot");
    if (nk < 1) throw SemanticError("scenario needs at least one task");
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw SemanticError("alpha must lie in (0,1)");
    if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw SemanticError("gamma must lie in (0,1)");
    if (!(s.timeout_s > 0.0)) throw SemanticError("timeout must be positive");

    for (int u = 0; u < nu; ++u) {
        const auto& t = s.traits[u];
        if (t.index != u) throw SemanticError("trait '" + t.name + "': index does not match position");
        if (t.value_kind == ValueKind::Binary && t.provisioning == Provisioning::GPT)
            throw SemanticError("trait '" + t.name + "': binary traits cannot be gradually provisioned");
    }

    auto check_vec = [&](const std::vector<double>& v, const std::string& who, const char* what) {
        if (static_cast<int>(v.size()) != nu)
            throw SemanticError(who + ": " + what + " must have one entry per trait");
        for (double x : v)
            if (!(x >= 0.0) || !std::isfinite(x))
                throw SemanticError(who + ": " + what + " entries must be finite and nonnegative");
    };

    for (const auto& r : s.robots) {
        const std::string who = "robot '" + r.name + "'";
        check_vec(r.initial_traits, who, "initial_traits");
        check_vec(r.max_rates, who, "max_rates");
        check_vec(r.trait_current_coeffs, who, "trait_current_coeffs");
        check_vec(r.rate_current_coeffs, who, "rate_current_coeffs");
        if (!(r.peukert_exponent >= 1.0 && r.peukert_exponent <= 2.0))
            throw SemanticError(who + ": peukert_exponent must lie in [1,2]");
        if (!(r.battery_capacity > 0.0)) throw SemanticError(who + ": battery_capacity must be positive");
        if (!(r.voltage > 0.0)) throw SemanticError(who + ": voltage must be positive");
        if (!(r.max_speed > 0.0)) throw SemanticError(who + ": max_speed must be positive");
        if (!(r.idle_current >= 0.0)) throw SemanticError(who + ": idle_current must be nonnegative");
        if (!(r.max_current > r.idle_current))
            throw SemanticError(who + ": max_current must exceed idle_current");
        if (!(r.velocity_current_coeff >= 0.0))
            throw SemanticError(who + ": velocity_current_coeff must be nonnegative");
        if (!(r.bounding_radius >= 0.0)) throw SemanticError(who + ": bounding_radius must be nonnegative");
        for (int u = 0; u < nu; ++u)
            if (s.traits[u].provisioning != Provisioning::GPT && r.max_rates[u] != 0.0)
                throw SemanticError(who + ": max_rates[" + s.traits[u].name +
                                    "] must be zero for a non-GPT trait");
        if (!s.map.in_bounds(r.initial_position))
            throw SemanticError(who + ": initial_position lies outside the map");
        if (s.map.occupied(r.initial_position))
            throw SemanticError(who + ": initial_position is an occupied cell");
    }

    for (const auto& t : s.tasks) {
        const std::string who = "task '" + t.name + "'";
        check_vec(t.desired_traits, who, "desired_traits");
        check_vec(t.desired_rates, who, "desired_rates");
        if (static_cast<int>(t.cumulativity.size()) != nu)
            throw SemanticError(who + ": cumulativity must have one entry per trait");
        if (!(t.static_duration >= 0.0)) throw SemanticError(who + ": static_duration must be nonnegative");
        for (int u = 0; u < nu; ++u)
            if (s.traits[u].provisioning != Provisioning::GPT && t.desired_rates[u] != 0.0)
                throw SemanticError(who + ": desired_rates[" + s.traits[u].name +
                                    "] must be zero for a non-GPT trait");
        if (!s.map.in_bounds(t.start_position) || !s.map.in_bounds(t.end_position))
            throw SemanticError(who + ": task positions must lie inside the map");
        if (s.map.occupied(t.start_position) || s.map.occupied(t.end_position))
            throw SemanticError(who + ": task positions must be free cells");
    }

    validate_temporal(s.temporal, nk);
}

inline void validate_temporal(const TemporalConstraints& tc, int num_tasks) {
    auto check_task = [&](int k, const char* where) {
        if (k < 0 || k >= num_tasks)
            throw SemanticError(std::string(where) + ": task index out of range");
    };
    std::vector<std::vector<int>> adj(num_tasks);
    for (auto [i, j] : tc.precedence) {
        check_task(i, "precedence");
        check_task(j, "precedence");
        if (i == j) throw SemanticError("precedence: task cannot precede itself");
        adj[i].push_back(j);
    }
    // acyclicity of P
    std::vector<int> state(num_tasks, 0);
    std::vector<int> stack;
    for (int root = 0; root < num_tasks; ++root) {
        if (state[root]) continue;
        stack.push_back(root);
        while (!stack.empty()) {
            int v = stack.back();
            if (state[v] == 0) {
                state[v] = 1;
                for (int w : adj[v]) {
                    if (state[w] == 1) throw SemanticError("precedence constraints contain a cycle");
                    if (state[w] == 0) stack.push_back(w);
                }
            } else {
                state[v] = 2;
                stack.pop_back();
            }
        }
    }
    auto canon = [](std::pair<int, int> p) {
        return p.first < p.second ? p : std::make_pair(p.second, p.first);
    };
    for (auto m : tc.mutex_pairs) {
        check_task(m.first, "mutex");
        check_task(m.second, "mutex");
        if (m.first == m.second) throw SemanticError("mutex: task cannot exclude itself");
        for (auto p : tc.precedence)
            if (canon(p) == canon(m))
                throw SemanticError("precedence/mutex overlap: tasks " + std::to_string(m.first) +
                                    " and " + std::to_string(m.second));
    }
    for (const auto& d : tc.absolute_deadlines) {
        check_task(d.task, "absolute_deadline");
        if (!(d.bound >= 0.0)) throw SemanticError("absolute_deadline: bound must be nonnegative");
    }
    for (const auto& d : tc.relative_deadlines) {
        check_task(d.first_task, "relative_deadline");
        check_task(d.second_task, "relative_deadline");
        if (!(d.bound >= 0.0)) throw SemanticError("relative_deadline: bound must be nonnegative");
        bool in_p = false;
        for (auto [i, j] : tc.precedence)
            if (i == d.first_task && j == d.second_task) in_p = true;
        if (!in_p)
            throw SemanticError("relative_deadline: tasks " + std::to_string(d.first_task) + " and " +
                                std::to_string(d.second_task) + " are not ordered by a precedence constraint");
    }
}

// ---------------------------------------------------------------------------
// Collective-sufficiency feasibility precheck (necessary condition only)

struct PrecheckResult {
    bool feasible = true;
    std::string reason;
};

inline PrecheckResult feasibility_precheck(const Scenario& s) {
    const int nu = s.num_traits();
    for (int u = 0; u < nu; ++u) {
        const auto& td = s.traits[u];
        double team_stock = 0.0, best_stock = 0.0;
        double team_rate = 0.0, best_rate = 0.0;
        for (const auto& r : s.robots) {
            team_stock += r.initial_traits[u];
            best_stock = std::max(best_stock, r.initial_traits[u]);
            team_rate += r.max_rates[u];
            best_rate = std::max(best_rate, r.max_rates[u]);
        }
        if (td.exhaustibility == Exhaustibility::ET) {
            double total_demand = 0.0;
            for (const auto& t : s.tasks) total_demand += t.desired_traits[u];
            if (team_stock < total_demand)
                return {false, "collective stock of exhaustible trait '" + td.name +
                                   "' falls short of the total demand"};
        }
        for (int k = 0; k < s.num_tasks(); ++k) {
            const auto& t = s.tasks[k];
            const double y = t.desired_traits[u];
            if (y > 0.0) {
                const double avail =
                    t.cumulativity[u] == Cumulativity::NCT ? best_stock : team_stock;
                if (avail < y)
                    return {false, "task '" + t.name + "' demands more of trait '" + td.name +
                                       "' than the team can supply"};
            }
            const double yd = t.desired_rates[u];
            if (yd > 0.0 && td.provisioning == Provisioning::GPT) {
                const double avail =
                    t.cumulativity[u] == Cumulativity::NCT ? best_rate : team_rate;
                if (avail < yd)
                    return {false, "task '" + t.name + "' demands a higher rate of trait '" +
                                       td.name + "' than the team can supply"};
            }
        }
    }
    return {true, ""};
}

}  // namespace traits
