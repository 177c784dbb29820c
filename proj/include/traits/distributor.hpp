#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "traits/algebra.hpp"
#include "traits/battery.hpp"
#include "traits/detail/simplex.hpp"
#include "traits/heuristics.hpp"
#include "traits/model.hpp"
#include "traits/router.hpp"

namespace traits {

struct DistributorOptions {
    bool et_budgets = true;   // enforce exhaustible cross-task budgets
    bool battery = true;      // enforce battery capacity and optimize speeds
    bool rate_aware = true;   // false: fixed demand-window durations (ablation)
    double horizon = -1.0;    // idle-drain accounting window; <0: makespan upper bound
    double lex_epsilon = 1e-6;
};

// Trait/rate shortfalls against the desired matrices; surplus counts as zero.
struct MismatchResult {
    double trait_mismatch = 0.0;
    double rate_mismatch = 0.0;
    std::vector<std::vector<double>> trait_shortfall;  // [k][u]
    std::vector<std::vector<double>> rate_shortfall;   // [k][u], GPT cells only
};

inline MismatchResult mismatch(const Scenario& s, const std::vector<std::vector<double>>& coalition_traits,
                               const std::vector<std::vector<double>>& coalition_rates) {
    const int nk = s.num_tasks(), nu = s.num_traits();
    MismatchResult out;
    out.trait_shortfall.assign(nk, std::vector<double>(nu, 0.0));
    out.rate_shortfall.assign(nk, std::vector<double>(nu, 0.0));
    for (int k = 0; k < nk; ++k) {
        for (int u = 0; u < nu; ++u) {
            const double e = std::max(0.0, s.tasks[k].desired_traits[u] - coalition_traits[k][u]);
            out.trait_shortfall[k][u] = e;
            out.trait_mismatch += e;
            if (s.is_gpt(u)) {
                const double ed = std::max(0.0, s.tasks[k].desired_rates[u] - coalition_rates[k][u]);
                out.rate_shortfall[k][u] = ed;
                out.rate_mismatch += ed;
            }
        }
    }
    return out;
}

namespace detail {

constexpr double kWindowFloor = 1e-9;
constexpr double kFeasTol = 1e-9;

struct DistCtx {
    const Scenario* s = nullptr;
    const Router* router = nullptr;
    Allocation alloc;
    DistributorOptions opts;
    std::vector<std::vector<int>> coalition;   // [k]
    std::vector<std::vector<int>> tasks_of;    // [n]
    std::vector<double> intra_len;             // [k], m at the coalition's widest radius
    std::vector<double> inter_len;             // [n], transition-distance overestimate
    double horizon = 0.0;
    double sum_y = 0.0, sum_ydot = 0.0;

    bool eligible(int k, int n, int u) const {
        if (!alloc.at(k, n)) return false;
        if (s->robots[n].initial_traits[u] <= 0.0) return false;
        if (s->is_gpt(u) && s->robots[n].max_rates[u] <= 0.0) return false;
        return true;
    }
    bool demanded(int k, int u) const {
        return s->tasks[k].desired_traits[u] > 0.0 || s->tasks[k].desired_rates[u] > 0.0;
    }
};

inline DistCtx make_ctx(const Scenario& s, const Allocation& a, const Router& router,
                        const DistributorOptions& opts) {
    DistCtx c;
    c.s = &s;
    c.router = &router;
    c.alloc = a;
    c.opts = opts;
    const int nk = s.num_tasks(), nn = s.num_robots();
    c.coalition.resize(nk);
    c.tasks_of.resize(nn);
    for (int k = 0; k < nk; ++k) c.coalition[k] = a.coalition(k);
    for (int n = 0; n < nn; ++n) c.tasks_of[n] = a.tasks_of(n);
    c.intra_len.assign(nk, 0.0);
    for (int k = 0; k < nk; ++k) {
        if (c.coalition[k].empty()) continue;
        const double radius = widest_radius(s, c.coalition[k]);
        c.intra_len[k] = router.path_length(s.tasks[k].start_position, s.tasks[k].end_position, radius);
    }
    c.inter_len.assign(nn, 0.0);
    for (int n = 0; n < nn; ++n)
        if (!c.tasks_of[n].empty()) c.inter_len[n] = inter_length_estimate(s, n, c.tasks_of[n], router);
    c.horizon = opts.horizon >= 0.0 ? opts.horizon : makespan_bounds(s).upper;
    for (const auto& t : s.tasks)
        for (int u = 0; u < s.num_traits(); ++u) {
            c.sum_y += t.desired_traits[u];
            if (s.is_gpt(u)) c.sum_ydot += t.desired_rates[u];
        }
    return c;
}

// Provisioning-window bounds for one gradual (task, trait) cell: the fastest
// deliverable span given rate caps and the demand-implied span.
struct WindowRange {
    double fast = kWindowFloor;
    double demand = kWindowFloor;
    double lo() const { return std::min(fast, demand); }
    double hi() const { return std::max(fast, demand); }
};

inline double ct_fast_window(const DistCtx& c, int k, int u, double target) {
    // smallest w with sum_n min(q0, rate*w) >= min(target, deliverable)
    double cap_total = 0.0, plateau = 0.0;
    for (int n : c.coalition[k]) {
        if (!c.eligible(k, n, u)) continue;
        cap_total += c.s->robots[n].initial_traits[u];
        plateau = std::max(plateau, c.s->robots[n].initial_traits[u] / c.s->robots[n].max_rates[u]);
    }
    if (cap_total <= 0.0) return kWindowFloor;
    const double goal = std::min(target, cap_total);
    double lo = 0.0, hi = plateau;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        double deliverable = 0.0;
        for (int n : c.coalition[k]) {
            if (!c.eligible(k, n, u)) continue;
            deliverable +=
                std::min(c.s->robots[n].initial_traits[u], c.s->robots[n].max_rates[u] * mid);
        }
        if (deliverable >= goal)
            hi = mid;
        else
            lo = mid;
    }
    return std::max(hi, kWindowFloor);
}

inline double nct_fast_window(const DistCtx& c, int k, int u, double target) {
    double w = kWindowFloor;
    for (int n : c.coalition[k]) {
        if (!c.eligible(k, n, u)) continue;
        const double share = std::min(target, c.s->robots[n].initial_traits[u]);
        w = std::max(w, share / c.s->robots[n].max_rates[u]);
    }
    return w;
}

inline WindowRange window_range(const DistCtx& c, int k, int u) {
    const Task& t = c.s->tasks[k];
    const double y = t.desired_traits[u], yd = t.desired_rates[u];
    WindowRange r;
    if (y > 0.0) {
        r.fast = t.cumulativity[u] == Cumulativity::CT ? ct_fast_window(c, k, u, y)
                                                       : nct_fast_window(c, k, u, y);
        r.demand = yd > 0.0 ? std::max(kWindowFloor, y / yd) : 0.0;
        if (yd <= 0.0) {
            // bulk-only demand: stretch range explored by the scan
            r.demand = r.fast * 8.0 + 1.0;
        }
    } else if (yd > 0.0) {
        // rate-only demand: a microscopic window sustains the rate with
        // negligible stock
        r.fast = r.demand = 1e-6;
    }
    return r;
}

// Per-(task,trait) provisioning windows at scan position theta in [0,1].
inline std::vector<std::vector<double>> windows_at(const DistCtx& c,
                                                   const std::vector<std::vector<WindowRange>>& ranges,
                                                   double theta) {
    const int nk = c.s->num_tasks(), nu = c.s->num_traits();
    std::vector<std::vector<double>> w(nk, std::vector<double>(nu, kWindowFloor));
    for (int k = 0; k < nk; ++k)
        for (int u = 0; u < nu; ++u) {
            if (!c.s->is_gpt(u) || !c.demanded(k, u)) continue;
            const auto& r = ranges[k][u];
            w[k][u] = std::max(kWindowFloor, r.lo() + theta * (r.hi() - r.lo()));
        }
    return w;
}

// Fixed ablation windows: the demand-implied span shared by every gradual
// trait of the task.
inline std::vector<std::vector<double>> baseline_windows(const DistCtx& c) {
    const int nk = c.s->num_tasks(), nu = c.s->num_traits();
    std::vector<std::vector<double>> w(nk, std::vector<double>(nu, kWindowFloor));
    for (int k = 0; k < nk; ++k) {
        double span = 0.0;
        for (int u = 0; u < nu; ++u) {
            const Task& t = c.s->tasks[k];
            if (c.s->is_gpt(u) && t.desired_traits[u] > 0.0 && t.desired_rates[u] > 0.0)
                span = std::max(span, t.desired_traits[u] / t.desired_rates[u]);
        }
        span = std::max(span, kWindowFloor);
        for (int u = 0; u < nu; ++u)
            if (c.s->is_gpt(u)) w[k][u] = span;
    }
    return w;
}

using Tensor3 = std::vector<std::vector<std::vector<double>>>;

inline Tensor3 zero_tensor(int nk, int nn, int nu) {
    return Tensor3(nk, std::vector<std::vector<double>>(nn, std::vector<double>(nu, 0.0)));
}

// Everything derivable from the provisions under fixed windows: rates,
// durations, speeds, currents, energies and mismatches.
struct Evaluation {
    ProvisionPlan plan;
    bool current_ok = true;        // all task currents within C-ratings
    bool movable = true;           // no coalition pinned at zero intra speed
    bool battery_ok = true;        // capacity holds incl. reserves
    double apr_value = 0.0;
    double total_duration = 0.0;   // sum of task durations
    double total_velocity = 0.0;   // sum of transition speeds
};

inline bool lex_better(const Evaluation& a, const Evaluation& b, double eps = 1e-12) {
    const int fa = (a.battery_ok && a.movable && a.current_ok) ? 0 : 1;
    const int fb = (b.battery_ok && b.movable && b.current_ok) ? 0 : 1;
    if (fa != fb) return fa < fb;
    if (a.apr_value < b.apr_value - eps) return true;
    if (a.apr_value > b.apr_value + eps) return false;
    if (a.total_duration < b.total_duration - eps) return true;
    if (a.total_duration > b.total_duration + eps) return false;
    return a.total_velocity > b.total_velocity + eps;
}

inline Evaluation evaluate(const DistCtx& c, const Tensor3& provisions,
                           const std::vector<std::vector<double>>& windows) {
    const Scenario& s = *c.s;
    const int nk = s.num_tasks(), nn = s.num_robots(), nu = s.num_traits();
    Evaluation ev;
    ProvisionPlan& p = ev.plan;
    p.provisions = provisions;
    p.rates = zero_tensor(nk, nn, nu);
    p.coalition_traits.assign(nk, std::vector<double>(nu, 0.0));
    p.coalition_rates.assign(nk, std::vector<double>(nu, 0.0));
    p.trait_durations.assign(nk, std::vector<double>(nu, 0.0));
    p.provisioning_durations.assign(nk, 0.0);
    p.intra_speeds.assign(nk, 0.0);
    p.intra_durations.assign(nk, 0.0);
    p.task_durations.assign(nk, 0.0);
    p.inter_velocities.assign(nn, 0.0);
    p.energy.assign(nn, EnergyLedger{});

    for (int k = 0; k < nk; ++k) {
        const auto& members = c.coalition[k];
        for (int u = 0; u < nu; ++u) {
            double d_kuq = 0.0;
            if (s.is_gpt(u)) {
                for (int n : members) {
                    const double x = provisions[k][n][u];
                    if (x <= 0.0) continue;
                    const double w = std::max(windows[k][u], kWindowFloor);
                    double rate = x / w;
                    if (c.opts.rate_aware) rate = std::min(rate, s.robots[n].max_rates[u]);
                    p.rates[k][n][u] = rate;
                    d_kuq = std::max(d_kuq, provision_duration(x, rate, Provisioning::GPT));
                }
            }
            p.trait_durations[k][u] = d_kuq;
            std::vector<double> values;
            values.reserve(members.size());
            for (int n : members) values.push_back(provisions[k][n][u]);
            const double x_ku = aggregate_coalition_trait(values, s.tasks[k].cumulativity[u]);
            p.coalition_traits[k][u] = x_ku;
            p.coalition_rates[k][u] = coalition_rate(x_ku, d_kuq, s.traits[u].provisioning);
            p.provisioning_durations[k] = std::max(p.provisioning_durations[k], d_kuq);
        }

        if (!c.opts.rate_aware) {
            // ablation: durations pinned at the demand-implied span
            p.provisioning_durations[k] = 0.0;
            bool any = false;
            for (int u = 0; u < nu; ++u)
                if (s.is_gpt(u)) {
                    bool provided = false;
                    for (int n : members) provided |= provisions[k][n][u] > 0.0;
                    if (provided) {
                        p.provisioning_durations[k] = std::max(p.provisioning_durations[k], windows[k][u]);
                        any = true;
                    }
                }
            if (!any) p.provisioning_durations[k] = 0.0;
        }

        // coalition movement under the C-rating headroom
        std::vector<double> draws;
        draws.reserve(members.size());
        for (int n : members) draws.push_back(trait_draw(s.robots[n], provisions[k][n], p.rates[k][n]));
        double v_intra;
        if (members.empty())
            v_intra = 0.0;
        else if (c.opts.rate_aware)
            v_intra = intra_velocity(s, members, draws);
        else {
            v_intra = std::numeric_limits<double>::infinity();
            for (int n : members) v_intra = std::min(v_intra, s.robots[n].max_speed);
        }
        p.intra_speeds[k] = v_intra;
        if (c.intra_len[k] > 0.0 && !members.empty()) {
            if (v_intra <= 0.0) {
                ev.movable = false;
                p.intra_durations[k] = std::numeric_limits<double>::infinity();
            } else {
                p.intra_durations[k] = c.intra_len[k] / v_intra;
            }
        } else {
            p.intra_durations[k] = 0.0;
        }
        p.task_durations[k] =
            task_duration(s.tasks[k].static_duration, p.provisioning_durations[k], p.intra_durations[k]);
        ev.total_duration += p.task_durations[k];

        // per-member currents and energies
        for (size_t i = 0; i < members.size(); ++i) {
            const int n = members[i];
            const Robot& r = s.robots[n];
            const double current = r.idle_current + r.velocity_current_coeff * v_intra + draws[i];
            if (current > r.max_current * (1.0 + kFeasTol) + kFeasTol) ev.current_ok = false;
            if (std::isfinite(p.task_durations[k]))
                p.energy[n].task_energy +=
                    task_energy(r.voltage, current, r.peukert_exponent, p.task_durations[k]);
            else
                p.energy[n].task_energy = std::numeric_limits<double>::infinity();
        }
    }

    auto mm = mismatch(s, p.coalition_traits, p.coalition_rates);
    p.trait_shortfall = std::move(mm.trait_shortfall);
    p.rate_shortfall = std::move(mm.rate_shortfall);
    p.trait_mismatch = mm.trait_mismatch;
    p.rate_mismatch = mm.rate_mismatch;
    // the ablation scores trait mismatch only; the true rate shortfall stays
    // in the plan for the auditor to expose
    ev.apr_value = apr(p.trait_mismatch, c.opts.rate_aware ? p.rate_mismatch : 0.0, c.sum_y,
                       c.opts.rate_aware ? c.sum_ydot : 0.0, s.gamma);

    // transition speeds from the residual battery budget
    for (int n = 0; n < nn; ++n) {
        const Robot& r = s.robots[n];
        EnergyLedger& led = p.energy[n];
        led.est_inter_length = c.inter_len[n];
        if (c.tasks_of[n].empty()) {
            led.inter_velocity = r.max_speed;
            p.inter_velocities[n] = r.max_speed;
            led.total = 0.0;
            continue;
        }
        double busy = 0.0;
        for (int k : c.tasks_of[n]) busy += p.task_durations[k];
        const double idle_reserve = std::isfinite(busy)
                                        ? idle_energy(r, c.horizon - busy)
                                        : 0.0;
        if (!c.opts.battery) {
            led.inter_velocity = r.max_speed;
            p.inter_velocities[n] = r.max_speed;
            led.inter_energy = transit_energy(r, led.est_inter_length, r.max_speed) + idle_reserve;
            led.total = led.task_energy + led.inter_energy;
            continue;
        }
        const double budget = r.battery_capacity - led.task_energy - idle_reserve;
        const double floor_cost = min_transit_energy(r, led.est_inter_length);
        if (!std::isfinite(led.task_energy) || budget < floor_cost * (1.0 - kFeasTol) - kFeasTol) {
            ev.battery_ok = false;
            led.inter_velocity = 0.0;
            led.inter_energy = floor_cost + idle_reserve;
            led.total = led.task_energy + led.inter_energy;
            continue;
        }
        double v = r.max_speed;
        if (led.est_inter_length > 0.0)
            v = max_inter_velocity(r, led.est_inter_length, std::max(budget, floor_cost));
        led.inter_velocity = v;
        p.inter_velocities[n] = v;
        led.inter_energy = transit_energy(r, led.est_inter_length, v) + idle_reserve;
        led.total = led.task_energy + led.inter_energy;
    }
    for (int n = 0; n < nn; ++n) ev.total_velocity += p.inter_velocities[n];
    return ev;
}

// A demanded (task, trait) cell is live when its coalition can move its
// aggregate at all: for CT at least one eligible provider, for NCT every
// member eligible (one stuck member pins the min at zero). Dead cells
// contribute constant mismatch and stay out of the program.
inline bool cell_live(const DistCtx& c, int k, int u) {
    if (!c.demanded(k, u) || c.coalition[k].empty()) return false;
    if (c.s->tasks[k].cumulativity[u] == Cumulativity::CT) {
        for (int n : c.coalition[k])
            if (c.eligible(k, n, u)) return true;
        return false;
    }
    for (int n : c.coalition[k])
        if (!c.eligible(k, n, u)) return false;
    return true;
}

// Level-1 linear program at fixed windows: minimize the weighted mismatch
// (plus a vanishing total-provision term that suppresses useless surplus).
// Every >= row carries its own shortfall slack as starting basis, so the
// simplex runs artificial-free.
inline Tensor3 solve_level1(const DistCtx& c, const std::vector<std::vector<double>>& windows,
                            const std::vector<std::array<double, 2>>* battery_cuts = nullptr) {
    const Scenario& s = *c.s;
    const int nk = s.num_tasks(), nn = s.num_robots(), nu = s.num_traits();

    // variable layout: provisions on live cells, NCT min aggregates, then
    // shortfall slacks
    std::vector<int> var_of(static_cast<size_t>(nk) * nn * nu, -1);
    std::vector<std::array<int, 3>> cells;
    std::vector<std::array<int, 2>> live;  // (k, u)
    for (int k = 0; k < nk; ++k)
        for (int u = 0; u < nu; ++u) {
            if (!cell_live(c, k, u)) continue;
            live.push_back({k, u});
            for (int n : c.coalition[k])
                if (c.eligible(k, n, u)) {
                    var_of[(static_cast<size_t>(k) * nn + n) * nu + u] = static_cast<int>(cells.size());
                    cells.push_back({k, n, u});
                }
        }
    const int num_x = static_cast<int>(cells.size());
    auto xvar = [&](int k, int n, int u) { return var_of[(static_cast<size_t>(k) * nn + n) * nu + u]; };

    int next = num_x;
    std::vector<int> mvar(live.size(), -1), evar(live.size(), -1), edvar(live.size(), -1);
    for (size_t i = 0; i < live.size(); ++i) {
        const auto [k, u] = live[i];
        if (s.tasks[k].cumulativity[u] == Cumulativity::NCT) mvar[i] = next++;
        if (s.tasks[k].desired_traits[u] > 0.0) evar[i] = next++;
        if (c.opts.rate_aware && s.is_gpt(u) && s.tasks[k].desired_rates[u] > 0.0) edvar[i] = next++;
    }

    LinearProgram lp(next);
    const bool has_y = c.sum_y > 0.0, has_yd = c.opts.rate_aware && c.sum_ydot > 0.0;
    const double we = has_y ? (has_yd ? s.gamma / c.sum_y : 1.0 / c.sum_y) : 0.0;
    const double wed = has_yd ? (has_y ? (1.0 - s.gamma) / c.sum_ydot : 1.0 / c.sum_ydot) : 0.0;
    double cap_scale = 1.0;
    for (const auto& cell : cells) cap_scale += s.robots[cell[1]].initial_traits[cell[2]];
    const double tiny = 1e-9 * std::max(we, wed) * (1.0 / cap_scale);
    for (size_t i = 0; i < live.size(); ++i) {
        if (evar[i] >= 0) lp.set_objective(evar[i], we);
        if (edvar[i] >= 0) lp.set_objective(edvar[i], wed);
    }
    for (int v = 0; v < num_x; ++v) lp.set_objective(v, tiny);

    for (size_t i = 0; i < live.size(); ++i) {
        const auto [k, u] = live[i];
        const Task& t = s.tasks[k];
        const double w_ku = std::max(windows[k][u], kWindowFloor);
        if (t.cumulativity[u] == Cumulativity::CT) {
            if (evar[i] >= 0) {
                std::vector<std::pair<int, double>> terms{{evar[i], 1.0}};
                for (int n : c.coalition[k])
                    if (xvar(k, n, u) >= 0) terms.push_back({xvar(k, n, u), 1.0});
                lp.add_constraint(std::move(terms), '>', t.desired_traits[u], evar[i]);
            }
            if (edvar[i] >= 0) {
                std::vector<std::pair<int, double>> terms{{edvar[i], 1.0}};
                for (int n : c.coalition[k])
                    if (xvar(k, n, u) >= 0) terms.push_back({xvar(k, n, u), 1.0 / w_ku});
                lp.add_constraint(std::move(terms), '>', t.desired_rates[u], edvar[i]);
            }
        } else {
            for (int n : c.coalition[k])
                lp.add_constraint({{mvar[i], 1.0}, {xvar(k, n, u), -1.0}}, '<', 0.0);
            if (evar[i] >= 0)
                lp.add_constraint({{evar[i], 1.0}, {mvar[i], 1.0}}, '>', t.desired_traits[u], evar[i]);
            if (edvar[i] >= 0)
                lp.add_constraint({{edvar[i], 1.0}, {mvar[i], 1.0 / w_ku}}, '>', t.desired_rates[u],
                                  edvar[i]);
        }
    }

    // per-cell caps: stock and, for gradual traits, in-window deliverability
    for (int v = 0; v < num_x; ++v) {
        const auto [k, n, u] = cells[v];
        double cap = s.robots[n].initial_traits[u];
        if (s.is_gpt(u) && c.opts.rate_aware)
            cap = std::min(cap, s.robots[n].max_rates[u] * std::max(windows[k][u], kWindowFloor));
        lp.add_constraint({{v, 1.0}}, '<', cap);
    }

    // exhaustible budgets across tasks
    if (c.opts.et_budgets)
        for (int n = 0; n < nn; ++n)
            for (int u = 0; u < nu; ++u) {
                if (!s.is_et(u)) continue;
                std::vector<std::pair<int, double>> terms;
                for (int k : c.tasks_of[n])
                    if (xvar(k, n, u) >= 0) terms.push_back({xvar(k, n, u), 1.0});
                if (terms.size() > 1)
                    lp.add_constraint(std::move(terms), '<', s.robots[n].initial_traits[u]);
            }

    // C-rating headroom per (task, robot); coalitions that must move keep
    // enough margin to crawl at a tenth of top speed
    if (c.opts.rate_aware)
        for (int k = 0; k < nk; ++k)
            for (int n : c.coalition[k]) {
                const Robot& r = s.robots[n];
                std::vector<std::pair<int, double>> terms;
                for (int u = 0; u < nu; ++u) {
                    const int v = xvar(k, n, u);
                    if (v < 0) continue;
                    double coef = r.trait_current_coeffs[u];
                    if (s.is_gpt(u))
                        coef += r.rate_current_coeffs[u] / std::max(windows[k][u], kWindowFloor);
                    if (coef > 0.0) terms.push_back({v, coef});
                }
                if (terms.empty()) continue;
                double headroom = r.max_current - r.idle_current;
                if (c.intra_len[k] > 0.0) {
                    const double margin =
                        std::min(r.velocity_current_coeff * 0.1 * r.max_speed, 0.5 * headroom);
                    headroom -= margin;
                }
                lp.add_constraint(std::move(terms), '<', std::max(headroom, 0.0));
            }

    // battery repair cuts: per robot, sum of coef*x <= bound
    if (battery_cuts)
        for (int n = 0; n < nn; ++n) {
            if (!((*battery_cuts)[n][1] < std::numeric_limits<double>::infinity())) continue;
            std::vector<std::pair<int, double>> terms;
            for (int k : c.tasks_of[n])
                for (int u = 0; u < nu; ++u)
                    if (xvar(k, n, u) >= 0) {
                        // coefficient built by caller into cuts[n][0] scale via windows
                        double coef = s.robots[n].trait_current_coeffs[u];
                        if (s.is_gpt(u))
                            coef += s.robots[n].rate_current_coeffs[u] /
                                    std::max(windows[k][u], kWindowFloor);
                        terms.push_back({xvar(k, n, u), coef * (*battery_cuts)[n][0]});
                    }
            if (!terms.empty()) lp.add_constraint(std::move(terms), '<', (*battery_cuts)[n][1]);
        }

    auto res = lp.solve();
    Tensor3 x = zero_tensor(nk, nn, nu);
    if (res.status != LinearProgram::Status::Optimal) return x;  // all-zero fallback
    for (int v = 0; v < num_x; ++v) {
        const auto [k, n, u] = cells[v];
        x[k][n][u] = std::max(0.0, res.x[v]);
    }
    return x;
}

// Solve at fixed windows and repair battery overruns: first with secant cuts
// on the convex Peukert term, then by scaling the offending robot down.
inline Evaluation solve_windows(const DistCtx& c, const std::vector<std::vector<double>>& windows) {
    Tensor3 x = solve_level1(c, windows);
    Evaluation ev = evaluate(c, x, windows);
    if (!c.opts.battery || ev.battery_ok) return ev;

    const Scenario& s = *c.s;
    const int nn = s.num_robots();
    for (int iter = 0; iter < 3 && !ev.battery_ok; ++iter) {
        std::vector<std::array<double, 2>> cuts(
            nn, {0.0, std::numeric_limits<double>::infinity()});
        bool hopeless = false;
        for (int n = 0; n < nn; ++n) {
            const Robot& r = s.robots[n];
            const EnergyLedger& led = ev.plan.energy[n];
            if (c.tasks_of[n].empty() || led.total <= r.battery_capacity * (1.0 + kFeasTol)) continue;
            // linearize: energy <= V*Imax^(p-1)*I*d with durations frozen
            double base = 0.0, dur_sum = 0.0;
            for (int k : c.tasks_of[n]) {
                const double d = ev.plan.task_durations[k];
                if (!std::isfinite(d)) {
                    dur_sum = std::numeric_limits<double>::infinity();
                    break;
                }
                dur_sum += d;
                base += r.voltage * std::pow(r.max_current, r.peukert_exponent - 1.0) *
                        (r.idle_current + r.velocity_current_coeff * ev.plan.intra_speeds[k]) * d;
            }
            if (!std::isfinite(dur_sum)) {
                hopeless = true;
                break;
            }
            const double idle_reserve = idle_energy(r, c.horizon - dur_sum);
            const double reserve = min_transit_energy(r, c.inter_len[n]) + idle_reserve;
            const double bound = r.battery_capacity - reserve - base;
            if (bound <= 0.0) {
                hopeless = true;
                break;
            }
            // durations vary per task; fold the max duration into the scale
            double dmax = 0.0;
            for (int k : c.tasks_of[n]) dmax = std::max(dmax, ev.plan.task_durations[k]);
            cuts[n] = {r.voltage * std::pow(r.max_current, r.peukert_exponent - 1.0) * dmax, bound};
        }
        if (hopeless) break;
        Tensor3 xr = solve_level1(c, windows, &cuts);
        Evaluation evr = evaluate(c, xr, windows);
        if (lex_better(evr, ev)) ev = std::move(evr);
        if (ev.battery_ok) return ev;
    }

    // last resort: scale violating robots' provisions toward zero
    Tensor3 scaled = ev.plan.provisions;
    for (int n = 0; n < nn; ++n) {
        if (c.tasks_of[n].empty()) continue;
        if (ev.plan.energy[n].total <= s.robots[n].battery_capacity * (1.0 + kFeasTol)) continue;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 24; ++it) {
            const double mid = 0.5 * (lo + hi);
            Tensor3 trial = scaled;
            for (int k : c.tasks_of[n])
                for (auto& v : trial[k][n]) v *= mid;
            Evaluation et = evaluate(c, trial, windows);
            if (et.plan.energy[n].total <= s.robots[n].battery_capacity * (1.0 + kFeasTol))
                lo = mid;
            else
                hi = mid;
        }
        for (int k : c.tasks_of[n])
            for (auto& v : scaled[k][n]) v *= lo;
    }
    Evaluation evs = evaluate(c, scaled, windows);
    if (lex_better(evs, ev)) return evs;
    return ev;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Constraint audit: independent re-check of every relation a ProvisionPlan
// must satisfy. Returns human-readable violations; empty means compliant.

inline std::vector<std::string> audit_provision_constraints(const Scenario& s, const Allocation& a,
                                                            const ProvisionPlan& p,
                                                            const DistributorOptions& opts = {}) {
    std::vector<std::string> bad;
    const int nk = s.num_tasks(), nn = s.num_robots(), nu = s.num_traits();
    const double tol = 1e-7;
    auto rel = [&](double v) { return tol * std::max(1.0, std::abs(v)); };

    for (int k = 0; k < nk; ++k)
        for (int n = 0; n < nn; ++n)
            for (int u = 0; u < nu; ++u) {
                const double x = p.provisions[k][n][u];
                const double xd = p.rates[k][n][u];
                if (x < -tol) bad.push_back("negative provision");
                if (!a.at(k, n) && x > tol) bad.push_back("provision outside the allocation");
                if (s.robots[n].initial_traits[u] <= 0.0 && x > tol)
                    bad.push_back("provision from a robot lacking the trait");
                if (x > s.robots[n].initial_traits[u] + rel(s.robots[n].initial_traits[u]))
                    bad.push_back("per-task provision exceeds the robot's stock");
                if (!s.is_gpt(u) && xd > tol) bad.push_back("rate on a non-gradual trait");
                if (s.is_gpt(u)) {
                    if (x > tol && xd <= 0.0) bad.push_back("gradual provision without a rate");
                    if (x <= tol && xd > tol) bad.push_back("rate without a provision");
                    if (opts.rate_aware && xd > s.robots[n].max_rates[u] + rel(s.robots[n].max_rates[u]))
                        bad.push_back("rate exceeds the robot's cap");
                }
            }

    if (opts.et_budgets)
        for (int n = 0; n < nn; ++n)
            for (int u = 0; u < nu; ++u) {
                if (!s.is_et(u)) continue;
                double used = 0.0;
                for (int k = 0; k < nk; ++k) used += p.provisions[k][n][u];
                if (used > s.robots[n].initial_traits[u] + rel(s.robots[n].initial_traits[u]))
                    bad.push_back("exhaustible budget exceeded for robot '" + s.robots[n].name + "'");
            }

    for (int k = 0; k < nk; ++k) {
        const auto members = a.coalition(k);
        for (int u = 0; u < nu; ++u) {
            std::vector<double> vals;
            for (int n : members) vals.push_back(p.provisions[k][n][u]);
            const double agg = aggregate_coalition_trait(vals, s.tasks[k].cumulativity[u]);
            if (std::abs(agg - p.coalition_traits[k][u]) > rel(agg))
                bad.push_back("coalition trait does not match its aggregation");
            double d_kuq = 0.0;
            for (int n : members)
                if (p.provisions[k][n][u] > 0.0 && s.is_gpt(u))
                    d_kuq = std::max(d_kuq, p.provisions[k][n][u] / p.rates[k][n][u]);
            if (std::abs(d_kuq - p.trait_durations[k][u]) > rel(d_kuq))
                bad.push_back("trait duration does not match provisions/rates");
            const double cr = coalition_rate(p.coalition_traits[k][u], std::max(d_kuq, 1e-300),
                                             s.traits[u].provisioning);
            if (std::abs(cr - p.coalition_rates[k][u]) > rel(cr))
                bad.push_back("coalition rate does not match its definition");
            if (s.is_gpt(u) && s.tasks[k].cumulativity[u] == Cumulativity::NCT &&
                p.coalition_traits[k][u] > tol) {
                double min_rate = std::numeric_limits<double>::infinity();
                for (int n : members)
                    if (p.provisions[k][n][u] > 0.0) min_rate = std::min(min_rate, p.rates[k][n][u]);
                if (p.coalition_rates[k][u] > min_rate + rel(min_rate))
                    bad.push_back("noncumulative coalition rate exceeds the slowest provider");
            }
        }
        double d_kq = 0.0;
        for (int u = 0; u < nu; ++u) d_kq = std::max(d_kq, p.trait_durations[k][u]);
        if (opts.rate_aware && std::abs(d_kq - p.provisioning_durations[k]) > rel(d_kq))
            bad.push_back("provisioning duration is not the max over traits");
        const double d_expect = s.tasks[k].static_duration + p.provisioning_durations[k] +
                                p.intra_durations[k];
        if (std::isfinite(p.task_durations[k]) && std::abs(d_expect - p.task_durations[k]) > rel(d_expect))
            bad.push_back("task duration is not static+provisioning+intra");
    }

    if (opts.battery)
        for (int n = 0; n < nn; ++n)
            if (p.energy[n].total > s.robots[n].battery_capacity *
                                        (1.0 + 1e-7)) {
                bad.push_back("battery capacity exceeded for robot '" + s.robots[n].name + "'");
            }
    return bad;
}

// ---------------------------------------------------------------------------
// distribute: hierarchical trait distribution for a fixed allocation.
// Level 1 minimizes the normalized mismatch, level 2 the summed task
// durations, level 3 maximizes transition speeds; no level may degrade an
// earlier one beyond lex_epsilon.

inline ProvisionPlan distribute(const Scenario& s, const Allocation& a, const Router& router,
                                const DistributorOptions& opts = {}) {
    using namespace detail;
    DistCtx c = make_ctx(s, a, router, opts);
    const int nk = s.num_tasks(), nu = s.num_traits();

    if (!opts.rate_aware) {
        auto windows = baseline_windows(c);
        Tensor3 x = solve_level1(c, windows);
        Evaluation ev = evaluate(c, x, windows);
        return std::move(ev.plan);
    }

    std::vector<std::vector<WindowRange>> ranges(nk, std::vector<WindowRange>(nu));
    double span = 0.0;
    for (int k = 0; k < nk; ++k)
        for (int u = 0; u < nu; ++u)
            if (s.is_gpt(u) && c.demanded(k, u) && cell_live(c, k, u)) {
                ranges[k][u] = window_range(c, k, u);
                span += ranges[k][u].hi() - ranges[k][u].lo();
            }

    // scan the shared window scale: coarse grid, then golden-section;
    // a single solve suffices when every window range is degenerate
    std::vector<double> thetas{1.0};
    if (span > 1e-9) thetas = {1.0, 0.0, 0.5};
    double best_theta = 1.0;
    bool have_best = false;
    Evaluation best;
    auto try_theta = [&](double th) {
        Evaluation ev = solve_windows(c, windows_at(c, ranges, th));
        if (!have_best || lex_better(ev, best)) {
            best = std::move(ev);
            best_theta = th;
            have_best = true;
        }
    };
    for (double th : thetas) try_theta(th);
    if (span > 1e-9) {
        const double inv_phi = 0.61803398874989484820;
        double lo = std::max(0.0, best_theta - 0.25), hi = std::min(1.0, best_theta + 0.25);
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        Evaluation e1 = solve_windows(c, windows_at(c, ranges, x1));
        Evaluation e2 = solve_windows(c, windows_at(c, ranges, x2));
        for (int it = 0; it < 8; ++it) {
            if (lex_better(e1, e2)) {
                hi = x2;
                x2 = x1;
                e2 = std::move(e1);
                x1 = hi - inv_phi * (hi - lo);
                e1 = solve_windows(c, windows_at(c, ranges, x1));
            } else {
                lo = x1;
                x1 = x2;
                e1 = std::move(e2);
                x2 = lo + inv_phi * (hi - lo);
                e2 = solve_windows(c, windows_at(c, ranges, x2));
            }
        }
        if (lex_better(e1, best)) {
            best = std::move(e1);
            best_theta = x1;
        }
        if (lex_better(e2, best)) {
            best = std::move(e2);
            best_theta = x2;
        }
    }

    if (!(best.battery_ok && best.movable))
        throw BatteryInfeasible(
            "no trait distribution fits the battery budgets for this allocation");

    // level 2: shrink windows toward rate caps while protecting level 1
    {
        auto base_windows = windows_at(c, ranges, best_theta);
        auto cap_windows = base_windows;
        for (int k = 0; k < nk; ++k)
            for (int u = 0; u < nu; ++u) {
                if (!s.is_gpt(u)) continue;
                double w = kWindowFloor;
                for (int n : c.coalition[k]) {
                    const double x = best.plan.provisions[k][n][u];
                    if (x > 0.0) w = std::max(w, x / s.robots[n].max_rates[u]);
                }
                if (w > kWindowFloor) cap_windows[k][u] = w;
            }
        const double guard = best.apr_value + opts.lex_epsilon * std::max(1.0, best.apr_value);
        double blend_lo = 0.0, blend_hi = 1.0;  // 1 = pure cap windows
        for (int it = 0; it < 6; ++it) {
            const double b = it == 0 ? 1.0 : 0.5 * (blend_lo + blend_hi);
            auto w = base_windows;
            for (int k = 0; k < nk; ++k)
                for (int u = 0; u < nu; ++u)
                    w[k][u] = (1.0 - b) * base_windows[k][u] + b * cap_windows[k][u];
            Evaluation ev = evaluate(c, best.plan.provisions, w);
            const bool ok = ev.battery_ok && ev.movable && ev.current_ok && ev.apr_value <= guard;
            if (ok && ev.total_duration < best.total_duration - 1e-12) {
                best = std::move(ev);
                blend_lo = b;
                if (it == 0) break;  // full cap windows already accepted
            } else if (it == 0) {
                blend_hi = 1.0;
                blend_lo = 0.0;
            } else if (ok) {
                blend_lo = b;
            } else {
                blend_hi = b;
            }
        }
    }

    return std::move(best.plan);
}

}  // namespace traits
