#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "traits/algebra.hpp"
#include "traits/battery.hpp"
#include "traits/model.hpp"
#include "traits/router.hpp"

namespace traits {

// Plan audit against the published metrics. Everything is recomputed from
// the scenario and the solution payload alone (allocation, provisions,
// claimed rates, schedule, transition speeds); solver internals are never
// consulted. Claimed rates above a robot's physical cap are clamped before
// durations are derived, so infeasible claims surface as violations instead
// of being taken at face value.
inline ViolationReport validate_plan(const Scenario& s, const Solution& sol, const Router& router) {
    const int nk = s.num_tasks(), nn = s.num_robots(), nu = s.num_traits();
    const double tol = 1e-6;
    auto rel = [&](double v) { return tol * std::max(1.0, std::abs(v)); };
    const auto& a = sol.allocation;
    if (a.num_tasks() != nk || a.num_robots() != nn)
        throw SemanticError("solution dimensions do not match the scenario");

    ViolationReport rep;
    const double inf = std::numeric_limits<double>::infinity();

    // --- recompute aggregates, durations, speeds
    std::vector<std::vector<double>> x_ku(nk, std::vector<double>(nu, 0.0));
    std::vector<std::vector<double>> rate_ku(nk, std::vector<double>(nu, 0.0));
    std::vector<double> d_task(nk, 0.0), v_intra(nk, 0.0), d_intra(nk, 0.0);
    std::vector<std::vector<double>> eff_rates(nk);  // [k][n*nu+u], cap-clamped

    for (int k = 0; k < nk; ++k) {
        const auto members = a.coalition(k);
        eff_rates[k].assign(static_cast<size_t>(nn) * nu, 0.0);
        double d_kq = 0.0;
        for (int u = 0; u < nu; ++u) {
            double d_kuq = 0.0;
            for (int n : members) {
                const double x = sol.plan.provisions[k][n][u];
                if (x <= 0.0) continue;
                if (!s.is_gpt(u)) continue;
                double r = sol.plan.rates[k][n][u];
                r = std::min(r, s.robots[n].max_rates[u]);
                eff_rates[k][static_cast<size_t>(n) * nu + u] = r;
                d_kuq = std::max(d_kuq, r > 0.0 ? x / r : inf);
            }
            std::vector<double> vals;
            for (int n : members) vals.push_back(sol.plan.provisions[k][n][u]);
            x_ku[k][u] = aggregate_coalition_trait(vals, s.tasks[k].cumulativity[u]);
            if (s.is_gpt(u) && x_ku[k][u] > 0.0 && d_kuq > 0.0 && std::isfinite(d_kuq))
                rate_ku[k][u] = x_ku[k][u] / d_kuq;
            d_kq = std::max(d_kq, d_kuq);
        }
        std::vector<double> draws;
        for (int n : members) {
            std::vector<double> rr(nu);
            for (int u = 0; u < nu; ++u) rr[u] = eff_rates[k][static_cast<size_t>(n) * nu + u];
            draws.push_back(trait_draw(s.robots[n], sol.plan.provisions[k][n], rr));
        }
        v_intra[k] = members.empty() ? 0.0 : intra_velocity(s, members, draws);
        double l_k = 0.0;
        if (!members.empty())
            l_k = router.path_length(s.tasks[k].start_position, s.tasks[k].end_position,
                                     widest_radius(s, members));
        d_intra[k] = l_k > 0.0 ? (v_intra[k] > 0.0 ? l_k / v_intra[k] : inf) : 0.0;
        d_task[k] = s.tasks[k].static_duration + d_kq + d_intra[k];
    }

    // --- trait and rate insufficiency over demand cells
    {
        int demand_cells = 0, bad_cells = 0, rate_cells = 0, bad_rate = 0;
        for (int k = 0; k < nk; ++k)
            for (int u = 0; u < nu; ++u) {
                if (s.tasks[k].desired_traits[u] > 0.0) {
                    ++demand_cells;
                    if (x_ku[k][u] < s.tasks[k].desired_traits[u] - rel(s.tasks[k].desired_traits[u]))
                        ++bad_cells;
                }
                if (s.is_gpt(u) && s.tasks[k].desired_rates[u] > 0.0) {
                    ++rate_cells;
                    if (rate_ku[k][u] < s.tasks[k].desired_rates[u] - rel(s.tasks[k].desired_rates[u]))
                        ++bad_rate;
                }
            }
        rep.task_trait_insufficiency = demand_cells ? double(bad_cells) / demand_cells : 0.0;
        rep.rate_insufficiency = rate_cells ? double(bad_rate) / rate_cells : 0.0;
    }

    // --- under-resourced robots (initial-stock budgets)
    {
        int assigned = 0, bad = 0;
        for (int n = 0; n < nn; ++n) {
            const auto tasks = a.tasks_of(n);
            if (tasks.empty()) continue;
            ++assigned;
            bool violated = false;
            for (int u = 0; u < nu && !violated; ++u) {
                double used = 0.0;
                for (int k : tasks) {
                    const double x = sol.plan.provisions[k][n][u];
                    if (s.is_et(u))
                        used += x;
                    else
                        used = std::max(used, x);
                }
                violated = used > s.robots[n].initial_traits[u] + rel(s.robots[n].initial_traits[u]);
            }
            if (violated) ++bad;
        }
        rep.under_resourced_robots = assigned ? double(bad) / assigned : 0.0;
    }

    // --- C-rating over (task, robot) executions
    std::vector<std::vector<double>> current(nk, std::vector<double>(nn, 0.0));
    {
        int pairs = 0, bad = 0;
        for (int k = 0; k < nk; ++k)
            for (int n = 0; n < nn; ++n) {
                if (!a.at(k, n)) continue;
                ++pairs;
                std::vector<double> rr(nu);
                for (int u = 0; u < nu; ++u) rr[u] = eff_rates[k][static_cast<size_t>(n) * nu + u];
                const Robot& r = s.robots[n];
                current[k][n] = r.idle_current + r.velocity_current_coeff * v_intra[k] +
                                trait_draw(r, sol.plan.provisions[k][n], rr);
                if (current[k][n] > r.max_current + rel(r.max_current)) ++bad;
            }
        rep.c_rating_violations = pairs ? double(bad) / pairs : 0.0;
    }

    // --- battery over all robots; idle drain integrates schedule gaps over
    // the horizon [0, C]
    {
        double makespan = 0.0;
        for (int k = 0; k < nk; ++k) makespan = std::max(makespan, sol.schedule.finish[k]);
        int bad = 0;
        for (int n = 0; n < nn; ++n) {
            const auto tasks = a.tasks_of(n);
            if (tasks.empty()) continue;
            const Robot& r = s.robots[n];
            double task_e = 0.0, busy = 0.0;
            for (int k : tasks) {
                if (!std::isfinite(d_task[k])) {
                    task_e = inf;
                    break;
                }
                busy += d_task[k];
                task_e += task_energy(r.voltage, current[k][n], r.peukert_exponent, d_task[k]);
            }
            const double lhat = inter_length_estimate(s, n, tasks, router);
            const double v = sol.plan.inter_velocities[n];
            double drive_e, drive_t;
            if (lhat > 0.0) {
                drive_e = v > 0.0 ? transit_energy(r, lhat, v) : inf;
                drive_t = v > 0.0 ? lhat / v : inf;
            } else {
                drive_e = drive_t = 0.0;
            }
            const double idle_t = std::max(0.0, makespan - busy - drive_t);
            const double total = task_e + drive_e + idle_energy(r, idle_t);
            if (!(total <= r.battery_capacity * (1.0 + tol))) ++bad;
        }
        rep.battery_violations = nn ? double(bad) / nn : 0.0;
    }

    // --- temporal constraints: task timing structure, precedence, declared
    // mutexes and deadlines, all with recomputed durations and transitions
    {
        int count = 0, bad = 0;
        auto check = [&](bool ok) {
            ++count;
            if (!ok) ++bad;
        };
        const auto& st = sol.schedule.start;
        const auto& fin = sol.schedule.finish;
        for (int k = 0; k < nk; ++k) {
            check(std::isfinite(d_task[k]) && fin[k] >= st[k] + d_task[k] - rel(d_task[k]));
            double ini = 0.0;
            bool reachable = true;
            for (int n = 0; n < nn; ++n) {
                if (!a.at(k, n)) continue;
                const double len = router.path_length(s.robots[n].initial_position,
                                                      s.tasks[k].start_position,
                                                      s.robots[n].bounding_radius);
                if (len <= 0.0) continue;
                if (sol.plan.inter_velocities[n] > 0.0)
                    ini = std::max(ini, len / sol.plan.inter_velocities[n]);
                else
                    reachable = false;
            }
            check(reachable && st[k] >= ini - rel(ini));
        }
        auto delta = [&](int i, int j) {
            double d = 0.0;
            for (int n = 0; n < nn; ++n) {
                if (!a.at(i, n) || !a.at(j, n)) continue;
                const double len = router.path_length(s.tasks[i].end_position, s.tasks[j].start_position,
                                                      s.robots[n].bounding_radius);
                if (len <= 0.0) continue;
                if (sol.plan.inter_velocities[n] > 0.0)
                    d = std::max(d, len / sol.plan.inter_velocities[n]);
                else
                    d = inf;
            }
            return d;
        };
        for (auto [i, j] : s.temporal.precedence) check(st[j] >= fin[i] + delta(i, j) - rel(delta(i, j)));
        for (auto [i, j] : s.temporal.mutex_pairs) {
            const double dij = delta(i, j), dji = delta(j, i);
            check(st[j] >= fin[i] + dij - rel(dij) || st[i] >= fin[j] + dji - rel(dji));
        }
        auto point = [&](int task, Endpoint e) { return e == Endpoint::Start ? st[task] : fin[task]; };
        for (const auto& d : s.temporal.absolute_deadlines)
            check(point(d.task, d.endpoint) <= d.bound + rel(d.bound));
        for (const auto& d : s.temporal.relative_deadlines)
            check(point(d.second_task, d.second_endpoint) - point(d.first_task, d.first_endpoint) <=
                  d.bound + rel(d.bound));
        rep.deadline_violations = count ? double(bad) / count : 0.0;
    }

    rep.plan_feasible = rep.task_trait_insufficiency == 0.0 && rep.rate_insufficiency == 0.0 &&
                        rep.under_resourced_robots == 0.0 && rep.c_rating_violations == 0.0 &&
                        rep.battery_violations == 0.0 && rep.deadline_violations == 0.0;
    return rep;
}

}  // namespace traits
