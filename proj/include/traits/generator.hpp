#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "traits/algebra.hpp"
#include "traits/battery.hpp"
#include "traits/model.hpp"
#include "traits/router.hpp"

namespace traits {

// Randomized scenario sampling for benchmarks and stress tests. Deterministic
// under a fixed (seed, config) pair.
struct GenConfig {
    int num_robots = 0;  // 0: sample from the range below
    int num_tasks = 0;
    int num_traits = 0;
    int min_robots = 5, max_robots = 30;
    int min_tasks = 5, max_tasks = 40;
    int min_traits = 3, max_traits = 5;
    int map_rows = 14, map_cols = 14;
    double cell_size = 1.0;
    // 0: generous energy and deadlines; 1: budgets sized so battery-blind or
    // rate-blind planners overrun while the full pipeline still fits
    double tightness = 0.0;
    double alpha = 0.5, gamma = 0.5, timeout = 300.0;
};

namespace detail {

inline GridMap gen_warehouse_map(std::mt19937_64& rng, const GenConfig& cfg) {
    const int rows = cfg.map_rows, cols = cfg.map_cols;
    std::vector<uint8_t> occ(static_cast<size_t>(rows) * cols, 0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    // shelf columns every third interior column, aisle rows every fourth row
    // keep the grid connected by construction; the outer two rings stay free
    for (int r = 2; r < rows - 2; ++r) {
        if (r % 4 == 0) continue;
        for (int c = 2; c < cols - 2; ++c) {
            if (c % 3 != 2) continue;
            if (U(rng) < 0.8) occ[static_cast<size_t>(r) * cols + c] = 1;
        }
    }
    return GridMap(cfg.cell_size, rows, cols, std::move(occ));
}

inline Cell sample_free_cell(std::mt19937_64& rng, const GridMap& map) {
    std::uniform_int_distribution<int> R(0, map.rows() - 1), C(0, map.cols() - 1);
    for (;;) {
        Cell c{R(rng), C(rng)};
        if (!map.occupied(c)) return c;
    }
}

inline Scenario gen_attempt(std::mt19937_64& rng, const GenConfig& cfg) {
    Scenario s;
    s.alpha = cfg.alpha;
    s.gamma = cfg.gamma;
    s.timeout_s = cfg.timeout;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    const int nn = cfg.num_robots > 0 ? cfg.num_robots : pick(cfg.min_robots, cfg.max_robots);
    const int nk = cfg.num_tasks > 0 ? cfg.num_tasks : pick(cfg.min_tasks, cfg.max_tasks);
    const int nu = cfg.num_traits > 0 ? cfg.num_traits : pick(cfg.min_traits, cfg.max_traits);

    s.map = gen_warehouse_map(rng, cfg);

    // trait taxonomy: slot 0 is always exhaustible and gradual, slot 1
    // inexhaustible and non-provisioning, the rest sampled
    for (int u = 0; u < nu; ++u) {
        TraitDef t;
        t.index = u;
        t.name = "trait" + std::to_string(u);
        t.unit = u == 0 ? "L" : "unit";
        if (u == 0) {
            t.exhaustibility = Exhaustibility::ET;
            t.provisioning = Provisioning::GPT;
        } else if (u == 1) {
            t.exhaustibility = Exhaustibility::IET;
            t.provisioning = Provisioning::NPT;
        } else {
            t.exhaustibility = U(rng) < 0.5 ? Exhaustibility::ET : Exhaustibility::IET;
            const double p = U(rng);
            t.provisioning = p < 0.35 ? Provisioning::GPT : (p < 0.7 ? Provisioning::IPT : Provisioning::NPT);
        }
        t.value_kind = ValueKind::Continuous;
        s.traits.push_back(std::move(t));
    }

    // per-trait base magnitudes and rate scales
    std::vector<double> mag(nu), rate_base(nu, 0.0);
    for (int u = 0; u < nu; ++u) {
        mag[u] = uni(4.0, 12.0);
        if (s.is_gpt(u)) rate_base[u] = uni(0.5, 2.0);
    }

    // robots: archetypes cycle low-rate/large-capacity, standard,
    // high-rate/limited-capacity
    for (int n = 0; n < nn; ++n) {
        Robot r;
        r.name = "r" + std::to_string(n);
        const int arch = n % 3;
        const double stock_mult = arch == 0 ? 1.6 : (arch == 1 ? 1.0 : 0.6);
        const double rate_mult = arch == 0 ? 0.5 : (arch == 1 ? 1.0 : 1.8);
        r.initial_traits.assign(nu, 0.0);
        r.max_rates.assign(nu, 0.0);
        for (int u = 0; u < nu; ++u) {
            if (U(rng) < 0.55 && n % nn != u % nn) continue;  // robot lacks this trait
            // stocks and rates uniform in (0,1] of the archetype maxima
            r.initial_traits[u] = std::max(1e-6, U(rng)) * mag[u] * stock_mult;
            if (s.is_gpt(u)) r.max_rates[u] = std::max(1e-6, U(rng)) * rate_base[u] * rate_mult;
        }
        r.voltage = 24.0;
        r.idle_current = uni(0.3, 0.8);
        r.max_current = uni(15.0, 25.0);
        r.peukert_exponent = uni(1.01, 1.15);
        r.max_speed = uni(0.6, 1.2);
        r.bounding_radius = (n % 5 == 4) ? 1.2 : (n % 2 == 0 ? 0.3 : 0.45);
        const double headroom = r.max_current - r.idle_current;
        r.velocity_current_coeff = 0.3 * headroom / r.max_speed * uni(0.8, 1.2);
        r.trait_current_coeffs.assign(nu, 0.0);
        r.rate_current_coeffs.assign(nu, 0.0);
        int held = 0;
        for (int u = 0; u < nu; ++u) held += r.initial_traits[u] > 0.0;
        held = std::max(held, 1);
        for (int u = 0; u < nu; ++u) {
            if (r.initial_traits[u] <= 0.0) continue;
            r.trait_current_coeffs[u] = 0.35 * headroom / (held * mag[u]) * uni(0.8, 1.2);
            if (s.is_gpt(u) && rate_base[u] > 0.0)
                r.rate_current_coeffs[u] = 0.35 * headroom / (held * rate_base[u] * 2.0) * uni(0.8, 1.2);
        }
        // big robots start on the free outer ring
        if (r.bounding_radius > 1.0) {
            r.initial_position = {0, pick(0, s.map.cols() - 1)};
        } else {
            r.initial_position = sample_free_cell(rng, s.map);
        }
        s.robots.push_back(std::move(r));
    }

    // ensure every trait has at least two usable providers
    for (int u = 0; u < nu; ++u) {
        int usable = 0;
        for (const auto& r : s.robots)
            usable += r.initial_traits[u] > 0.0 && (!s.is_gpt(u) || r.max_rates[u] > 0.0);
        for (int n = 0; usable < 2 && n < nn; ++n) {
            Robot& r = s.robots[(u + n) % nn];
            if (r.initial_traits[u] > 0.0 && (!s.is_gpt(u) || r.max_rates[u] > 0.0)) continue;
            r.initial_traits[u] = std::max(r.initial_traits[u], 0.5 * mag[u]);
            if (s.is_gpt(u)) r.max_rates[u] = std::max(r.max_rates[u], 0.5 * rate_base[u]);
            ++usable;
        }
    }

    // team capacities per trait, for coverable demand sampling
    std::vector<double> team_stock(nu, 0.0), best_stock(nu, 0.0), team_rate(nu, 0.0), med_stock(nu, 0.0),
        med_rate(nu, 0.0);
    for (int u = 0; u < nu; ++u) {
        std::vector<double> stocks, rates;
        for (const auto& r : s.robots) {
            if (s.is_gpt(u) && r.max_rates[u] <= 0.0) continue;  // unusable stock
            team_stock[u] += r.initial_traits[u];
            best_stock[u] = std::max(best_stock[u], r.initial_traits[u]);
            team_rate[u] += r.max_rates[u];
            if (r.initial_traits[u] > 0.0) {
                stocks.push_back(r.initial_traits[u]);
                if (r.max_rates[u] > 0.0) rates.push_back(r.max_rates[u]);
            }
        }
        std::sort(stocks.begin(), stocks.end());
        std::sort(rates.begin(), rates.end());
        med_stock[u] = stocks.empty() ? 0.0 : stocks[stocks.size() / 2];
        med_rate[u] = rates.empty() ? 0.0 : rates[rates.size() / 2];
    }

    // tasks: one to three demanded traits, always including the gradual slot
    // often enough that every scenario exercises rates. Demands are sampled
    // against the robots still jointly eligible for the task's NCT minimums,
    // and NCT demands on exhaustible traits reserve stock on an anchor robot
    // so the anchors' budgets cover all their tasks at once.
    std::vector<double> et_total(nu, 0.0);
    std::vector<std::vector<double>> committed(nn, std::vector<double>(nu, 0.0));
    for (int k = 0; k < nk; ++k) {
        Task t;
        t.name = "t" + std::to_string(k);
        t.desired_traits.assign(nu, 0.0);
        t.desired_rates.assign(nu, 0.0);
        t.cumulativity.assign(nu, Cumulativity::CT);
        const int demands = pick(1, std::min(2, nu));
        std::vector<int> traits_pool(nu);
        for (int u = 0; u < nu; ++u) traits_pool[u] = u;
        std::shuffle(traits_pool.begin(), traits_pool.end(), rng);
        if (k % 2 == 0) {
            // keep the gradual trait in front half the time
            auto it = std::find(traits_pool.begin(), traits_pool.end(), 0);
            std::iter_swap(traits_pool.begin(), it);
        }
        std::vector<std::pair<int, bool>> chosen;  // (trait, nct)
        for (int d = 0; d < demands; ++d) chosen.emplace_back(traits_pool[d], U(rng) < 0.35);
        std::stable_sort(chosen.begin(), chosen.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        std::vector<int> joint;  // robots eligible for every NCT demand so far
        for (int n = 0; n < nn; ++n) joint.push_back(n);
        for (auto [u, nct] : chosen) {
            // stock still uncommitted to earlier NCT anchors
            auto avail = [&](int n) {
                return s.is_et(u) ? s.robots[n].initial_traits[u] - committed[n][u]
                                  : s.robots[n].initial_traits[u];
            };
            auto usable = [&](int n) {
                return avail(n) > 0.0 && (!s.is_gpt(u) || s.robots[n].max_rates[u] > 0.0);
            };
            int anchor = -1;
            std::vector<double> stocks, rates;
            for (int n : joint) {
                if (!usable(n)) continue;
                stocks.push_back(avail(n));
                rates.push_back(s.robots[n].max_rates[u]);
                if (anchor < 0 || avail(n) > avail(anchor)) anchor = n;
            }
            if (anchor < 0) continue;  // nobody eligible holds this trait
            // cumulative demands sized for coalitions of one to three robots
            std::sort(stocks.rbegin(), stocks.rend());
            std::sort(rates.rbegin(), rates.rend());
            double top_stock = 0.0, top_rate = 0.0;
            for (size_t i = 0; i < stocks.size() && i < 3; ++i) top_stock += stocks[i];
            for (size_t i = 0; i < rates.size() && i < 3; ++i) top_rate += rates[i];
            double y, yd = 0.0;
            if (nct) {
                y = uni(0.25, 0.7) * avail(anchor);
                if (s.is_gpt(u)) yd = uni(0.3, 0.7) * s.robots[anchor].max_rates[u];
            } else {
                y = uni(0.4, 0.8) * top_stock;
                if (s.is_gpt(u)) yd = uni(0.3, 0.6) * top_rate;
            }
            y = std::round(y * 100.0) / 100.0;
            if (y <= 0.0) continue;
            t.desired_traits[u] = y;
            t.cumulativity[u] = nct ? Cumulativity::NCT : Cumulativity::CT;
            if (s.is_gpt(u)) {
                const double span_cap = t.desired_traits[u] / 8.0;     // >= 8 s provisioning
                const double span_floor = t.desired_traits[u] / 90.0;  // <= 90 s provisioning
                yd = std::clamp(yd, span_floor, span_cap);
                t.desired_rates[u] = std::max(0.01, std::round(yd * 1000.0) / 1000.0);
            }
            if (nct) {
                std::vector<int> still;
                for (int n : joint)
                    if (avail(n) >= t.desired_traits[u] &&
                        (!s.is_gpt(u) || s.robots[n].max_rates[u] >= t.desired_rates[u]))
                        still.push_back(n);
                joint = std::move(still);
                if (s.is_et(u))
                    for (int n : joint) committed[n][u] += t.desired_traits[u];
            } else if (s.is_et(u)) {
                // reserve the cumulative demand proportionally across the
                // robots that may end up providing it
                std::vector<std::pair<int, double>> shares;
                double pool = 0.0;
                for (int n : joint)
                    if (usable(n)) {
                        shares.emplace_back(n, avail(n));
                        pool += avail(n);
                    }
                if (pool > 0.0)
                    for (auto [n, share] : shares) committed[n][u] += y * share / pool;
            }
            if (s.is_et(u)) et_total[u] += t.desired_traits[u];
        }
        t.static_duration = std::round(uni(1.0, 8.0) * 10.0) / 10.0;
        t.start_position = sample_free_cell(rng, s.map);
        t.end_position = U(rng) < 0.5 ? t.start_position : sample_free_cell(rng, s.map);
        s.tasks.push_back(std::move(t));
    }
    // rescale exhaustible demands that exceed the team stock
    for (int u = 0; u < nu; ++u) {
        if (!s.is_et(u) || et_total[u] <= 0.75 * team_stock[u]) continue;
        const double f = 0.75 * team_stock[u] / et_total[u];
        for (auto& t : s.tasks)
            if (t.desired_traits[u] > 0.0) {
                t.desired_traits[u] = std::round(t.desired_traits[u] * f * 100.0) / 100.0;
                if (s.is_gpt(u) && t.desired_rates[u] > 0.0)
                    t.desired_rates[u] =
                        std::max(0.01, std::round(t.desired_rates[u] * f * 1000.0) / 1000.0);
            }
    }

    // temporal constraints: at least one of each kind
    {
        const int np = std::max(1, nk / 4);
        std::vector<std::pair<int, int>> cand;
        for (int i = 0; i < nk; ++i)
            for (int j = i + 1; j < nk; ++j) cand.emplace_back(i, j);
        std::shuffle(cand.begin(), cand.end(), rng);
        for (int i = 0; i < np && i < static_cast<int>(cand.size()); ++i)
            s.temporal.precedence.push_back(cand[i]);  // i<j ordering keeps P acyclic
        const int nm = std::max(0, nk / 6);
        int taken = 0;
        for (size_t i = np; i < cand.size() && taken < nm; ++i) {
            s.temporal.mutex_pairs.push_back(cand[i]);
            ++taken;
        }

        // rough serial-makespan scale for deadline bounds
        double busy = 0.0;
        for (const auto& t : s.tasks) {
            double span = t.static_duration;
            for (int u = 0; u < nu; ++u)
                if (s.is_gpt(u) && t.desired_rates[u] > 0.0)
                    span = std::max(span, t.static_duration + t.desired_traits[u] / t.desired_rates[u]);
            busy += span;
        }
        const double travel = (s.map.rows() + s.map.cols()) * cfg.cell_size * 2.5;
        const double horizon = busy + travel * nk / std::max(1, nn / 2);
        const double slack = 2.2 - 1.0 * cfg.tightness;
        std::uniform_int_distribution<int> T(0, nk - 1);
        const int dl_task = T(rng);
        s.temporal.absolute_deadlines.push_back({dl_task, Endpoint::Finish,
                                                 std::round(horizon * slack * 10.0) / 10.0});
        const auto [pi, pj] = s.temporal.precedence.front();
        double pair_span = s.tasks[pi].static_duration + s.tasks[pj].static_duration + travel;
        for (int u = 0; u < nu; ++u)
            if (s.is_gpt(u)) {
                if (s.tasks[pi].desired_rates[u] > 0.0)
                    pair_span += s.tasks[pi].desired_traits[u] / s.tasks[pi].desired_rates[u];
                if (s.tasks[pj].desired_rates[u] > 0.0)
                    pair_span += s.tasks[pj].desired_traits[u] / s.tasks[pj].desired_rates[u];
            }
        s.temporal.relative_deadlines.push_back(
            {pi, Endpoint::Start, pj, Endpoint::Finish,
             std::round(pair_span * (3.0 - 1.2 * cfg.tightness) * 10.0) / 10.0});
    }

    // battery sizing: enough for a heavy share of the tasks, idle across the
    // horizon bound and top-speed travel. The tightness knob shaves the
    // margin toward a budget that rate- and battery-aware planning still
    // fits but rate-blind provisioning overruns.
    {
        const MakespanBounds mb = makespan_bounds(s);
        const double margin = 2.2 - 1.55 * cfg.tightness;
        for (auto& r : s.robots) {
            const double work_current = r.idle_current + 0.5 * (r.max_current - r.idle_current);
            const double busy_share =
                mb.upper * std::clamp(2.0 * double(nk) / (nn * nk), 0.35, 0.9);
            const double task_e =
                task_energy(r.voltage, work_current, r.peukert_exponent, busy_share);
            const double idle_e = idle_energy(r, mb.upper);
            const double travel_len =
                (s.map.rows() + s.map.cols()) * cfg.cell_size * 1.5 * std::max(2.0, 2.0 * nk / nn);
            const double travel_e = transit_energy(r, travel_len, r.max_speed);
            const double need = task_e + idle_e + travel_e;
            r.battery_capacity = uni(0.7, 1.0) * margin * need;
        }
    }

    validate_scenario(s);
    return s;
}

}  // namespace detail

// Deterministic scenario generation; resamples until the collective
// sufficiency precheck passes (up to 100 attempts).
inline Scenario gen_scenario(uint64_t seed, const GenConfig& cfg = {}) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::mt19937_64 rng(seed * 1000003ULL + attempt);
        Scenario s = detail::gen_attempt(rng, cfg);
        if (feasibility_precheck(s).feasible) return s;
    }
    throw Error("scenario generation failed the feasibility precheck 100 times; relax the config");
}

}  // namespace traits
