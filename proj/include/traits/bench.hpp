#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "traits/generator.hpp"
#include "traits/search.hpp"
#include "traits/validate.hpp"

namespace traits {

// Batch benchmarking: generate, solve and audit scenarios, emit CSV rows
// plus the under-resourced heatmap grid.

struct BenchJob {
    uint64_t seed = 0;
    int num_tasks = 5;
    int num_robots = 5;
};

struct BenchConfig {
    std::vector<BenchJob> jobs;
    GenConfig gen;
    double alpha = 0.5, gamma = 0.5;
    double timeout_s = 300.0;
    int workers = 1;
};

struct BenchRow {
    uint64_t seed = 0;
    int num_tasks = 0, num_robots = 0;
    double alpha = 0.5, gamma = 0.5;
    double runtime_s = 0.0;
    double makespan = 0.0;
    long expansions = 0;
    std::string verdict;
    bool has_report = false;
    ViolationReport report;
};

struct BenchCellStats {
    int count = 0;
    double mean_runtime = 0.0, std_runtime = 0.0;
    double mean_makespan = 0.0;
    double mean_under_resourced = 0.0;
};

struct BenchResults {
    std::vector<BenchRow> rows;
    std::map<std::pair<int, int>, BenchCellStats> cells;  // keyed (K, N)

    std::string results_csv() const {
        std::ostringstream out;
        out << "seed,K,N,alpha,gamma,runtime_s,makespan_s,expansions,verdict,plan_feasible,"
               "task_trait_insufficiency,rate_insufficiency,under_resourced_robots,"
               "c_rating_violations,battery_violations,deadline_violations\n";
        char buf[64];
        auto num = [&](double v, const char* fmt = "%.6f") {
            std::snprintf(buf, sizeof buf, fmt, v);
            return std::string(buf);
        };
        for (const auto& r : rows) {
            out << r.seed << ',' << r.num_tasks << ',' << r.num_robots << ',' << num(r.alpha, "%.3f")
                << ',' << num(r.gamma, "%.3f") << ',' << num(r.runtime_s, "%.3f") << ',';
            if (r.has_report)
                out << num(r.makespan, "%.3f");
            out << ',' << r.expansions << ',' << r.verdict << ',';
            if (r.has_report) {
                out << (r.report.plan_feasible ? 1 : 0) << ',' << num(r.report.task_trait_insufficiency)
                    << ',' << num(r.report.rate_insufficiency) << ','
                    << num(r.report.under_resourced_robots) << ',' << num(r.report.c_rating_violations)
                    << ',' << num(r.report.battery_violations) << ',' << num(r.report.deadline_violations);
            } else {
                out << ",,,,,,";
            }
            out << '\n';
        }
        return out.str();
    }

    std::string heatmap_csv() const {
        std::ostringstream out;
        out << "K,N,count,mean_under_resourced\n";
        char buf[64];
        for (const auto& [key, st] : cells) {
            std::snprintf(buf, sizeof buf, "%.6f", st.mean_under_resourced);
            out << key.first << ',' << key.second << ',' << st.count << ',' << buf << '\n';
        }
        return out.str();
    }
};

inline BenchResults bench(const BenchConfig& cfg) {
    BenchResults res;
    res.rows.resize(cfg.jobs.size());

    auto run_one = [&](size_t i) {
        const BenchJob& job = cfg.jobs[i];
        BenchRow row;
        row.seed = job.seed;
        row.num_tasks = job.num_tasks;
        row.num_robots = job.num_robots;
        row.alpha = cfg.alpha;
        row.gamma = cfg.gamma;
        try {
            GenConfig g = cfg.gen;
            g.num_tasks = job.num_tasks;
            g.num_robots = job.num_robots;
            g.alpha = cfg.alpha;
            g.gamma = cfg.gamma;
            g.timeout = cfg.timeout_s;
            Scenario s = gen_scenario(job.seed, g);
            Router router(s.map);
            SearchOptions opt;
            opt.timeout_s = cfg.timeout_s;
            SearchOutcome outcome = search(s, router, opt);
            row.runtime_s = outcome.runtime_s;
            row.expansions = outcome.expansions;
            switch (outcome.status) {
                case SearchOutcome::Status::Solution: {
                    row.verdict = "solution";
                    row.makespan = outcome.solution->schedule.makespan;
                    row.report = validate_plan(s, *outcome.solution, router);
                    row.has_report = true;
                    break;
                }
                case SearchOutcome::Status::Timeout: row.verdict = "timeout"; break;
                case SearchOutcome::Status::Exhausted: row.verdict = "exhausted"; break;
                case SearchOutcome::Status::PrecheckFailed: row.verdict = "precheck_failed"; break;
            }
        } catch (const Error& e) {
            row.verdict = "error";
        }
        res.rows[i] = std::move(row);
    };

    const int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        for (size_t i = 0; i < cfg.jobs.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < cfg.jobs.size(); i = next.fetch_add(1)) run_one(i);
            });
        for (auto& t : pool) t.join();
    }

    // per-cell aggregates
    std::map<std::pair<int, int>, std::vector<const BenchRow*>> by_cell;
    for (const auto& r : res.rows) by_cell[{r.num_tasks, r.num_robots}].push_back(&r);
    for (const auto& [key, group] : by_cell) {
        BenchCellStats st;
        st.count = static_cast<int>(group.size());
        double sum_rt = 0.0, sum_rt2 = 0.0, sum_mk = 0.0, sum_ur = 0.0;
        int nmk = 0, nur = 0;
        for (const auto* r : group) {
            sum_rt += r->runtime_s;
            sum_rt2 += r->runtime_s * r->runtime_s;
            if (r->has_report) {
                sum_mk += r->makespan;
                ++nmk;
                sum_ur += r->report.under_resourced_robots;
                ++nur;
            }
        }
        st.mean_runtime = st.count ? sum_rt / st.count : 0.0;
        st.std_runtime =
            st.count ? std::sqrt(std::max(0.0, sum_rt2 / st.count - st.mean_runtime * st.mean_runtime))
                     : 0.0;
        st.mean_makespan = nmk ? sum_mk / nmk : 0.0;
        st.mean_under_resourced = nur ? sum_ur / nur : 0.0;
        res.cells[key] = st;
    }
    return res;
}

}  // namespace traits
