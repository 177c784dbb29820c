// Command-line planner: generate scenarios, compute plans, audit solutions
// and run benchmark sweeps.
//
// Exit codes for `plan`: 0 solution written, 2 no solution (timeout or
// exhausted search), 3 infeasible at the collective-sufficiency precheck,
// 1 input or I/O errors. `validate` exits 0 only for a feasible plan.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "traits/traits.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw traits::Error("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw traits::Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw traits::Error("write failed for '" + path + "'");
}

std::string base_dir(const std::string& path) {
    const auto pos = path.find_last_of('/');
    return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

// Gantt rows: one line per task with start, finish and the coalition.
std::string gantt_data(const traits::Scenario& s, const traits::Solution& sol) {
    std::ostringstream out;
    out << "task,start,finish,coalition\n";
    for (int k = 0; k < s.num_tasks(); ++k) {
        out << s.tasks[k].name << ',' << sol.schedule.start[k] << ',' << sol.schedule.finish[k] << ',';
        bool first = true;
        for (int n = 0; n < s.num_robots(); ++n)
            if (sol.allocation.at(k, n)) {
                if (!first) out << ' ';
                out << s.robots[n].name;
                first = false;
            }
        out << '\n';
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"battery-aware multi-robot task allocation and scheduling"};
    app.require_subcommand(1);

    double alpha = 0.5, gamma = 0.5, timeout = 300.0;
    uint64_t seed = 1;
    int workers = 1;
    bool verbose = false;
    app.add_option("--alpha", alpha, "allocation-quality blend in (0,1)")
        ->envname("TRAITS_ALPHA");
    app.add_option("--gamma", gamma, "trait/rate mismatch blend in (0,1)")->envname("TRAITS_GAMMA");
    app.add_option("--timeout", timeout, "search timeout in seconds")->envname("TRAITS_TIMEOUT");
    app.add_option("--seed", seed, "random seed")->envname("TRAITS_SEED");
    app.add_option("--workers", workers, "worker thread count")->envname("TRAITS_WORKERS");
    app.add_flag("--verbose", verbose, "stream per-expansion progress")->envname("TRAITS_VERBOSE");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random scenario");
    std::string gen_out = "scenario.json";
    int gen_robots = 0, gen_tasks = 0, gen_traits = 0;
    double gen_tightness = 0.0;
    gen->add_option("-o,--output", gen_out, "scenario file to write");
    gen->add_option("--robots", gen_robots, "robot count (0: sample 5..30)");
    gen->add_option("--tasks", gen_tasks, "task count (0: sample 5..40)");
    gen->add_option("--traits", gen_traits, "trait count (0: sample 3..5)");
    gen->add_option("--tightness", gen_tightness, "0 relaxed .. 1 tight budgets");

    // plan
    auto* plan = app.add_subcommand("plan", "compute a plan for a scenario");
    std::string plan_in, plan_out = "solution.json", gantt_out;
    plan->add_option("scenario", plan_in, "scenario JSON file")->required();
    plan->add_option("-o,--output", plan_out, "solution file to write");
    plan->add_option("--gantt", gantt_out, "also write gantt CSV data");

    // validate
    auto* val = app.add_subcommand("validate", "audit a solution against a scenario");
    std::string val_scenario, val_solution, val_report = "report.json";
    val->add_option("scenario", val_scenario, "scenario JSON file")->required();
    val->add_option("solution", val_solution, "solution JSON file")->required();
    val->add_option("-o,--output", val_report, "violation report to write");

    // bench
    auto* ben = app.add_subcommand("bench", "run a benchmark sweep");
    std::string ben_results = "results.csv", ben_heatmap = "heatmap.csv";
    int ben_count = 3, ben_tasks = 5, ben_robots = 5, ben_traits = 4;
    double ben_tightness = 0.0;
    ben->add_option("--count", ben_count, "scenarios per (K,N) cell");
    ben->add_option("--tasks", ben_tasks, "task count K");
    ben->add_option("--robots", ben_robots, "robot count N");
    ben->add_option("--traits", ben_traits, "trait count U");
    ben->add_option("--tightness", ben_tightness, "0 relaxed .. 1 tight budgets");
    ben->add_option("--results", ben_results, "results CSV path");
    ben->add_option("--heatmap", ben_heatmap, "under-resourced grid CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            traits::GenConfig cfg;
            cfg.num_robots = gen_robots;
            cfg.num_tasks = gen_tasks;
            cfg.num_traits = gen_traits;
            cfg.tightness = gen_tightness;
            cfg.alpha = alpha;
            cfg.gamma = gamma;
            cfg.timeout = timeout;
            traits::Scenario s = traits::gen_scenario(seed, cfg);
            write_file(gen_out, traits::serialize_scenario(s));
            std::cerr << "wrote " << gen_out << " (" << s.num_robots() << " robots, " << s.num_tasks()
                      << " tasks, " << s.num_traits() << " traits)\n";
            return 0;
        }

        if (plan->parsed()) {
            traits::Scenario s = traits::parse_scenario(read_file(plan_in), base_dir(plan_in));
            traits::Router router(s.map);
            traits::SearchOptions opt;
            opt.alpha = alpha;
            opt.gamma = gamma;
            opt.timeout_s = timeout;
            opt.workers = workers;
            if (verbose) opt.progress = &std::cerr;
            auto outcome = traits::search(s, router, opt);
            switch (outcome.status) {
                case traits::SearchOutcome::Status::Solution: {
                    write_file(plan_out, traits::serialize_solution(s, *outcome.solution));
                    if (!gantt_out.empty()) write_file(gantt_out, gantt_data(s, *outcome.solution));
                    std::cerr << "solution: makespan " << outcome.solution->schedule.makespan << " s, "
                              << outcome.expansions << " expansions, " << outcome.runtime_s << " s\n";
                    return 0;
                }
                case traits::SearchOutcome::Status::Timeout:
                case traits::SearchOutcome::Status::Exhausted:
                    std::cerr << "no solution: " << outcome.reason << "\n";
                    return 2;
                case traits::SearchOutcome::Status::PrecheckFailed:
                    std::cerr << "infeasible: " << outcome.reason << "\n";
                    return 3;
            }
        }

        if (val->parsed()) {
            traits::Scenario s = traits::parse_scenario(read_file(val_scenario), base_dir(val_scenario));
            traits::Solution sol = traits::parse_solution(read_file(val_solution), s);
            traits::Router router(s.map);
            auto report = traits::validate_plan(s, sol, router);
            write_file(val_report, traits::serialize_report(report));
            std::cerr << (report.plan_feasible ? "plan feasible\n" : "plan violates constraints\n");
            return report.plan_feasible ? 0 : 4;
        }

        if (ben->parsed()) {
            traits::BenchConfig cfg;
            cfg.alpha = alpha;
            cfg.gamma = gamma;
            cfg.timeout_s = timeout;
            cfg.workers = workers;
            cfg.gen.num_traits = ben_traits;
            cfg.gen.tightness = ben_tightness;
            for (int i = 0; i < ben_count; ++i)
                cfg.jobs.push_back({seed + static_cast<uint64_t>(i), ben_tasks, ben_robots});
            auto results = traits::bench(cfg);
            write_file(ben_results, results.results_csv());
            write_file(ben_heatmap, results.heatmap_csv());
            std::cerr << "wrote " << ben_results << " and " << ben_heatmap << "\n";
            return 0;
        }
    } catch (const traits::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
