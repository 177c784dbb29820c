#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "traits/distributor.hpp"
#include "traits/heuristics.hpp"
#include "traits/model.hpp"
#include "traits/router.hpp"
#include "traits/scheduler.hpp"

namespace traits {

struct SearchOptions {
    double alpha = -1.0;    // <0: take from scenario
    double gamma = -1.0;
    double timeout_s = -1.0;
    int workers = 1;
    bool prune_useless = true;
    // skip flips onto tasks whose demands the parent already meets; on
    // exhaustion the search reruns without this pruning
    bool residual_prune = true;
    bool schedule_deadlines = true;
    DistributorOptions dist;
    std::ostream* progress = nullptr;  // one JSON line per expansion
};

struct SearchOutcome {
    enum class Status { Solution, Timeout, Exhausted, PrecheckFailed };
    Status status = Status::Exhausted;
    std::string reason;
    std::optional<Solution> solution;
    long expansions = 0;
    double runtime_s = 0.0;
    double queue_best_tetaq = std::numeric_limits<double>::infinity();  // at exit
    std::vector<TraceEntry> trace;
};

// One-flip successor generation: every unset (task, robot) cell, skipping
// robots that cannot contribute any demanded trait and allocations already
// visited.
inline std::vector<Allocation> generate_successors(const Scenario& s, const Allocation& a,
                                                   bool prune_useless = true,
                                                   const std::unordered_set<std::string>* visited = nullptr) {
    std::vector<Allocation> out;
    const int nk = s.num_tasks(), nn = s.num_robots();
    for (int k = 0; k < nk; ++k)
        for (int n = 0; n < nn; ++n) {
            if (a.at(k, n)) continue;
            if (prune_useless) {
                bool useful = false;
                for (int u = 0; u < s.num_traits() && !useful; ++u) {
                    if (s.tasks[k].desired_traits[u] <= 0.0 && s.tasks[k].desired_rates[u] <= 0.0)
                        continue;
                    if (s.robots[n].initial_traits[u] <= 0.0) continue;
                    if (s.is_gpt(u) && s.robots[n].max_rates[u] <= 0.0) continue;
                    useful = true;
                }
                if (!useful) continue;
            }
            Allocation child = a;
            child.set(k, n, true);
            if (visited && visited->count(child.key())) continue;
            out.push_back(std::move(child));
        }
    return out;
}

namespace detail {

// Tasks forced to run disjointly because they share a robot; precedence
// already orders its pairs, declared mutexes keep their slot.
inline std::vector<std::pair<int, int>> auto_mutex_pairs(const Scenario& s, const Allocation& a) {
    std::vector<std::pair<int, int>> out;
    const int nk = s.num_tasks();
    for (int i = 0; i < nk; ++i)
        for (int j = i + 1; j < nk; ++j) {
            bool shared = false;
            for (int n = 0; n < s.num_robots() && !shared; ++n) shared = a.at(i, n) && a.at(j, n);
            if (!shared) continue;
            bool covered = false;
            for (auto [p, q] : s.temporal.precedence)
                if ((p == i && q == j) || (p == j && q == i)) covered = true;
            for (auto [p, q] : s.temporal.mutex_pairs)
                if ((p == i && q == j) || (p == j && q == i)) covered = true;
            if (!covered) out.emplace_back(i, j);
        }
    return out;
}

struct NodeEval {
    bool valid = false;
    std::string why;
    ProvisionPlan plan;
    Schedule sched;
    std::vector<std::pair<int, int>> auto_mutex;
    double apr_value = 0.0, nsq_value = 0.0, tetaq_value = 0.0;
    bool nsq_clamped = false;
};

inline NodeEval evaluate_allocation(const Scenario& s, const Allocation& a, const Router& router,
                                    const SearchOptions& opt, const MakespanBounds& bounds) {
    NodeEval ev;
    try {
        ev.plan = distribute(s, a, router, opt.dist);
    } catch (const BatteryInfeasible& e) {
        ev.why = e.what();
        return ev;
    } catch (const RoutingError& e) {
        ev.why = e.what();
        return ev;
    }

    ev.auto_mutex = auto_mutex_pairs(s, a);
    SchedulerInput in;
    in.durations = ev.plan.task_durations;
    in.precedence = s.temporal.precedence;
    in.mutexes = s.temporal.mutex_pairs;
    in.mutexes.insert(in.mutexes.end(), ev.auto_mutex.begin(), ev.auto_mutex.end());
    if (opt.schedule_deadlines) {
        in.absolute = s.temporal.absolute_deadlines;
        in.relative = s.temporal.relative_deadlines;
    }
    std::vector<std::pair<int, int>> pairs = in.precedence;
    for (auto [i, j] : in.mutexes) {
        pairs.emplace_back(i, j);
        pairs.emplace_back(j, i);
    }
    try {
        auto trans = transition_durations(s, a, ev.plan.inter_velocities, router, pairs);
        in.initial = trans.initial;
        in.transition = std::move(trans.pair);
    } catch (const RoutingError& e) {
        ev.why = e.what();
        return ev;
    }
    ev.sched = schedule(in);
    if (!ev.sched.feasible) {
        ev.why = "no consistent schedule";
        return ev;
    }

    const double gamma = opt.gamma >= 0.0 ? opt.gamma : s.gamma;
    const double alpha = opt.alpha >= 0.0 ? opt.alpha : s.alpha;
    double sum_y = 0.0, sum_yd = 0.0;
    for (const auto& t : s.tasks)
        for (int u = 0; u < s.num_traits(); ++u) {
            sum_y += t.desired_traits[u];
            if (s.is_gpt(u)) sum_yd += t.desired_rates[u];
        }
    ev.apr_value = apr(ev.plan.trait_mismatch, opt.dist.rate_aware ? ev.plan.rate_mismatch : 0.0, sum_y,
                       opt.dist.rate_aware ? sum_yd : 0.0, gamma);
    if (bounds.upper > bounds.lower) {
        NsqValue v = nsq(ev.sched.makespan, bounds.lower, bounds.upper);
        ev.nsq_value = v.value;
        ev.nsq_clamped = v.clamped_high;
    } else {
        // degenerate bounds: score by acceptability alone
        ev.nsq_clamped = ev.sched.makespan > bounds.upper + 1e-9;
        ev.nsq_value = ev.nsq_clamped ? 1.0 : 0.0;
    }
    ev.tetaq_value = tetaq(alpha, ev.apr_value, ev.nsq_value);
    ev.valid = true;
    return ev;
}

// Motion plans implied by the allocation and schedule: initial leg, one
// intra-task leg per task, inter-task legs between consecutive assignments.
inline std::vector<std::vector<PathSegment>> build_motion_plans(const Scenario& s, const Allocation& a,
                                                                const ProvisionPlan& plan,
                                                                const Schedule& sched,
                                                                const Router& router) {
    std::vector<std::vector<PathSegment>> out(s.num_robots());
    for (int n = 0; n < s.num_robots(); ++n) {
        auto tasks = a.tasks_of(n);
        if (tasks.empty()) continue;
        std::sort(tasks.begin(), tasks.end(), [&](int i, int j) {
            if (sched.start[i] != sched.start[j]) return sched.start[i] < sched.start[j];
            return i < j;
        });
        const Robot& r = s.robots[n];
        Cell at = r.initial_position;
        bool first = true;
        for (int k : tasks) {
            PathSegment leg;
            leg.kind = first ? PathSegment::Kind::Initial : PathSegment::Kind::Inter;
            leg.task = k;
            leg.from = at;
            leg.to = s.tasks[k].start_position;
            auto p = router.path(at, s.tasks[k].start_position, r.bounding_radius);
            leg.length = p.length;
            leg.cells = std::move(p.cells);
            leg.speed = plan.inter_velocities[n];
            out[n].push_back(std::move(leg));

            PathSegment intra;
            intra.kind = PathSegment::Kind::Intra;
            intra.task = k;
            intra.from = s.tasks[k].start_position;
            intra.to = s.tasks[k].end_position;
            const double radius = widest_radius(s, a.coalition(k));
            auto ip = router.path(s.tasks[k].start_position, s.tasks[k].end_position, radius);
            intra.length = ip.length;
            intra.cells = std::move(ip.cells);
            intra.speed = plan.intra_speeds[k];
            out[n].push_back(std::move(intra));

            at = s.tasks[k].end_position;
            first = false;
        }
    }
    return out;
}

}  // namespace detail

// Greedy best-first search over allocations: pop the lowest-tetaq node,
// accept once the trait and rate mismatches vanish and the makespan fits the
// upper bound, otherwise score every one-flip successor and push.
inline SearchOutcome search(const Scenario& s, const Router& router, const SearchOptions& opt = {}) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };
    const double timeout = opt.timeout_s > 0.0 ? opt.timeout_s : s.timeout_s;

    SearchOutcome out;
    auto pre = feasibility_precheck(s);
    if (!pre.feasible) {
        out.status = SearchOutcome::Status::PrecheckFailed;
        out.reason = pre.reason;
        out.runtime_s = elapsed();
        return out;
    }
    const MakespanBounds bounds = makespan_bounds(s);
    SearchOptions eff = opt;
    if (eff.dist.horizon < 0.0) eff.dist.horizon = bounds.upper;

    struct QNode {
        double tetaq_value, apr_value;
        int depth;
        long seq;
        Allocation alloc;
        detail::NodeEval eval;
    };
    struct Cmp {
        bool operator()(const QNode& a, const QNode& b) const {
            if (a.tetaq_value != b.tetaq_value) return a.tetaq_value > b.tetaq_value;
            if (a.apr_value != b.apr_value) return a.apr_value > b.apr_value;
            if (a.depth != b.depth) return a.depth > b.depth;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<QNode, std::vector<QNode>, Cmp> pq;
    std::unordered_set<std::string> visited;
    long seq = 0;

    Allocation root(s.num_tasks(), s.num_robots());
    visited.insert(root.key());
    {
        auto ev = detail::evaluate_allocation(s, root, router, eff, bounds);
        if (ev.valid)
            pq.push({ev.tetaq_value, ev.apr_value, 0, seq++, root, std::move(ev)});
    }

    const double accept_apr = 1e-9;
    while (!pq.empty()) {
        if (elapsed() > timeout) {
            out.status = SearchOutcome::Status::Timeout;
            out.reason = "timeout after " + std::to_string(out.expansions) + " expansions";
            out.queue_best_tetaq = pq.top().tetaq_value;
            out.runtime_s = elapsed();
            return out;
        }
        QNode node = pq.top();
        pq.pop();
        ++out.expansions;
        out.trace.push_back({out.expansions, node.eval.apr_value, node.eval.nsq_value,
                             node.eval.tetaq_value});
        if (opt.progress)
            (*opt.progress) << "{\"expanded\":" << out.expansions << ",\"tetaq\":" << node.eval.tetaq_value
                            << ",\"apr\":" << node.eval.apr_value << ",\"nsq\":" << node.eval.nsq_value
                            << ",\"elapsed\":" << elapsed() << "}\n";

        if (node.eval.apr_value <= accept_apr && !node.eval.nsq_clamped) {
            Solution sol;
            sol.allocation = node.alloc;
            sol.plan = std::move(node.eval.plan);
            sol.schedule = std::move(node.eval.sched);
            sol.auto_mutex_pairs = std::move(node.eval.auto_mutex);
            sol.paths = detail::build_motion_plans(s, sol.allocation, sol.plan, sol.schedule, router);
            sol.trace = out.trace;
            sol.expansions = out.expansions;
            sol.runtime_s = elapsed();
            out.status = SearchOutcome::Status::Solution;
            out.solution = std::move(sol);
            out.queue_best_tetaq =
                pq.empty() ? std::numeric_limits<double>::infinity() : pq.top().tetaq_value;
            out.runtime_s = elapsed();
            return out;
        }

        auto successors = generate_successors(s, node.alloc, eff.prune_useless, &visited);
        if (eff.residual_prune) {
            std::vector<Allocation> kept;
            kept.reserve(successors.size());
            for (auto& child : successors) {
                int fk = -1, fn = -1;
                for (int k = 0; k < s.num_tasks() && fk < 0; ++k)
                    for (int n = 0; n < s.num_robots(); ++n)
                        if (child.at(k, n) != node.alloc.at(k, n)) {
                            fk = k;
                            fn = n;
                            break;
                        }
                bool helps = false;
                for (int u = 0; u < s.num_traits() && !helps; ++u) {
                    const bool short_cell = node.eval.plan.trait_shortfall[fk][u] > 1e-9 ||
                                            node.eval.plan.rate_shortfall[fk][u] > 1e-9;
                    if (!short_cell) continue;
                    if (s.robots[fn].initial_traits[u] <= 0.0) continue;
                    if (s.is_gpt(u) && s.robots[fn].max_rates[u] <= 0.0) continue;
                    helps = true;
                }
                if (helps) kept.push_back(std::move(child));
            }
            successors = std::move(kept);
        }
        for (const auto& child : successors) visited.insert(child.key());

        std::vector<detail::NodeEval> evals(successors.size());
        const int workers = std::max(1, opt.workers);
        if (workers == 1 || successors.size() <= 1) {
            for (size_t i = 0; i < successors.size(); ++i)
                evals[i] = detail::evaluate_allocation(s, successors[i], router, eff, bounds);
        } else {
            std::atomic<size_t> next{0};
            std::vector<std::exception_ptr> errors(workers);
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    try {
                        for (size_t i = next.fetch_add(1); i < successors.size(); i = next.fetch_add(1))
                            evals[i] = detail::evaluate_allocation(s, successors[i], router, eff, bounds);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            for (auto& t : pool) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (size_t i = 0; i < successors.size(); ++i) {
            if (!evals[i].valid) continue;
            pq.push({evals[i].tetaq_value, evals[i].apr_value, node.depth + 1, seq++, successors[i],
                     std::move(evals[i])});
        }
    }

    if (eff.residual_prune) {
        // the residual pruning can in rare exhaustible-budget cases hide the
        // only completion; retry without it
        SearchOptions retry = opt;
        retry.residual_prune = false;
        if (retry.timeout_s <= 0.0) retry.timeout_s = s.timeout_s;
        retry.timeout_s = std::max(1e-3, retry.timeout_s - elapsed());
        SearchOutcome again = search(s, router, retry);
        again.expansions += out.expansions;
        again.runtime_s += elapsed();
        return again;
    }
    out.status = SearchOutcome::Status::Exhausted;
    out.reason = "allocation space exhausted after " + std::to_string(out.expansions) + " expansions";
    out.runtime_s = elapsed();
    return out;
}

}  // namespace traits
