#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "traits/model.hpp"

namespace traits {

// Minimum-makespan scheduling under precedence, mutex and deadline
// constraints. Fixing every mutex orientation reduces the problem to a
// simple temporal network solved exactly by longest-path propagation; the
// orientations themselves are searched by best-first branch-and-bound with
// the orientation-free relaxation as lower bound.

struct SchedulerInput {
    std::vector<double> durations;                  // d_k
    std::vector<double> initial;                    // ini_k
    std::map<std::pair<int, int>, double> transition;  // Delta_ij; absent pairs are 0
    std::vector<std::pair<int, int>> precedence;
    std::vector<std::pair<int, int>> mutexes;       // declared plus shared-robot pairs
    std::vector<AbsoluteDeadline> absolute;
    std::vector<RelativeDeadline> relative;

    double delta(int i, int j) const {
        auto it = transition.find({i, j});
        return it == transition.end() ? 0.0 : it->second;
    }
    int num_tasks() const { return static_cast<int>(durations.size()); }
};

namespace detail {

struct StnEdge {
    int from, to;
    double weight;
};

inline int start_node(int k) { return 1 + k; }
inline int finish_node(int k, int nk) { return 1 + nk + k; }

inline int endpoint_node(int task, Endpoint e, int nk) {
    return e == Endpoint::Start ? start_node(task) : finish_node(task, nk);
}

// orientation: -1 unoriented, 1 = i before j, 0 = j before i
inline std::vector<StnEdge> build_edges(const SchedulerInput& in, const std::vector<int8_t>& orient) {
    const int nk = in.num_tasks();
    std::vector<StnEdge> edges;
    edges.reserve(2 * nk + in.precedence.size() + in.mutexes.size() + in.absolute.size() +
                  in.relative.size());
    for (int k = 0; k < nk; ++k) {
        edges.push_back({0, start_node(k), in.initial[k]});
        edges.push_back({start_node(k), finish_node(k, nk), in.durations[k]});
    }
    for (auto [i, j] : in.precedence)
        edges.push_back({finish_node(i, nk), start_node(j), in.delta(i, j)});
    for (size_t m = 0; m < in.mutexes.size(); ++m) {
        if (orient[m] < 0) continue;
        const auto [i, j] = in.mutexes[m];
        if (orient[m] == 1)
            edges.push_back({finish_node(i, nk), start_node(j), in.delta(i, j)});
        else
            edges.push_back({finish_node(j, nk), start_node(i), in.delta(j, i)});
    }
    for (const auto& d : in.absolute)
        edges.push_back({endpoint_node(d.task, d.endpoint, nk), 0, -d.bound});
    for (const auto& d : in.relative)
        edges.push_back({endpoint_node(d.second_task, d.second_endpoint, nk),
                         endpoint_node(d.first_task, d.first_endpoint, nk), -d.bound});
    return edges;
}

}  // namespace detail

// Componentwise-earliest consistent times for a fully or partially oriented
// instance, or infeasible on a positive cycle (which covers violated
// deadlines). Bellman-Ford longest path over 2K+1 nodes.
inline Schedule stn_earliest(const SchedulerInput& in, const std::vector<int8_t>& orient) {
    const int nk = in.num_tasks();
    const int nv = 2 * nk + 1;
    const auto edges = detail::build_edges(in, orient);
    std::vector<double> dist(nv, -std::numeric_limits<double>::infinity());
    dist[0] = 0.0;
    for (int round = 0; round < nv - 1; ++round) {
        bool changed = false;
        for (const auto& e : edges) {
            if (dist[e.from] == -std::numeric_limits<double>::infinity()) continue;
            const double cand = dist[e.from] + e.weight;
            if (cand > dist[e.to] + 1e-12) {
                dist[e.to] = cand;
                changed = true;
            }
        }
        if (!changed) break;
    }
    Schedule out;
    for (const auto& e : edges) {
        if (dist[e.from] == -std::numeric_limits<double>::infinity()) continue;
        if (dist[e.from] + e.weight > dist[e.to] + 1e-9) {
            out.feasible = false;  // positive cycle: inconsistent constraints
            return out;
        }
    }
    out.feasible = true;
    out.start.resize(nk);
    out.finish.resize(nk);
    out.makespan = 0.0;
    for (int k = 0; k < nk; ++k) {
        out.start[k] = dist[detail::start_node(k)];
        out.finish[k] = dist[detail::finish_node(k, nk)];
        out.makespan = std::max(out.makespan, out.finish[k]);
    }
    return out;
}

inline Schedule stn_earliest(const SchedulerInput& in) {
    return stn_earliest(in, std::vector<int8_t>(in.mutexes.size(), -1));
}

namespace detail {

inline bool mutex_separated(const SchedulerInput& in, const Schedule& sched, int m, bool& i_first) {
    const auto [i, j] = in.mutexes[m];
    if (sched.start[j] >= sched.finish[i] + in.delta(i, j) - 1e-9) {
        i_first = true;
        return true;
    }
    if (sched.start[i] >= sched.finish[j] + in.delta(j, i) - 1e-9) {
        i_first = false;
        return true;
    }
    return false;
}

// 2^|M| feasibility probe used by conflict extraction.
inline bool any_orientation_feasible(const SchedulerInput& in) {
    const size_t m = in.mutexes.size();
    for (uint64_t mask = 0; mask < (uint64_t(1) << m); ++mask) {
        std::vector<int8_t> orient(m);
        for (size_t b = 0; b < m; ++b) orient[b] = (mask >> b) & 1 ? 1 : 0;
        if (stn_earliest(in, orient).feasible) return true;
    }
    return false;
}

inline std::vector<std::string> minimal_conflict(const SchedulerInput& in) {
    if (in.mutexes.size() > 8)
        return {"conflict extraction skipped: more than 8 mutex pairs"};
    struct Item {
        enum Kind { Prec, Mutex, Abs, Rel } kind;
        size_t index;
    };
    std::vector<Item> items;
    for (size_t i = 0; i < in.precedence.size(); ++i) items.push_back({Item::Prec, i});
    for (size_t i = 0; i < in.mutexes.size(); ++i) items.push_back({Item::Mutex, i});
    for (size_t i = 0; i < in.absolute.size(); ++i) items.push_back({Item::Abs, i});
    for (size_t i = 0; i < in.relative.size(); ++i) items.push_back({Item::Rel, i});
    std::vector<bool> removed(items.size(), false);

    auto probe = [&]() {
        SchedulerInput t = in;
        t.precedence.clear();
        t.mutexes.clear();
        t.absolute.clear();
        t.relative.clear();
        for (size_t i = 0; i < items.size(); ++i) {
            if (removed[i]) continue;
            switch (items[i].kind) {
                case Item::Prec: t.precedence.push_back(in.precedence[items[i].index]); break;
                case Item::Mutex: t.mutexes.push_back(in.mutexes[items[i].index]); break;
                case Item::Abs: t.absolute.push_back(in.absolute[items[i].index]); break;
                case Item::Rel: t.relative.push_back(in.relative[items[i].index]); break;
            }
        }
        return any_orientation_feasible(t);
    };

    for (size_t i = 0; i < items.size(); ++i) {
        removed[i] = true;
        if (probe()) removed[i] = false;  // needed for infeasibility
    }
    std::vector<std::string> out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (removed[i]) continue;
        const auto& it = items[i];
        switch (it.kind) {
            case Item::Prec:
                out.push_back("precedence " + std::to_string(in.precedence[it.index].first) + "<" +
                              std::to_string(in.precedence[it.index].second));
                break;
            case Item::Mutex:
                out.push_back("mutex " + std::to_string(in.mutexes[it.index].first) + "-" +
                              std::to_string(in.mutexes[it.index].second));
                break;
            case Item::Abs:
                out.push_back(std::string("absolute deadline on ") +
                              to_string(in.absolute[it.index].endpoint) + " of task " +
                              std::to_string(in.absolute[it.index].task));
                break;
            case Item::Rel:
                out.push_back("relative deadline " + std::to_string(in.relative[it.index].first_task) +
                              "->" + std::to_string(in.relative[it.index].second_task));
                break;
        }
    }
    if (out.empty()) out.push_back("task bounds alone are inconsistent");
    return out;
}

}  // namespace detail

// Optimal makespan over continuous times and mutex orientations.
inline Schedule schedule(const SchedulerInput& in) {
    const size_t nm = in.mutexes.size();

    struct Node {
        double bound;
        long seq;
        std::vector<int8_t> orient;
        Schedule sched;
        bool operator>(const Node& o) const {
            return bound > o.bound + 1e-15 || (std::abs(bound - o.bound) <= 1e-15 && seq > o.seq);
        }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<>> pq;
    long seq = 0;

    {
        std::vector<int8_t> root(nm, -1);
        Schedule sched = stn_earliest(in, root);
        if (!sched.feasible) {
            sched.conflict = detail::minimal_conflict(in);
            return sched;
        }
        pq.push({sched.makespan, seq++, std::move(root), std::move(sched)});
    }

    while (!pq.empty()) {
        Node node = pq.top();
        pq.pop();

        // branch on the violated pair with the largest overlap
        int branch = -1;
        double best_overlap = -std::numeric_limits<double>::infinity();
        for (size_t m = 0; m < nm; ++m) {
            if (node.orient[m] >= 0) continue;
            bool i_first;
            if (detail::mutex_separated(in, node.sched, static_cast<int>(m), i_first)) continue;
            const auto [i, j] = in.mutexes[m];
            const double overlap = std::min(node.sched.finish[i], node.sched.finish[j]) -
                                   std::max(node.sched.start[i], node.sched.start[j]);
            if (overlap > best_overlap + 1e-12) {
                best_overlap = overlap;
                branch = static_cast<int>(m);
            }
        }

        if (branch < 0) {
            // the relaxed optimum already separates every pair: optimal
            Schedule out = std::move(node.sched);
            out.orientations.clear();
            for (size_t m = 0; m < nm; ++m) {
                bool i_first = true;
                if (node.orient[m] >= 0)
                    i_first = node.orient[m] == 1;
                else
                    detail::mutex_separated(in, out, static_cast<int>(m), i_first);
                out.orientations.push_back({in.mutexes[m].first, in.mutexes[m].second, i_first});
            }
            return out;
        }

        for (int dir = 1; dir >= 0; --dir) {
            std::vector<int8_t> orient = node.orient;
            orient[branch] = static_cast<int8_t>(dir);
            Schedule sched = stn_earliest(in, orient);
            if (!sched.feasible) continue;
            pq.push({sched.makespan, seq++, std::move(orient), std::move(sched)});
        }
    }

    Schedule out;
    out.feasible = false;
    out.conflict = detail::minimal_conflict(in);
    return out;
}

}  // namespace traits
