#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "traits/model.hpp"

namespace traits {

// Shortest-path queries on the radius-inflated grid. 8-connected with
// sqrt(2)-cost diagonals; diagonal steps may not cut corners (both adjacent
// orthogonal cells must be free). Distances are memoized per (cell pair,
// radius class); reads are shared, inserts serialized.
class Router {
public:
    explicit Router(const GridMap& map) : map_(map) {}

    const GridMap& map() const { return map_; }

    struct PathResult {
        double length = 0.0;          // m
        std::vector<Cell> cells;      // inclusive of both endpoints
    };

    double path_length(Cell a, Cell b, double radius) const {
        if (a == b) {
            check_free(a, radius);
            return 0.0;
        }
        const Key key = make_key(a, b, radius);
        {
            std::shared_lock lk(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        const double len = astar(a, b, radius).length;
        std::unique_lock lk(mutex_);
        cache_.emplace(key, len);
        return len;
    }

    PathResult path(Cell a, Cell b, double radius) const {
        if (a == b) {
            check_free(a, radius);
            return {0.0, {a}};
        }
        return astar(a, b, radius);
    }

private:
    using Key = std::tuple<int, int, int, int, long>;

    Key make_key(Cell a, Cell b, double radius) const {
        if (b < a) std::swap(a, b);  // symmetric metric
        return {a.row, a.col, b.row, b.col, GridMap::radius_key(radius)};
    }

    void check_free(Cell c, double radius) const {
        if (!map_.in_bounds(c))
            throw RoutingError("cell (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                               ") lies outside the map");
        if (map_.blocked(c, radius))
            throw RoutingError("cell (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                               ") is blocked for bounding radius " + std::to_string(radius));
    }

    PathResult astar(Cell a, Cell b, double radius) const {
        check_free(a, radius);
        check_free(b, radius);
        const auto& blocked = map_.inflated(radius);
        const int rows = map_.rows(), cols = map_.cols();
        const double cell = map_.cell_size();
        const double diag = std::sqrt(2.0) * cell;
        const size_t total = static_cast<size_t>(rows) * cols;

        auto heuristic = [&](Cell c) {
            // octile distance, admissible for this move set
            const double dr = std::abs(c.row - b.row), dc = std::abs(c.col - b.col);
            return cell * (std::max(dr, dc) - std::min(dr, dc)) + diag * std::min(dr, dc);
        };

        std::vector<double> g(total, std::numeric_limits<double>::infinity());
        std::vector<int> parent(total, -1);
        using QEntry = std::pair<double, size_t>;  // (f, index)
        std::priority_queue<QEntry, std::vector<QEntry>, std::greater<>> open;
        g[map_.idx(a)] = 0.0;
        open.push({heuristic(a), map_.idx(a)});

        const int drs[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
        const int dcs[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

        while (!open.empty()) {
            auto [f, idx] = open.top();
            open.pop();
            const Cell c{static_cast<int>(idx) / cols, static_cast<int>(idx) % cols};
            if (f > g[idx] + heuristic(c) + 1e-12) continue;  // stale entry
            if (c == b) break;
            for (int d = 0; d < 8; ++d) {
                const Cell nb{c.row + drs[d], c.col + dcs[d]};
                if (nb.row < 0 || nb.row >= rows || nb.col < 0 || nb.col >= cols) continue;
                if (blocked[map_.idx(nb)]) continue;
                const bool diagonal = drs[d] != 0 && dcs[d] != 0;
                if (diagonal) {
                    if (blocked[map_.idx({c.row + drs[d], c.col})]) continue;
                    if (blocked[map_.idx({c.row, c.col + dcs[d]})]) continue;
                }
                const double step = diagonal ? diag : cell;
                const size_t ni = map_.idx(nb);
                if (g[idx] + step < g[ni] - 1e-15) {
                    g[ni] = g[idx] + step;
                    parent[ni] = static_cast<int>(idx);
                    open.push({g[ni] + heuristic(nb), ni});
                }
            }
        }

        const size_t bi = map_.idx(b);
        if (!std::isfinite(g[bi]))
            throw RoutingError("no path between (" + std::to_string(a.row) + "," +
                               std::to_string(a.col) + ") and (" + std::to_string(b.row) + "," +
                               std::to_string(b.col) + ") for bounding radius " + std::to_string(radius));
        PathResult res;
        res.length = g[bi];
        for (int at = static_cast<int>(bi); at >= 0; at = parent[at])
            res.cells.push_back({at / cols, at % cols});
        std::reverse(res.cells.begin(), res.cells.end());
        return res;
    }

    const GridMap& map_;
    mutable std::shared_mutex mutex_;
    mutable std::map<Key, double> cache_;
};

// Widest bounding radius in a coalition; 0 for an empty coalition.
inline double widest_radius(const Scenario& s, const std::vector<int>& coalition) {
    double r = 0.0;
    for (int n : coalition) r = std::max(r, s.robots[n].bounding_radius);
    return r;
}

struct TransitionDurations {
    std::vector<double> initial;                 // ini_k, per task
    std::map<std::pair<int, int>, double> pair;  // Delta_ij for ordered pairs
};

// Lower bounds on transit times: ini_k for reaching each task from the
// robots' start cells, Delta_ij for robots shared between tasks i and j.
// Pairs with disjoint coalitions get Delta = 0.
inline TransitionDurations transition_durations(const Scenario& s, const Allocation& a,
                                                const std::vector<double>& inter_velocity,
                                                const Router& router,
                                                const std::vector<std::pair<int, int>>& pairs) {
    TransitionDurations out;
    const int nk = s.num_tasks();
    out.initial.assign(nk, 0.0);
    for (int k = 0; k < nk; ++k) {
        double ini = 0.0;
        for (int n = 0; n < s.num_robots(); ++n) {
            if (!a.at(k, n)) continue;
            const double len = router.path_length(s.robots[n].initial_position,
                                                  s.tasks[k].start_position,
                                                  s.robots[n].bounding_radius);
            if (len > 0.0) {
                if (!(inter_velocity[n] > 0.0))
                    throw RoutingError("robot '" + s.robots[n].name +
                                       "' must travel but has zero transition velocity");
                ini = std::max(ini, len / inter_velocity[n]);
            }
        }
        out.initial[k] = ini;
    }
    for (auto [i, j] : pairs) {
        double delta = 0.0;
        for (int n = 0; n < s.num_robots(); ++n) {
            if (!a.at(i, n) || !a.at(j, n)) continue;
            const double len = router.path_length(s.tasks[i].end_position, s.tasks[j].start_position,
                                                  s.robots[n].bounding_radius);
            if (len > 0.0) {
                if (!(inter_velocity[n] > 0.0))
                    throw RoutingError("robot '" + s.robots[n].name +
                                       "' must travel but has zero transition velocity");
                delta = std::max(delta, len / inter_velocity[n]);
            }
        }
        out.pair[{i, j}] = delta;
    }
    return out;
}

}  // namespace traits
