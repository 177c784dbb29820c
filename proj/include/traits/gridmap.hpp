#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "traits/errors.hpp"

namespace traits {

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell& o) const { return row == o.row && col == o.col; }
    bool operator!=(const Cell& o) const { return !(*this == o); }
    bool operator<(const Cell& o) const { return row < o.row || (row == o.row && col < o.col); }
};

// Occupancy grid with per-radius inflated views. Immutable after load; the
// inflation cache is guarded so concurrent readers may share one map.
class GridMap {
public:
    GridMap() = default;

    GridMap(double cell_size, int rows, int cols, std::vector<uint8_t> occupied)
        : cell_size_(cell_size), rows_(rows), cols_(cols), occupied_(std::move(occupied)) {
        if (cell_size_ <= 0.0) throw std::invalid_argument("cell size must be positive");
        if (rows_ <= 0 || cols_ <= 0) throw std::invalid_argument("map must be non-empty");
        if (static_cast<int>(occupied_.size()) != rows_ * cols_)
            throw std::invalid_argument("occupancy bitmap size mismatch");
        free_cells_ = 0;
        for (auto o : occupied_)
            if (!o) ++free_cells_;
        if (free_cells_ == 0) throw std::invalid_argument("map has no free cells");
    }

    GridMap(const GridMap& o)
        : cell_size_(o.cell_size_), rows_(o.rows_), cols_(o.cols_), occupied_(o.occupied_),
          free_cells_(o.free_cells_) {}
    GridMap& operator=(const GridMap& o) {
        if (this != &o) {
            cell_size_ = o.cell_size_;
            rows_ = o.rows_;
            cols_ = o.cols_;
            occupied_ = o.occupied_;
            free_cells_ = o.free_cells_;
            std::lock_guard<std::mutex> lk(cache_mutex_);
            inflated_.clear();
        }
        return *this;
    }

    double cell_size() const { return cell_size_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int free_cells() const { return free_cells_; }

    bool in_bounds(Cell c) const {
        return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
    }
    bool occupied(Cell c) const { return occupied_[idx(c)] != 0; }

    // Cell blocked for a robot of the given bounding radius: some obstacle
    // cell center lies within `radius` of this cell's center.
    const std::vector<uint8_t>& inflated(double radius) const {
        const long key = radius_key(radius);
        {
            std::lock_guard<std::mutex> lk(cache_mutex_);
            auto it = inflated_.find(key);
            if (it != inflated_.end()) return *it->second;
        }
        auto grid = std::make_unique<std::vector<uint8_t>>(compute_inflated(radius));
        std::lock_guard<std::mutex> lk(cache_mutex_);
        auto [it, inserted] = inflated_.emplace(key, std::move(grid));
        return *it->second;
    }

    bool blocked(Cell c, double radius) const { return inflated(radius)[idx(c)] != 0; }

    size_t idx(Cell c) const { return static_cast<size_t>(c.row) * cols_ + c.col; }

    // radius classes quantized to 1 mm so near-identical radii share a bitmap
    static long radius_key(double radius) { return std::lround(radius * 1000.0); }

    bool operator==(const GridMap& o) const {
        return cell_size_ == o.cell_size_ && rows_ == o.rows_ && cols_ == o.cols_ &&
               occupied_ == o.occupied_;
    }

private:
    std::vector<uint8_t> compute_inflated(double radius) const {
        std::vector<uint8_t> out(occupied_);
        if (radius <= 0.0) return out;
        const int reach = static_cast<int>(std::ceil(radius / cell_size_));
        const double r2 = radius * radius;
        for (int row = 0; row < rows_; ++row) {
            for (int col = 0; col < cols_; ++col) {
                if (!occupied_[idx({row, col})]) continue;
                for (int dr = -reach; dr <= reach; ++dr) {
                    for (int dc = -reach; dc <= reach; ++dc) {
                        Cell c{row + dr, col + dc};
                        if (!in_bounds(c)) continue;
                        const double d2 =
                            (dr * cell_size_) * (dr * cell_size_) + (dc * cell_size_) * (dc * cell_size_);
                        if (d2 <= r2) out[idx(c)] = 1;
                    }
                }
            }
        }
        return out;
    }

    double cell_size_ = 1.0;
    int rows_ = 1, cols_ = 1;
    std::vector<uint8_t> occupied_{0};
    int free_cells_ = 1;
    mutable std::mutex cache_mutex_;
    mutable std::map<long, std::unique_ptr<std::vector<uint8_t>>> inflated_;
};

// Map file format: first line `cell_size <meters>`, then the character grid
// of `.` (free) and `#` (occupied).
inline GridMap load_map(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty map file");
    std::istringstream header(line);
    std::string tag;
    double cell_size = 0.0;
    if (!(header >> tag >> cell_size) || tag != "cell_size")
        throw ParseError("map header must be `cell_size <meters>`");
    if (!(cell_size > 0.0)) throw ParseError("cell size must be positive");

    std::vector<std::string> grid_lines;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        grid_lines.push_back(line);
        if (grid_lines.size() > 1 && line.size() != grid_lines.front().size())
            throw ParseError("ragged map row at line " + std::to_string(lineno));
        for (size_t i = 0; i < line.size(); ++i)
            if (line[i] != '.' && line[i] != '#')
                throw ParseError("unknown map character '" + std::string(1, line[i]) + "' at line " +
                                   std::to_string(lineno) + ", column " + std::to_string(i + 1));
    }
    if (grid_lines.empty()) throw ParseError("map has no grid rows");
    const int rows = static_cast<int>(grid_lines.size());
    const int cols = static_cast<int>(grid_lines.front().size());
    std::vector<uint8_t> occ(static_cast<size_t>(rows) * cols, 0);
    int free_cells = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            occ[static_cast<size_t>(r) * cols + c] = grid_lines[r][c] == '#' ? 1 : 0;
            if (grid_lines[r][c] == '.') ++free_cells;
        }
    if (free_cells == 0) throw ParseError("map has no free cells");
    return GridMap(cell_size, rows, cols, std::move(occ));
}

inline std::string serialize_map(const GridMap& m) {
    std::ostringstream out;
    out << "cell_size " << m.cell_size() << "\n";
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) out << (m.occupied({r, c}) ? '#' : '.');
        out << "\n";
    }
    return out.str();
}

// Approximate grid diameter (longest shortest-path distance between free
// cells) via two BFS passes on the uninflated 4-connected grid, scaled by
// cell size. A lower bound on the true diameter.
inline double bfs_diameter_estimate(const GridMap& m) {
    auto bfs = [&](Cell src, Cell* farthest) {
        std::vector<int> dist(static_cast<size_t>(m.rows()) * m.cols(), -1);
        std::deque<Cell> q;
        dist[m.idx(src)] = 0;
        q.push_back(src);
        int best = 0;
        Cell best_cell = src;
        while (!q.empty()) {
            Cell c = q.front();
            q.pop_front();
            const int d = dist[m.idx(c)];
            if (d > best) {
                best = d;
                best_cell = c;
            }
            const Cell nbrs[4] = {{c.row - 1, c.col}, {c.row + 1, c.col},
                                  {c.row, c.col - 1}, {c.row, c.col + 1}};
            for (Cell nb : nbrs) {
                if (!m.in_bounds(nb) || m.occupied(nb)) continue;
                if (dist[m.idx(nb)] >= 0) continue;
                dist[m.idx(nb)] = d + 1;
                q.push_back(nb);
            }
        }
        if (farthest) *farthest = best_cell;
        return best;
    };
    Cell start{0, 0};
    bool found = false;
    for (int r = 0; r < m.rows() && !found; ++r)
        for (int c = 0; c < m.cols() && !found; ++c)
            if (!m.occupied({r, c})) {
                start = {r, c};
                found = true;
            }
    Cell far{0, 0};
    bfs(start, &far);
    const int steps = bfs(far, nullptr);
    return steps * m.cell_size();
}

}  // namespace traits
