#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

#include "hitmap/geometry.hpp"

namespace hitmap {

struct CellIndex {
    int x = 0;
    int y = 0;
    friend constexpr bool operator==(CellIndex, CellIndex) = default;
    friend constexpr auto operator<=>(CellIndex, CellIndex) = default;
};

/// Axis-aligned square-cell lattice. Cell (i, j) covers
/// [origin.x + i*res, origin.x + (i+1)*res) x [origin.y + j*res, origin.y + (j+1)*res).
struct GridGeometry {
    Vec2 origin;
    int width = 0;
    int height = 0;
    double resolution = 1.0;

    std::size_t cell_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    bool contains(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
    std::size_t index(CellIndex c) const {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
    }
    CellIndex cell_at(std::size_t idx) const {
        return {static_cast<int>(idx % static_cast<std::size_t>(width)),
                static_cast<int>(idx / static_cast<std::size_t>(width))};
    }
    /// Unbounded lattice index of a point (may lie outside the grid).
    CellIndex lattice_cell(Vec2 p) const {
        return {static_cast<int>(std::floor((p.x - origin.x) / resolution)),
                static_cast<int>(std::floor((p.y - origin.y) / resolution))};
    }
    std::optional<CellIndex> cell_of(Vec2 p) const {
        const CellIndex c = lattice_cell(p);
        if (!contains(c)) {
            return std::nullopt;
        }
        return c;
    }
    Vec2 cell_center(CellIndex c) const {
        return {origin.x + (c.x + 0.5) * resolution, origin.y + (c.y + 0.5) * resolution};
    }
    Vec2 center() const { return {origin.x + 0.5 * width * resolution, origin.y + 0.5 * height * resolution}; }
    double side_x() const { return width * resolution; }
    double side_y() const { return height * resolution; }

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Amanatides-Woo traversal of the ray `start + t * dir` for t in [0, max_t].
/// `visit(cell, t_enter, t_exit)` is called for each lattice cell in order and
/// returns false to stop. When the ray passes exactly through a lattice corner,
/// `corner(side_a, side_b, t)` is called with the two edge-adjacent cells before
/// the diagonal step; returning false stops the walk. Returns the parameter at
/// which the walk stopped.
template <class Visit, class Corner>
double walk_ray(const GridGeometry& geom, Vec2 start, Vec2 dir, double max_t, Visit&& visit, Corner&& corner) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double res = geom.resolution;
    CellIndex cell = geom.lattice_cell(start);
    const int step_x = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
    const int step_y = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
    auto boundary_t = [&](int c, double o, double s, double d, int step) {
        if (step == 0) return inf;
        const double edge = o + (step > 0 ? (c + 1) : c) * res;
        return (edge - s) / d;
    };
    double t_max_x = boundary_t(cell.x, geom.origin.x, start.x, dir.x, step_x);
    double t_max_y = boundary_t(cell.y, geom.origin.y, start.y, dir.y, step_y);
    const double t_delta_x = step_x == 0 ? inf : res / std::abs(dir.x);
    const double t_delta_y = step_y == 0 ? inf : res / std::abs(dir.y);
    double t = 0.0;
    while (true) {
        const double t_exit = std::min({t_max_x, t_max_y, max_t});
        if (!visit(cell, t, t_exit)) return t;
        if (t_exit >= max_t) return max_t;
        if (t_max_x < t_max_y) {
            cell.x += step_x;
            t = t_max_x;
            t_max_x += t_delta_x;
        } else if (t_max_y < t_max_x) {
            cell.y += step_y;
            t = t_max_y;
            t_max_y += t_delta_y;
        } else {
            t = t_max_x;
            if (!corner(CellIndex{cell.x + step_x, cell.y}, CellIndex{cell.x, cell.y + step_y}, t)) return t;
            cell.x += step_x;
            cell.y += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        }
    }
}

/// Visits every lattice cell touched by the closed segment [a, b], including
/// both edge-adjacent cells whenever the segment passes within `corner_eps`
/// (in ray parameter units) of a lattice corner. `visit(cell)` returns false
/// to abort; the function then returns false.
template <class Visit>
bool for_each_segment_cell(const GridGeometry& geom, Vec2 a, Vec2 b, Visit&& visit, double corner_eps = 1e-9) {
    const Vec2 d = b - a;
    const double len = norm(d);
    if (len == 0.0) {
        return visit(geom.lattice_cell(a));
    }
    const Vec2 dir{d.x / len, d.y / len};
    bool ok = true;
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double res = geom.resolution;
    CellIndex cell = geom.lattice_cell(a);
    const int step_x = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
    const int step_y = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
    auto boundary_t = [&](int c, double o, double s, double dd, int step) {
        if (step == 0) return inf;
        const double edge = o + (step > 0 ? (c + 1) : c) * res;
        return (edge - s) / dd;
    };
    double t_max_x = boundary_t(cell.x, geom.origin.x, a.x, dir.x, step_x);
    double t_max_y = boundary_t(cell.y, geom.origin.y, a.y, dir.y, step_y);
    const double t_delta_x = step_x == 0 ? inf : res / std::abs(dir.x);
    const double t_delta_y = step_y == 0 ? inf : res / std::abs(dir.y);
    const CellIndex last = geom.lattice_cell(b);
    const double eps = corner_eps * res;
    while (true) {
        if (!visit(cell)) return false;
        if (cell == last) break;
        const double next = std::min(t_max_x, t_max_y);
        if (next > len + eps) break;
        if (std::abs(t_max_x - t_max_y) <= eps) {
            if (!visit(CellIndex{cell.x + step_x, cell.y})) return false;
            if (!visit(CellIndex{cell.x, cell.y + step_y})) return false;
            cell.x += step_x;
            cell.y += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if (t_max_x < t_max_y) {
            cell.x += step_x;
            t_max_x += t_delta_x;
        } else {
            cell.y += step_y;
            t_max_y += t_delta_y;
        }
    }
    if (cell != last) {
        ok = visit(last);
    }
    return ok;
}

}  // namespace hitmap
