#include "hitmap/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "hitmap/local_map.hpp"

namespace hitmap {

BaselineGlobalMap::BaselineGlobalMap(double resolution, int chunk_cells) : res_(resolution), chunk_(chunk_cells) {
    geom_.resolution = resolution;
}

namespace {

long long floor_div(long long a, long long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

void BaselineGlobalMap::ensure_contains(Vec2 lo, Vec2 hi) {
    const long long ix0 = floor_div(static_cast<long long>(std::floor(lo.x / res_)), chunk_) * chunk_;
    const long long iy0 = floor_div(static_cast<long long>(std::floor(lo.y / res_)), chunk_) * chunk_;
    const long long ix1 = (floor_div(static_cast<long long>(std::floor(hi.x / res_)), chunk_) + 1) * chunk_;
    const long long iy1 = (floor_div(static_cast<long long>(std::floor(hi.y / res_)), chunk_) + 1) * chunk_;
    if (cells_.empty()) {
        origin_ix_ = ix0;
        origin_iy_ = iy0;
        geom_.width = static_cast<int>(ix1 - ix0);
        geom_.height = static_cast<int>(iy1 - iy0);
        geom_.origin = {origin_ix_ * res_, origin_iy_ * res_};
        cells_.assign(geom_.cell_count(), Cell::Unknown);
        return;
    }
    const long long nx0 = std::min(ix0, origin_ix_);
    const long long ny0 = std::min(iy0, origin_iy_);
    const long long nx1 = std::max(ix1, origin_ix_ + geom_.width);
    const long long ny1 = std::max(iy1, origin_iy_ + geom_.height);
    if (nx0 == origin_ix_ && ny0 == origin_iy_ && nx1 == origin_ix_ + geom_.width &&
        ny1 == origin_iy_ + geom_.height) {
        return;
    }
    GridGeometry ng = geom_;
    ng.width = static_cast<int>(nx1 - nx0);
    ng.height = static_cast<int>(ny1 - ny0);
    ng.origin = {nx0 * res_, ny0 * res_};
    std::vector<Cell> grown(ng.cell_count(), Cell::Unknown);
    const int dx = static_cast<int>(origin_ix_ - nx0);
    const int dy = static_cast<int>(origin_iy_ - ny0);
    for (int y = 0; y < geom_.height; ++y) {
        std::copy_n(cells_.begin() + static_cast<std::ptrdiff_t>(geom_.index({0, y})), geom_.width,
                    grown.begin() + static_cast<std::ptrdiff_t>(ng.index({dx, y + dy})));
    }
    origin_ix_ = nx0;
    origin_iy_ = ny0;
    geom_ = ng;
    cells_ = std::move(grown);
}

void BaselineGlobalMap::write(CellIndex c, Cell value) {
    Cell& cell = cells_[geom_.index(c)];
    if (value == Cell::Obstacle || cell != Cell::Obstacle) cell = value;
    ++writes_;
}

void BaselineGlobalMap::raycast(const RangeScan& scan, const Pose2& pose) {
    const Vec2 r{scan.max_range + res_, scan.max_range + res_};
    ensure_contains(pose.position() - r, pose.position() + r);
    const Vec2 start = pose.position();
    const double min_span = 1e-9 * res_;
    for (const Beam& beam : scan.beams) {
        const double angle = pose.theta() + beam.bearing;
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        walk_ray(
            geom_, start, dir, beam.range,
            [&](CellIndex c, double t_enter, double t_exit) {
                if (!geom_.contains(c)) return false;
                if (t_exit - t_enter < min_span && t_enter > 0.0) return true;
                write(c, Cell::Free);
                return true;
            },
            [](CellIndex, CellIndex, double) { return true; });
        if (beam.hit) {
            if (const auto c = geom_.cell_of(start + (beam.range + 0.01 * res_) * dir)) write(*c, Cell::Obstacle);
        }
    }
}

void BaselineGlobalMap::integrate(const RangeScan& scan, const Pose2& pose) {
    raycast(scan, pose);
    scans_.push_back(scan);
    poses_.push_back(pose);
    beams_ += scan.beams.size();
}

std::uint64_t BaselineGlobalMap::reintegrate(const std::vector<Pose2>& poses) {
    poses_ = poses;
    std::fill(cells_.begin(), cells_.end(), Cell::Unknown);
    const std::uint64_t before = writes_;
    for (std::size_t i = 0; i < scans_.size(); ++i) raycast(scans_[i], poses_[i]);
    return writes_ - before;
}

std::size_t BaselineGlobalMap::memory_bytes() const {
    return cells_.size() * sizeof(Cell) + beams_ * sizeof(Beam) + scans_.size() * sizeof(RangeScan) +
           poses_.size() * sizeof(Pose2);
}

std::optional<std::vector<Vec2>> plan_on_grid(const BaselineGlobalMap& map, Vec2 start, Vec2 goal,
                                              double robot_radius) {
    const GridGeometry& g = map.geometry();
    if (g.cell_count() == 0) return std::nullopt;
    const auto s = g.cell_of(start);
    if (!s) return std::nullopt;
    // The goal may lie outside the mapped bounds; aim for the nearest border cell.
    CellIndex t = g.lattice_cell(goal);
    t.x = std::clamp(t.x, 0, g.width - 1);
    t.y = std::clamp(t.y, 0, g.height - 1);

    std::vector<bool> seeds(g.cell_count());
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = map.at(g.cell_at(i)) == BaselineGlobalMap::Cell::Obstacle;
    const std::vector<double> d2 = squared_distance_transform(g.width, g.height, seeds);
    const double r_cells = robot_radius / g.resolution;
    auto blocked = [&](CellIndex c) {
        if (seeds[g.index(c)]) return true;
        return d2[g.index(c)] <= r_cells * r_cells + 1e-9;
    };

    const std::size_t n = g.cell_count();
    std::vector<double> cost(n, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> parent(n, -1);
    auto h = [&](CellIndex c) {
        const double dx = std::abs(c.x - t.x);
        const double dy = std::abs(c.y - t.y);
        return (std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy));
    };
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    const std::size_t si = g.index(*s);
    const std::size_t ti = g.index(t);
    cost[si] = 0.0;
    open.push({h(*s), si});
    constexpr int nb[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    bool found = false;
    while (!open.empty()) {
        const auto [f, ui] = open.top();
        open.pop();
        const CellIndex u = g.cell_at(ui);
        if (f > cost[ui] + h(u) + 1e-9) continue;
        if (ui == ti) {
            found = true;
            break;
        }
        for (const auto& d : nb) {
            const CellIndex v{u.x + d[0], u.y + d[1]};
            if (!g.contains(v)) continue;
            // The start cell may sit inside the inflation margin; let the robot leave it.
            if (blocked(v) && !(blocked(u) && !seeds[g.index(v)])) continue;
            if (d[0] != 0 && d[1] != 0 && (seeds[g.index({u.x + d[0], u.y})] || seeds[g.index({u.x, u.y + d[1]})])) {
                continue;
            }
            const double step = (d[0] != 0 && d[1] != 0) ? std::numbers::sqrt2 : 1.0;
            const std::size_t vi = g.index(v);
            if (cost[ui] + step < cost[vi]) {
                cost[vi] = cost[ui] + step;
                parent[vi] = static_cast<std::int64_t>(ui);
                open.push({cost[vi] + h(v), vi});
            }
        }
    }
    if (!found) return std::nullopt;
    std::vector<Vec2> path;
    for (std::int64_t i = static_cast<std::int64_t>(ti); i != -1; i = parent[static_cast<std::size_t>(i)]) {
        path.push_back(g.cell_center(g.cell_at(static_cast<std::size_t>(i))));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace hitmap
