#include "hitmap/local_map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "hitmap/errors.hpp"

namespace hitmap {

LocalMetricMap::LocalMetricMap(double side_length, double resolution, int recenter_step_cells)
    : step_(std::max(1, recenter_step_cells)) {
    if (!(side_length > 0.0) || !(resolution > 0.0)) {
        throw ConfigError("local map side length and resolution must be positive");
    }
    const int n = static_cast<int>(std::lround(side_length / resolution));
    if (n <= 0) throw ConfigError("local map smaller than one cell");
    geom_ = GridGeometry{Vec2{0.0, 0.0}, n, n, resolution};
    cells_.assign(geom_.cell_count(), MapCell{});
}

Pose2 LocalMetricMap::center() const {
    const Vec2 c = geom_.center();
    return {c.x, c.y, 0.0, Frame::Odometry};
}

void LocalMetricMap::recenter(Vec2 position) {
    const double block = step_ * geom_.resolution;
    const long long cx = step_ * std::llround(position.x / block);
    const long long cy = step_ * std::llround(position.y / block);
    const long long ox = cx - geom_.width / 2;
    const long long oy = cy - geom_.height / 2;
    if (ox == origin_ix_ && oy == origin_iy_) {
        geom_.origin = {static_cast<double>(origin_ix_) * geom_.resolution,
                        static_cast<double>(origin_iy_) * geom_.resolution};
        return;
    }
    std::vector<MapCell> moved(cells_.size());
    const long long dx = ox - origin_ix_;
    const long long dy = oy - origin_iy_;
    for (int j = 0; j < geom_.height; ++j) {
        const long long sj = j + dy;
        if (sj < 0 || sj >= geom_.height) continue;
        for (int i = 0; i < geom_.width; ++i) {
            const long long si = i + dx;
            if (si < 0 || si >= geom_.width) continue;
            moved[geom_.index({i, j})] = cells_[geom_.index({static_cast<int>(si), static_cast<int>(sj)})];
        }
    }
    cells_ = std::move(moved);
    origin_ix_ = ox;
    origin_iy_ = oy;
    geom_.origin = {static_cast<double>(ox) * geom_.resolution, static_cast<double>(oy) * geom_.resolution};
}

void LocalMetricMap::observe(CellIndex c, CellState observed, double height) {
    MapCell& cell = cells_[geom_.index(c)];
    if (observed == CellState::Obstacle) {
        cell.state = CellState::Obstacle;
    } else if (cell.state != CellState::Obstacle) {
        cell.state = CellState::Free;
    }
    ++cell.observation_count;
    const double delta = height - cell.height_mean;
    cell.height_mean += delta / cell.observation_count;
    cell.height_m2 += delta * (height - cell.height_mean);
    ++writes_;
}

void LocalMetricMap::integrate(const RangeScan& scan, const Pose2& odom_pose) {
    if (odom_pose.frame() != Frame::Odometry || scan.origin.frame() != Frame::Odometry) {
        throw FrameMismatch("local map integrates odometry-frame scans only");
    }
    recenter(odom_pose.position());
    const Vec2 start = odom_pose.position();
    const double min_span = 1e-9 * geom_.resolution;
    for (std::size_t b = 0; b < scan.beams.size(); ++b) {
        const Beam& beam = scan.beams[b];
        const double angle = odom_pose.theta() + beam.bearing;
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        walk_ray(
            geom_, start, dir, beam.range,
            [&](CellIndex c, double t_enter, double t_exit) {
                if (!geom_.contains(c)) return false;
                if (t_exit - t_enter < min_span && t_enter > 0.0) return true;
                observe(c, CellState::Free, scan.height_at(b, 0.5 * (t_enter + t_exit)));
                return true;
            },
            [](CellIndex, CellIndex, double) { return true; });
        if (beam.hit) {
            const Vec2 p = start + (beam.range + 0.01 * geom_.resolution) * dir;
            if (const auto c = geom_.cell_of(p)) {
                observe(*c, CellState::Obstacle, scan.height_at(b, beam.range));
            }
        }
    }
}

LocalMetricMap integrate_scan(LocalMetricMap map, const RangeScan& scan, const Pose2& odom_pose) {
    map.integrate(scan, odom_pose);
    return map;
}

bool TraversabilityGrid::traversable_at(Vec2 p) const {
    const auto c = geometry.cell_of(p);
    return c && at(*c).traversable;
}

std::size_t TraversabilityGrid::traversable_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const TraversabilityCell& c) { return c.traversable; }));
}

TraversabilityGrid compute_traversability(const LocalMetricMap& map, const TraversabilityParams& params) {
    if (!(params.slope_threshold > 0.0) || !(params.roughness_threshold > 0.0)) {
        throw ConfigError("traversability thresholds must be positive");
    }
    const GridGeometry& g = map.geometry();
    TraversabilityGrid grid{g, std::vector<TraversabilityCell>(g.cell_count())};
    auto has_height = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= g.width || y >= g.height) return false;
        return map.cell({x, y}).state == CellState::Free;
    };
    auto h = [&](int x, int y) { return map.cell({x, y}).height_mean; };
    auto derivative = [&](int x, int y, int dx, int dy) {
        const bool fwd = has_height(x + dx, y + dy);
        const bool back = has_height(x - dx, y - dy);
        if (fwd && back) return (h(x + dx, y + dy) - h(x - dx, y - dy)) / (2.0 * g.resolution);
        if (fwd) return (h(x + dx, y + dy) - h(x, y)) / g.resolution;
        if (back) return (h(x, y) - h(x - dx, y - dy)) / g.resolution;
        return 0.0;
    };
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const MapCell& m = map.cell({x, y});
            TraversabilityCell& t = grid.at({x, y});
            if (m.state != CellState::Free) continue;
            const double slope = std::hypot(derivative(x, y, 1, 0), derivative(x, y, 0, 1));
            t.slope = static_cast<float>(slope);
            t.roughness = static_cast<float>(m.height_var());
            t.traversable = slope <= params.slope_threshold && m.height_var() <= params.roughness_threshold;
        }
    }
    return grid;
}

namespace {

void distance_transform_1d(const double* f, double* d, int n, int stride, std::vector<int>& v, std::vector<double>& z) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = 0;
    int first = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q * stride] < inf) {
            first = q;
            break;
        }
    }
    if (first < 0) {
        for (int q = 0; q < n; ++q) d[q * stride] = inf;
        return;
    }
    v[0] = first;
    z[0] = -inf;
    z[1] = inf;
    auto intersect = [&](int q, int r) {
        return ((f[q * stride] + static_cast<double>(q) * q) - (f[r * stride] + static_cast<double>(r) * r)) /
               (2.0 * (q - r));
    };
    for (int q = first + 1; q < n; ++q) {
        if (f[q * stride] == inf) continue;
        double s = intersect(q, v[static_cast<std::size_t>(k)]);
        while (s <= z[static_cast<std::size_t>(k)]) {
            --k;
            s = intersect(q, v[static_cast<std::size_t>(k)]);
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = inf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
        const int vk = v[static_cast<std::size_t>(k)];
        const double diff = static_cast<double>(q - vk);
        d[q * stride] = diff * diff + f[vk * stride];
    }
}

}  // namespace

std::vector<double> squared_distance_transform(int width, int height, const std::vector<bool>& seeds) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> f(n, inf);
    for (std::size_t i = 0; i < n; ++i) {
        if (seeds[i]) f[i] = 0.0;
    }
    std::vector<double> tmp(n, inf);
    const int longest = std::max(width, height);
    std::vector<int> v(static_cast<std::size_t>(longest) + 1);
    std::vector<double> z(static_cast<std::size_t>(longest) + 2);
    for (int x = 0; x < width; ++x) {
        distance_transform_1d(f.data() + x, tmp.data() + x, height, width, v, z);
    }
    std::vector<double> out(n, inf);
    for (int y = 0; y < height; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
        distance_transform_1d(tmp.data() + row, out.data() + row, width, 1, v, z);
    }
    return out;
}

TraversabilityGrid inflate_obstacles(TraversabilityGrid grid, double robot_radius) {
    if (robot_radius < 0.0) throw ConfigError("robot_radius must be non-negative");
    if (robot_radius == 0.0) return grid;
    const GridGeometry& g = grid.geometry;
    std::vector<bool> seeds(g.cell_count());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        seeds[i] = !grid.cells[i].traversable && !grid.cells[i].inflated;
    }
    const std::vector<double> d2 = squared_distance_transform(g.width, g.height, seeds);
    const double limit = robot_radius / g.resolution + 1e-9;
    const double limit2 = limit * limit;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        TraversabilityCell& c = grid.cells[i];
        if (c.traversable && d2[i] <= limit2) {
            c.traversable = false;
            c.inflated = true;
        }
    }
    return grid;
}

bool segment_traversable(const TraversabilityGrid& grid, Vec2 a, Vec2 b) {
    return for_each_segment_cell(grid.geometry, a, b, [&](CellIndex c) { return grid.traversable(c); });
}

Roadmap sample_roadmap(const TraversabilityGrid& grid, double sample_interval) {
    const GridGeometry& g = grid.geometry;
    if (sample_interval < g.resolution - 1e-12) throw ConfigError("sample_interval must be >= grid resolution");
    Roadmap roadmap;
    roadmap.sample_interval = sample_interval;
    const Vec2 c = g.center();
    const int kx = static_cast<int>(std::ceil(0.5 * g.side_x() / sample_interval)) + 1;
    const int ky = static_cast<int>(std::ceil(0.5 * g.side_y() / sample_interval)) + 1;
    const int span_x = 2 * kx + 1;
    std::vector<int> lattice(static_cast<std::size_t>(span_x) * static_cast<std::size_t>(2 * ky + 1), -1);
    auto slot = [&](int i, int j) { return static_cast<std::size_t>(j + ky) * span_x + static_cast<std::size_t>(i + kx); };
    for (int j = -ky; j <= ky; ++j) {
        for (int i = -kx; i <= kx; ++i) {
            const Vec2 p{c.x + i * sample_interval, c.y + j * sample_interval};
            const auto cell = g.cell_of(p);
            if (!cell || !grid.at(*cell).traversable) continue;
            lattice[slot(i, j)] = roadmap.add_vertex(p);
        }
    }
    constexpr int offsets[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
    for (int j = -ky; j <= ky; ++j) {
        for (int i = -kx; i <= kx; ++i) {
            const int a = lattice[slot(i, j)];
            if (a < 0) continue;
            for (const auto& o : offsets) {
                const int ni = i + o[0];
                const int nj = j + o[1];
                if (ni < -kx || ni > kx || nj > ky) continue;
                const int b = lattice[slot(ni, nj)];
                if (b < 0) continue;
                if (segment_traversable(grid, roadmap.vertices[static_cast<std::size_t>(a)].position,
                                        roadmap.vertices[static_cast<std::size_t>(b)].position)) {
                    roadmap.add_edge(a, b);
                }
            }
        }
    }
    return roadmap;
}

namespace {

std::vector<bool> reachable_cells(const TraversabilityGrid& grid, CellIndex robot_cell) {
    const GridGeometry& g = grid.geometry;
    std::vector<bool> visited(g.cell_count(), false);
    std::deque<CellIndex> queue{robot_cell};
    visited[g.index(robot_cell)] = true;
    constexpr int d4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        for (const auto& d : d4) {
            const CellIndex n{c.x + d[0], c.y + d[1]};
            if (!grid.passable(n) || visited[g.index(n)]) continue;
            visited[g.index(n)] = true;
            queue.push_back(n);
        }
    }
    return visited;
}

std::vector<CellIndex> frontier_cells_from(const LocalMetricMap& map, const GridGeometry& g,
                                           const std::vector<bool>& visited, bool border_is_unknown) {
    std::vector<CellIndex> out;
    constexpr int d4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            if (!visited[g.index({x, y})]) continue;
            for (const auto& d : d4) {
                const CellIndex n{x + d[0], y + d[1]};
                const bool unknown =
                    g.contains(n) ? map.cell(n).state == CellState::Unknown : border_is_unknown;
                if (unknown) {
                    out.push_back({x, y});
                    break;
                }
            }
        }
    }
    return out;
}

}  // namespace

std::vector<CellIndex> find_frontier_cells(const LocalMetricMap& map, const TraversabilityGrid& grid,
                                           CellIndex robot_cell, const FrontierParams& params) {
    if (!grid.traversable(robot_cell)) {
        throw RobotCellNotTraversable("robot cell (" + std::to_string(robot_cell.x) + ", " +
                                      std::to_string(robot_cell.y) + ")");
    }
    const auto visited = reachable_cells(grid, robot_cell);
    return frontier_cells_from(map, grid.geometry, visited, params.border_is_unknown);
}

std::vector<std::vector<CellIndex>> cluster_frontier_cells(const std::vector<CellIndex>& cells) {
    std::map<CellIndex, std::size_t> index;
    for (std::size_t i = 0; i < cells.size(); ++i) index.emplace(cells[i], i);
    std::vector<bool> done(cells.size(), false);
    std::vector<std::vector<CellIndex>> clusters;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (done[i]) continue;
        std::vector<CellIndex> cluster;
        std::deque<std::size_t> queue{i};
        done[i] = true;
        while (!queue.empty()) {
            const CellIndex c = cells[queue.front()];
            queue.pop_front();
            cluster.push_back(c);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const auto it = index.find({c.x + dx, c.y + dy});
                    if (it == index.end() || done[it->second]) continue;
                    done[it->second] = true;
                    queue.push_back(it->second);
                }
            }
        }
        std::sort(cluster.begin(), cluster.end(),
                  [](CellIndex a, CellIndex b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

Roadmap detect_frontiers(const LocalMetricMap& map, const TraversabilityGrid& grid, const Roadmap& roadmap,
                         CellIndex robot_cell, const FrontierParams& params) {
    if (!grid.traversable(robot_cell)) {
        throw RobotCellNotTraversable("robot cell (" + std::to_string(robot_cell.x) + ", " +
                                      std::to_string(robot_cell.y) + ")");
    }
    const GridGeometry& g = grid.geometry;
    const auto visited = reachable_cells(grid, robot_cell);
    const auto cells = frontier_cells_from(map, g, visited, params.border_is_unknown);

    Roadmap out = roadmap;
    std::vector<int> candidates;
    for (auto& v : out.vertices) {
        v.is_frontier = false;
        v.frontier_origin = FrontierOrigin::Local;
        const auto c = g.cell_of(v.position);
        if (c && visited[g.index(*c)]) candidates.push_back(v.id);
    }
    if (candidates.empty()) return out;
    for (const auto& cluster : cluster_frontier_cells(cells)) {
        if (static_cast<int>(cluster.size()) < params.min_frontier_cells) continue;
        for (const CellIndex& fc : cluster) {
            const Vec2 p = g.cell_center(fc);
            int best = -1;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (int id : candidates) {
                const double d2 = squared_distance(out.vertices[static_cast<std::size_t>(id)].position, p);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = id;
                }
            }
            out.vertices[static_cast<std::size_t>(best)].is_frontier = true;
        }
    }
    return out;
}

}  // namespace hitmap
