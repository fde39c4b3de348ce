#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests.
// Oracles deliberately avoid the library's own search/flood helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hitmap/local_map.hpp"
#include "hitmap/planner.hpp"
#include "hitmap/roadmap.hpp"
#include "hitmap/topology.hpp"

namespace hitmap::testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// O(V^2) Dijkstra over an explicit edge list (no priority queue).
inline std::vector<double> naive_dijkstra(int n, const std::vector<RoadmapEdge>& edges, int source) {
    std::vector<std::vector<double>> w(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), kInf));
    for (const auto& e : edges) {
        auto& ab = w[static_cast<std::size_t>(e.a)][static_cast<std::size_t>(e.b)];
        ab = std::min(ab, e.length);
        w[static_cast<std::size_t>(e.b)][static_cast<std::size_t>(e.a)] = ab;
    }
    std::vector<double> d(static_cast<std::size_t>(n), kInf);
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    d[static_cast<std::size_t>(source)] = 0.0;
    for (int iter = 0; iter < n; ++iter) {
        int u = -1;
        for (int i = 0; i < n; ++i) {
            if (!done[static_cast<std::size_t>(i)] && (u < 0 || d[static_cast<std::size_t>(i)] < d[static_cast<std::size_t>(u)])) u = i;
        }
        if (u < 0 || d[static_cast<std::size_t>(u)] == kInf) break;
        done[static_cast<std::size_t>(u)] = true;
        for (int v = 0; v < n; ++v) {
            const double c = w[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
            if (c < kInf && d[static_cast<std::size_t>(u)] + c < d[static_cast<std::size_t>(v)]) {
                d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + c;
            }
        }
    }
    return d;
}

/// Random connected roadmap: a random spanning tree over scattered points
/// plus extra short edges.
inline Roadmap random_connected_roadmap(std::mt19937_64& rng, int n, double extent) {
    std::uniform_real_distribution<double> coord(0.0, extent);
    Roadmap r;
    r.sample_interval = 1.0;
    for (int i = 0; i < n; ++i) r.add_vertex({coord(rng), coord(rng)});
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> pick(0, i - 1);
        r.add_edge(i, pick(rng));
    }
    std::uniform_int_distribution<int> any(0, n - 1);
    const int extra = n * 2;
    for (int k = 0; k < extra; ++k) {
        const int a = any(rng);
        const int b = any(rng);
        if (a != b && distance(r.vertices[static_cast<std::size_t>(a)].position,
                               r.vertices[static_cast<std::size_t>(b)].position) < extent * 0.25) {
            r.add_edge(a, b);
        }
    }
    return r;
}

/// Random blobby occupancy for a local map; every cell gets a state. About
/// `unknown_share` of the area is Unknown, some of it walled in.
inline void randomize_states(LocalMetricMap& map, std::mt19937_64& rng, double unknown_share = 0.3) {
    const GridGeometry& g = map.geometry();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> rx(0, g.width - 1);
    std::uniform_int_distribution<int> ry(0, g.height - 1);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) map.cell({x, y}) = MapCell{CellState::Free, 1, 0.0, 0.0};
    }
    auto paint = [&](CellState s, int blobs, int max_r) {
        std::uniform_int_distribution<int> rr(1, max_r);
        for (int b = 0; b < blobs; ++b) {
            const int cx = rx(rng);
            const int cy = ry(rng);
            const int r = rr(rng);
            for (int y = cy - r; y <= cy + r; ++y) {
                for (int x = cx - r; x <= cx + r; ++x) {
                    if (!g.contains({x, y}) || (x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
                    MapCell& c = map.cell({x, y});
                    c.state = s;
                    c.observation_count = s == CellState::Unknown ? 0 : 1;
                }
            }
        }
    };
    const int area = g.width * g.height;
    paint(CellState::Unknown, std::max(1, static_cast<int>(unknown_share * area / 60.0)), 6);
    paint(CellState::Obstacle, std::max(1, area / 250), 3);
    // Occasional straight walls split the map into rooms.
    for (int k = 0; k < 2; ++k) {
        if (u(rng) < 0.5) continue;
        const int x = rx(rng);
        for (int y = 0; y < g.height; ++y) {
            if (u(rng) < 0.9) {
                map.cell({x, y}).state = CellState::Obstacle;
                map.cell({x, y}).observation_count = 1;
            }
        }
    }
}

/// Frontier cells by definition: Free cells 4-connected to `robot` through
/// Free cells, with at least one in-grid 4-neighbor that is Unknown.
inline std::set<CellIndex> brute_force_frontier_cells(const LocalMetricMap& map, CellIndex robot) {
    const GridGeometry& g = map.geometry();
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(g.height), std::vector<bool>(static_cast<std::size_t>(g.width), false));
    auto free = [&](int x, int y) { return g.contains({x, y}) && map.cell({x, y}).state == CellState::Free; };
    std::deque<CellIndex> q{robot};
    seen[static_cast<std::size_t>(robot.y)][static_cast<std::size_t>(robot.x)] = true;
    while (!q.empty()) {
        const CellIndex c = q.front();
        q.pop_front();
        const int nx[4] = {c.x + 1, c.x - 1, c.x, c.x};
        const int ny[4] = {c.y, c.y, c.y + 1, c.y - 1};
        for (int k = 0; k < 4; ++k) {
            if (free(nx[k], ny[k]) && !seen[static_cast<std::size_t>(ny[k])][static_cast<std::size_t>(nx[k])]) {
                seen[static_cast<std::size_t>(ny[k])][static_cast<std::size_t>(nx[k])] = true;
                q.push_back({nx[k], ny[k]});
            }
        }
    }
    std::set<CellIndex> out;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            if (!seen[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]) continue;
            const int nx[4] = {x + 1, x - 1, x, x};
            const int ny[4] = {y, y, y + 1, y - 1};
            for (int k = 0; k < 4; ++k) {
                if (g.contains({nx[k], ny[k]}) && map.cell({nx[k], ny[k]}).state == CellState::Unknown) {
                    out.insert({x, y});
                    break;
                }
            }
        }
    }
    return out;
}

/// Random traversability grid: traversable background with blocked blobs and
/// a sprinkling of inflated cells.
inline TraversabilityGrid random_traversability(std::mt19937_64& rng, int w, int h, double res) {
    TraversabilityGrid grid;
    std::uniform_real_distribution<double> off(-5.0, 5.0);
    grid.geometry = GridGeometry{{off(rng), off(rng)}, w, h, res};
    grid.cells.assign(grid.geometry.cell_count(), TraversabilityCell{0.0f, 0.0f, true, false});
    std::uniform_int_distribution<int> rx(0, w - 1);
    std::uniform_int_distribution<int> ry(0, h - 1);
    std::uniform_int_distribution<int> rr(1, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int blobs = w * h / 120;
    for (int b = 0; b < blobs; ++b) {
        const int cx = rx(rng);
        const int cy = ry(rng);
        const int r = rr(rng);
        const bool inflate = u(rng) < 0.3;
        for (int y = cy - r; y <= cy + r; ++y) {
            for (int x = cx - r; x <= cx + r; ++x) {
                if (!grid.geometry.contains({x, y})) continue;
                auto& c = grid.at({x, y});
                c.traversable = false;
                c.inflated = inflate;
            }
        }
    }
    return grid;
}

/// Two frontiers flanking the way to a goal straight ahead. As the robot
/// advances, both are re-observed a little further on and which one is closer
/// to the goal alternates every step. Returns how often the chosen waypoint
/// changes over `steps` selections.
inline int oscillation_switches(double w_l, int steps = 20) {
    const Vec2 goal{30.0, 0.0};
    PlannerState state;
    const CostWeights w{0.8, w_l};
    int switches = 0;
    std::optional<VertexRef> last;
    for (int k = 0; k < steps; ++k) {
        const double advance = 0.5 * k;
        const double lead = 0.15;
        const std::vector<FrontierCandidate> fs{
            {{0, 0}, {advance + (k % 2 == 0 ? lead : 0.0), 4.0}},
            {{0, 1}, {advance + (k % 2 == 0 ? 0.0 : lead), -4.0}},
        };
        const FrontierCandidate pick = select_waypoint(fs, goal, state, w);
        if (last && !(pick.ref == *last)) ++switches;
        last = pick.ref;
    }
    return switches;
}

/// Per-test scratch directory, wiped on construction.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hitmap_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::FILE* f = std::fopen(p.string().c_str(), "rb");
    if (!f) return {};
    std::string s;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, n);
    std::fclose(f);
    return s;
}

}  // namespace hitmap::testing
