#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "hitmap/errors.hpp"
#include "hitmap/local_map.hpp"
#include "support.hpp"

using namespace hitmap;

namespace {

RangeScan one_beam(Vec2 at, double bearing, double range, bool hit) {
    RangeScan s;
    s.origin = Pose2(at.x, at.y, 0.0, Frame::Odometry);
    s.max_range = 5.0;
    s.beams.push_back({bearing, range, hit});
    return s;
}

std::size_t count_state(const LocalMetricMap& m, CellState s) {
    std::size_t n = 0;
    for (const auto& c : m.cells()) n += c.state == s ? 1 : 0;
    return n;
}

LocalMetricMap all_free(double side, double res) {
    LocalMetricMap m(side, res);
    for (int y = 0; y < m.geometry().height; ++y) {
        for (int x = 0; x < m.geometry().width; ++x) m.cell({x, y}) = MapCell{CellState::Free, 1, 0.0, 0.0};
    }
    return m;
}

std::set<int> marked(const Roadmap& r) {
    std::set<int> out;
    for (const auto& v : r.vertices) {
        if (v.is_frontier) out.insert(v.id);
    }
    return out;
}

}  // namespace

TEST_SUITE("local_map") {

TEST_CASE("a single beam clears the cells it crosses and marks the hit") {
    const double res = 0.1;
    const Vec2 at{0.05, 0.05};
    const double bearing = 0.3;
    LocalMetricMap m(5.0, res);
    m.integrate(one_beam(at, bearing, 2.0, true), Pose2(at.x, at.y, 0.0, Frame::Odometry));

    // Independent rasterization: fine march along the beam.
    const GridGeometry& g = m.geometry();
    const Vec2 d{std::cos(bearing), std::sin(bearing)};
    std::set<CellIndex> expect_free;
    for (double t = 0.0; t < 2.0 - 1e-6; t += 1e-4) expect_free.insert(g.lattice_cell(at + t * d));
    const CellIndex hit = g.lattice_cell(at + 2.0001 * d);
    expect_free.erase(hit);

    std::set<CellIndex> got_free;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            if (m.cell({x, y}).state == CellState::Free) got_free.insert({x, y});
        }
    }
    CHECK(got_free == expect_free);
    CHECK(m.cell(hit).state == CellState::Obstacle);
    CHECK(count_state(m, CellState::Obstacle) == 1);
    CHECK(expect_free.size() >= 20);
}

TEST_CASE("axis-aligned beam of 2 m at 0.1 m gives 20 free cells and one obstacle") {
    LocalMetricMap m(5.0, 0.1);
    m.integrate(one_beam({0.05, 0.05}, 0.0, 2.0, true), Pose2(0.05, 0.05, 0.0, Frame::Odometry));
    CHECK(count_state(m, CellState::Free) == 20);
    CHECK(count_state(m, CellState::Obstacle) == 1);
}

TEST_CASE("empty scans only recenter; repeated scans double the counts") {
    LocalMetricMap m(5.0, 0.1);
    RangeScan empty;
    empty.origin = Pose2(1.0, 1.0, 0.0, Frame::Odometry);
    m.integrate(empty, empty.origin);
    CHECK(count_state(m, CellState::Unknown) == m.cell_count());
    CHECK(std::abs(m.center().x() - 1.0) < 0.1 + 1e-9);

    LocalMetricMap once(5.0, 0.1);
    LocalMetricMap twice(5.0, 0.1);
    const RangeScan s = one_beam({0.05, 0.05}, 0.7, 1.5, true);
    once.integrate(s, s.origin);
    twice.integrate(s, s.origin);
    twice.integrate(s, s.origin);
    for (std::size_t i = 0; i < once.cells().size(); ++i) {
        CHECK(once.cells()[i].state == twice.cells()[i].state);
        CHECK(twice.cells()[i].observation_count == 2 * once.cells()[i].observation_count);
    }
    CHECK_THROWS_AS(m.integrate(s, Pose2(0, 0, 0, Frame::Corrected)), FrameMismatch);
}

TEST_CASE("cell count is fixed and unknown iff unobserved") {
    LocalMetricMap m(3.0, 0.1, 3);
    const std::size_t n = m.cell_count();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    std::uniform_real_distribution<double> a(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 p{u(rng), u(rng)};
        m.integrate(one_beam(p, a(rng), 1.2, i % 2 == 0), Pose2(p.x, p.y, 0.0, Frame::Odometry));
        REQUIRE(m.cell_count() == n);
    }
    for (const auto& c : m.cells()) CHECK((c.observation_count == 0) == (c.state == CellState::Unknown));
}

TEST_CASE("recentering keeps the overlap exactly") {
    LocalMetricMap m(4.0, 0.1, 2);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(-3.0, 3.0);
    for (int i = 0; i < 40; ++i) m.integrate(one_beam({0.0, 0.0}, a(rng), 1.7, true), Pose2(0, 0, 0, Frame::Odometry));
    std::map<CellIndex, MapCell> before;  // keyed on the global lattice index
    auto global = [&](const LocalMetricMap& mm, CellIndex c) {
        const Vec2 p = mm.geometry().cell_center(c);
        return CellIndex{static_cast<int>(std::floor(p.x / 0.1)), static_cast<int>(std::floor(p.y / 0.1))};
    };
    for (int y = 0; y < m.geometry().height; ++y) {
        for (int x = 0; x < m.geometry().width; ++x) before[global(m, {x, y})] = m.cell({x, y});
    }
    m.recenter({0.83, -0.41});
    int overlap = 0;
    for (int y = 0; y < m.geometry().height; ++y) {
        for (int x = 0; x < m.geometry().width; ++x) {
            const auto it = before.find(global(m, {x, y}));
            if (it == before.end()) {
                CHECK(m.cell({x, y}).state == CellState::Unknown);
                continue;
            }
            ++overlap;
            CHECK(m.cell({x, y}).state == it->second.state);
            CHECK(m.cell({x, y}).observation_count == it->second.observation_count);
        }
    }
    CHECK(overlap > 0);
    CHECK(overlap < static_cast<int>(m.cell_count()));
}

TEST_CASE("traversability gates on state, slope and roughness") {
    LocalMetricMap flat = all_free(2.0, 0.1);
    flat.cell({3, 3}).state = CellState::Unknown;
    flat.cell({3, 3}).observation_count = 0;
    const TraversabilityGrid t = compute_traversability(flat);
    CHECK(t.traversable_count() == flat.cell_count() - 1);
    CHECK_FALSE(t.at({3, 3}).traversable);

    LocalMetricMap ramp = all_free(2.0, 0.1);
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) ramp.cell({x, y}).height_mean = 0.5 * ramp.geometry().cell_center({x, y}).x;
    }
    const TraversabilityGrid r = compute_traversability(ramp);
    CHECK(r.traversable_count() == 0);
    CHECK(r.at({10, 10}).slope == doctest::Approx(0.5).epsilon(1e-6));
    const TraversabilityGrid gentle = compute_traversability(ramp, {0.6, 0.01});
    CHECK(gentle.traversable_count() == ramp.cell_count());

    LocalMetricMap rough = all_free(2.0, 0.1);
    rough.cell({5, 5}).height_m2 = 0.05;  // variance 0.05 > 0.01
    CHECK_FALSE(compute_traversability(rough).at({5, 5}).traversable);
    CHECK_THROWS_AS(compute_traversability(flat, {0.0, 0.01}), ConfigError);
}

TEST_CASE("inflation matches brute-force disk membership") {
    LocalMetricMap m = all_free(3.0, 0.1);
    const CellIndex o{15, 15};
    m.cell(o).state = CellState::Obstacle;
    const TraversabilityGrid t = compute_traversability(m);
    CHECK(inflate_obstacles(t, 0.0).traversable_count() == t.traversable_count());

    for (double radius : {0.1, 0.15, 0.25, 0.4}) {
        const TraversabilityGrid inf = inflate_obstacles(t, radius);
        int expect = 0;
        const double rc = radius / 0.1;
        for (int y = 0; y < 30; ++y) {
            for (int x = 0; x < 30; ++x) {
                const double dx = x - o.x;
                const double dy = y - o.y;
                const bool in_disk = (x != o.x || y != o.y) && std::sqrt(dx * dx + dy * dy) <= rc + 1e-9;
                expect += in_disk ? 1 : 0;
                CHECK(inf.at({x, y}).inflated == in_disk);
            }
        }
        int got = 0;
        for (const auto& c : inf.cells) got += c.inflated ? 1 : 0;
        CHECK(got == expect);
    }
    // Radius 0.25 m = 2.5 cells: centres at squared cell distance 1, 2, 4 and 5.
    int r25 = 0;
    for (const auto& c : inflate_obstacles(t, 0.25).cells) r25 += c.inflated ? 1 : 0;
    CHECK(r25 == 4 + 4 + 4 + 8);
}

TEST_CASE("inflation is monotone in the radius and treats unknown as blocked") {
    std::mt19937_64 rng(9);
    LocalMetricMap m(4.0, 0.1);
    testing::randomize_states(m, rng);
    const TraversabilityGrid t = compute_traversability(m);
    TraversabilityGrid prev = inflate_obstacles(t, 0.05);
    for (double r : {0.1, 0.2, 0.3, 0.5}) {
        const TraversabilityGrid cur = inflate_obstacles(t, r);
        for (std::size_t i = 0; i < cur.cells.size(); ++i) {
            if (prev.cells[i].inflated) CHECK(cur.cells[i].inflated);
            CHECK_FALSE((cur.cells[i].inflated && cur.cells[i].traversable));
        }
        prev = cur;
    }
    LocalMetricMap walls(2.0, 0.1);
    for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 20; ++x) walls.cell({x, y}) = MapCell{CellState::Obstacle, 1, 0.0, 0.0};
    }
    CHECK(inflate_obstacles(compute_traversability(walls), 0.3).traversable_count() == 0);
    CHECK_THROWS_AS(inflate_obstacles(t, -0.1), ConfigError);
}

TEST_CASE("distance transform matches brute force") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int w = 23;
    const int h = 17;
    std::vector<bool> seeds(static_cast<std::size_t>(w * h));
    for (auto&& s : seeds) s = u(rng) < 0.04;
    const auto d2 = squared_distance_transform(w, h, seeds);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double best = testing::kInf;
            for (int sy = 0; sy < h; ++sy) {
                for (int sx = 0; sx < w; ++sx) {
                    if (seeds[static_cast<std::size_t>(sy * w + sx)]) {
                        best = std::min(best, static_cast<double>((x - sx) * (x - sx) + (y - sy) * (y - sy)));
                    }
                }
            }
            CHECK(d2[static_cast<std::size_t>(y * w + x)] == best);
        }
    }
}

TEST_CASE("full 5 m grid at 0.3 m gives a 17 x 17 lattice") {
    const TraversabilityGrid t = compute_traversability(all_free(5.0, 0.1));
    const Roadmap r = sample_roadmap(t, 0.3);
    CHECK(r.vertices.size() == 289);
    const Adjacency adj = r.adjacency();
    const Vec2 c = t.geometry.center();
    for (const auto& v : r.vertices) {
        const int i = static_cast<int>(std::lround((v.position.x - c.x) / 0.3));
        const int j = static_cast<int>(std::lround((v.position.y - c.y) / 0.3));
        const bool interior = std::abs(i) < 8 && std::abs(j) < 8;
        if (interior) CHECK(adj[static_cast<std::size_t>(v.id)].size() == 8);
    }
    for (const auto& e : r.edges) {
        CHECK(e.length == doctest::Approx(distance(r.vertices[static_cast<std::size_t>(e.a)].position,
                                                   r.vertices[static_cast<std::size_t>(e.b)].position))
                              .epsilon(1e-12));
    }
    CHECK(connected_components(r) == 1);
    TraversabilityGrid none = t;
    for (auto& cell : none.cells) cell.traversable = false;
    CHECK(sample_roadmap(none, 0.3).empty());
}

TEST_CASE("a bisecting wall splits the roadmap in two") {
    LocalMetricMap m = all_free(5.0, 0.1);
    for (int y = 0; y < 50; ++y) m.cell({24, y}).state = CellState::Obstacle;
    const TraversabilityGrid t = inflate_obstacles(compute_traversability(m), 0.1);
    const Roadmap r = sample_roadmap(t, 0.3);
    CHECK(connected_components(r) == 2);
}

TEST_CASE("roadmap edges never cross untraversable cells") {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 10; ++k) {
        const TraversabilityGrid t = testing::random_traversability(rng, 60, 45, 0.1);
        const Roadmap r = sample_roadmap(t, 0.3);
        for (const auto& e : r.edges) {
            const Vec2 a = r.vertices[static_cast<std::size_t>(e.a)].position;
            const Vec2 b = r.vertices[static_cast<std::size_t>(e.b)].position;
            const int n = static_cast<int>(std::ceil(distance(a, b) / 0.05));
            for (int s = 0; s <= n; ++s) {
                const auto c = t.geometry.cell_of(a + (static_cast<double>(s) / n) * (b - a));
                REQUIRE(c);
                CHECK(t.at(*c).traversable);
            }
        }
    }
}

TEST_CASE("frontier cells equal the brute-force scan") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 20; ++k) {
        LocalMetricMap m(5.0, 0.1);
        testing::randomize_states(m, rng);
        const TraversabilityGrid t = inflate_obstacles(compute_traversability(m), 0.2);
        std::uniform_int_distribution<int> pick(0, 49);
        CellIndex robot{pick(rng), pick(rng)};
        while (!t.traversable(robot)) robot = {pick(rng), pick(rng)};
        const auto cells = find_frontier_cells(m, t, robot);
        const std::set<CellIndex> got(cells.begin(), cells.end());
        CHECK(got.size() == cells.size());
        CHECK(got == testing::brute_force_frontier_cells(m, robot));
    }
}

TEST_CASE("frontier vertices are the nearest reachable vertex of each large cluster") {
    std::mt19937_64 rng(33);
    for (int k = 0; k < 10; ++k) {
        LocalMetricMap m(5.0, 0.1);
        testing::randomize_states(m, rng);
        const TraversabilityGrid t = inflate_obstacles(compute_traversability(m), 0.2);
        const Roadmap r = sample_roadmap(t, 0.3);
        std::uniform_int_distribution<int> pick(0, 49);
        CellIndex robot{pick(rng), pick(rng)};
        while (!t.traversable(robot)) robot = {pick(rng), pick(rng)};
        const Roadmap f = detect_frontiers(m, t, r, robot);

        // Oracle: cluster brute-force frontier cells by 8-connectivity, then
        // give every cell of a cluster of >= 3 cells to its nearest vertex
        // lying in a reachable cell.
        const auto fc = testing::brute_force_frontier_cells(m, robot);
        std::set<CellIndex> reach;  // reachable = frontier oracle with everything unknown-adjacent
        {
            std::vector<CellIndex> q{robot};
            reach.insert(robot);
            while (!q.empty()) {
                const CellIndex c = q.back();
                q.pop_back();
                const CellIndex n4[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
                for (const auto& n : n4) {
                    if (m.geometry().contains(n) && m.cell(n).state == CellState::Free && reach.insert(n).second) q.push_back(n);
                }
            }
        }
        std::set<int> expect;
        std::set<CellIndex> left = fc;
        while (!left.empty()) {
            std::vector<CellIndex> cluster{*left.begin()};
            left.erase(left.begin());
            for (std::size_t i = 0; i < cluster.size(); ++i) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const auto it = left.find({cluster[i].x + dx, cluster[i].y + dy});
                        if (it != left.end()) {
                            cluster.push_back(*it);
                            left.erase(it);
                        }
                    }
                }
            }
            if (cluster.size() < 3) continue;
            for (const auto& c : cluster) {
                const Vec2 p = m.geometry().cell_center(c);
                int best = -1;
                double bd = testing::kInf;
                for (const auto& v : r.vertices) {
                    const auto vc = m.geometry().cell_of(v.position);
                    if (!vc || !reach.contains(*vc)) continue;
                    const double d = squared_distance(v.position, p);
                    if (d < bd) {
                        bd = d;
                        best = v.id;
                    }
                }
                if (best >= 0) expect.insert(best);
            }
        }
        CHECK(marked(f) == expect);
    }
}

TEST_CASE("fully observed maps and sealed pockets give no frontiers") {
    LocalMetricMap m = all_free(3.0, 0.1);
    TraversabilityGrid t = compute_traversability(m);
    Roadmap r = sample_roadmap(t, 0.3);
    CHECK(detect_frontiers(m, t, r, {15, 15}).frontier_count() == 0);

    // Unknown pocket walled in by obstacles.
    for (int y = 2; y <= 8; ++y) {
        for (int x = 2; x <= 8; ++x) {
            const bool ring = x == 2 || x == 8 || y == 2 || y == 8;
            m.cell({x, y}) = ring ? MapCell{CellState::Obstacle, 1, 0.0, 0.0} : MapCell{};
        }
    }
    t = compute_traversability(m);
    r = sample_roadmap(t, 0.3);
    CHECK(find_frontier_cells(m, t, {20, 20}).empty());
    CHECK(detect_frontiers(m, t, r, {20, 20}).frontier_count() == 0);
    CHECK_THROWS_AS(detect_frontiers(m, t, r, {2, 2}), RobotCellNotTraversable);
}

TEST_CASE("half-observed map marks only the vertices next to the horizon") {
    LocalMetricMap m(5.0, 0.1);
    for (int y = 0; y < 50; ++y) {
        for (int x = 0; x < 30; ++x) m.cell({x, y}) = MapCell{CellState::Free, 1, 0.0, 0.0};
    }
    const TraversabilityGrid t = inflate_obstacles(compute_traversability(m), 0.1);
    const Roadmap r = sample_roadmap(t, 0.3);
    const Roadmap f = detect_frontiers(m, t, r, {10, 25});
    // Frontier band: reachable column 28 (column 29 is inflated but still
    // passable and adjacent to the unknown half).
    double max_x = -1.0;
    for (const auto& v : r.vertices) max_x = std::max(max_x, v.position.x);
    for (const auto& v : f.vertices) CHECK(v.is_frontier == (v.position.x == max_x));
    CHECK(f.frontier_count() > 10);
}

}
