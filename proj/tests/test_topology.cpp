#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "hitmap/errors.hpp"
#include "hitmap/topology.hpp"
#include "support.hpp"

using namespace hitmap;

namespace {

Roadmap block(double x0, double y0, int nx, int ny, double s) {
    Roadmap r;
    r.sample_interval = s;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) r.add_vertex({x0 + i * s, y0 + j * s});
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) r.add_edge(j * nx + i, j * nx + i + 1);
    }
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i < nx; ++i) r.add_edge(j * nx + i, (j + 1) * nx + i);
    }
    return r;
}

Submap make(int id, const Pose2& anchor, Roadmap r) {
    Submap s;
    s.id = id;
    s.anchor = anchor;
    s.creation_odom = anchor.in_frame(Frame::Odometry);
    s.roadmap = std::move(r);
    return s;
}

// Fine raster flood over the union of coverage discs: true iff some vertex
// of A and some vertex of B lie in one connected free region.
bool flood_connected(const SubmapStore& store, int a, int b, double radius) {
    std::vector<Vec2> pa;
    std::vector<Vec2> pb;
    for (const auto& v : store.get(a).roadmap.vertices) pa.push_back(store.get(a).to_corrected(v.position));
    for (const auto& v : store.get(b).roadmap.vertices) pb.push_back(store.get(b).to_corrected(v.position));
    double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
    for (const auto* set : {&pa, &pb}) {
        for (const Vec2& p : *set) {
            x0 = std::min(x0, p.x - radius);
            y0 = std::min(y0, p.y - radius);
            x1 = std::max(x1, p.x + radius);
            y1 = std::max(y1, p.y + radius);
        }
    }
    const double h = radius / 8.0;
    const int w = static_cast<int>(std::ceil((x1 - x0) / h)) + 1;
    const int ht = static_cast<int>(std::ceil((y1 - y0) / h)) + 1;
    std::vector<char> free(static_cast<std::size_t>(w * ht), 0);
    for (const auto* set : {&pa, &pb}) {
        for (const Vec2& p : *set) {
            for (int y = 0; y < ht; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (distance({x0 + x * h, y0 + y * h}, p) <= radius) free[static_cast<std::size_t>(y * w + x)] = 1;
                }
            }
        }
    }
    auto cell = [&](Vec2 p) {
        return static_cast<int>(std::lround((p.y - y0) / h)) * w + static_cast<int>(std::lround((p.x - x0) / h));
    };
    std::vector<char> seen(free.size(), 0);
    std::deque<int> q;
    for (const Vec2& p : pa) {
        const int c = cell(p);
        if (!seen[static_cast<std::size_t>(c)]) {
            seen[static_cast<std::size_t>(c)] = 1;
            q.push_back(c);
        }
    }
    while (!q.empty()) {
        const int c = q.front();
        q.pop_front();
        const int cx = c % w;
        const int cy = c / w;
        const int nx[4] = {cx + 1, cx - 1, cx, cx};
        const int ny[4] = {cy, cy, cy + 1, cy - 1};
        for (int k = 0; k < 4; ++k) {
            if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= ht) continue;
            const int n = ny[k] * w + nx[k];
            if (free[static_cast<std::size_t>(n)] && !seen[static_cast<std::size_t>(n)]) {
                seen[static_cast<std::size_t>(n)] = 1;
                q.push_back(n);
            }
        }
    }
    return std::any_of(pb.begin(), pb.end(), [&](Vec2 p) { return seen[static_cast<std::size_t>(cell(p))] != 0; });
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("sequential edges form a path in creation order") {
    GlobalTopology t;
    SubmapStore s;
    for (int i = 0; i < 10; ++i) register_submap(t, s, make(i, Pose2(2.0 * i, 0, 0, Frame::Corrected), block(0, 0, 2, 2, 0.3)));
    CHECK(t.edges().size() == 9);
    CHECK(t.is_connected());
    CHECK(t.max_degree() == 2);
    CHECK(t.neighbors(4) == std::vector<int>{3, 5});
    CHECK(t.find_edge(3, 4)->length == doctest::Approx(2.0));
    CHECK_THROWS_AS(t.add_sequential_edge(0, 2), NonConsecutiveIds);

    GlobalTopology fresh;
    fresh.add_node(0, Pose2(0, 0, 0, Frame::Corrected));
    fresh.add_node(1, Pose2(1, 0, 0, Frame::Corrected));
    fresh.add_sequential_edge(0, 1);
    CHECK(fresh.edges().size() == 1);
    CHECK(fresh.is_connected());
}

TEST_CASE("validation accepts overlap and rejects walls and distance") {
    GlobalTopology t;
    SubmapStore s;
    register_submap(t, s, make(0, Pose2(0, 0, 0, Frame::Corrected), block(0, 0, 10, 10, 0.3)));
    register_submap(t, s, make(1, Pose2(20, 0, 0, Frame::Corrected), block(0, 0, 3, 3, 0.3)));
    register_submap(t, s, make(2, Pose2(1.0, 1.0, 0.2, Frame::Corrected), block(0, 0, 10, 10, 0.3)));
    // Same room, seen again.
    CHECK(validate_loop(t, s, 0, 2, 0.6));
    // Far away.
    register_submap(t, s, make(3, Pose2(40, 0, 0, Frame::Corrected), block(0, 0, 3, 3, 0.3)));
    CHECK_FALSE(validate_loop(t, s, 0, 3, 0.6));
    // Across a wall: a vertex-free band of 0.9 m between the two rooms.
    register_submap(t, s, make(4, Pose2(3.6, 0, 0, Frame::Corrected), block(0, 0, 5, 10, 0.3)));
    CHECK_FALSE(validate_loop(t, s, 0, 4, 1.5));
    CHECK_THROWS_AS(validate_loop(t, s, 0, 9, 0.6), UnknownSubmapId);
}

TEST_CASE("validation agrees with a coverage flood fill") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> size(3, 8);
    int walls = 0;
    for (int k = 0; k < 20; ++k) {
        const double s = 0.3;
        const bool wall = k % 2 == 0;
        const int nx = size(rng);
        const int ny = size(rng);
        // B starts one pitch past A's last column (touching) or three pitches
        // past it (a wall two lattice rows thick sits between them).
        const double gap = wall ? 3.0 * s : s;
        const Pose2 base(5.0 * u(rng), 5.0 * u(rng), 3.0 * u(rng), Frame::Corrected);
        const Pose2 off = base * Pose2((nx - 1) * s + gap, 0.1 * s * u(rng), 0.0, Frame::Corrected);
        GlobalTopology t;
        SubmapStore st;
        register_submap(t, st, make(0, base, block(0, 0, nx, ny, s)));
        register_submap(t, st, make(1, Pose2(99, 99, 0, Frame::Corrected), block(0, 0, 1, 1, s)));
        register_submap(t, st, make(2, off, block(0, 0, size(rng), ny, s)));
        const bool oracle = flood_connected(st, 0, 2, coverage_radius(s));
        CHECK(oracle == !wall);
        CHECK(validate_loop(t, st, 0, 2, 2.0 * s) == oracle);
        walls += wall ? 1 : 0;
    }
    CHECK(walls == 10);
}

TEST_CASE("validation can use the observed relative pose") {
    GlobalTopology t;
    SubmapStore s;
    register_submap(t, s, make(0, Pose2(0, 0, 0, Frame::Corrected), block(0, 0, 6, 6, 0.3)));
    register_submap(t, s, make(1, Pose2(30, 0, 0, Frame::Corrected), block(0, 0, 1, 1, 0.3)));
    // Drifted anchor far away, but the measurement says it overlaps A.
    register_submap(t, s, make(2, Pose2(10, 0, 0, Frame::Corrected), block(0, 0, 6, 6, 0.3)));
    CHECK_FALSE(validate_loop(t, s, 0, 2, 0.6));
    CHECK(validate_loop(t, s, 0, 2, 0.6, Pose2(0.6, 0.3, 0.0, Frame::Corrected)));
    CHECK_THROWS_AS(validate_loop(t, s, 0, 2, 0.6, Pose2(0, 0, 0, Frame::Odometry)), FrameMismatch);
}

TEST_CASE("loop edges require validation in the current epoch") {
    GlobalTopology t;
    SubmapStore s;
    for (int i = 0; i < 8; ++i) register_submap(t, s, make(i, Pose2(0.2 * i, 0, 0, Frame::Corrected), block(0, 0, 4, 4, 0.3)));
    CHECK_THROWS_AS(t.add_validated_loop(2, 7), ValidationNotPerformed);
    REQUIRE(validate_loop(t, s, 2, 7, 0.6));
    t.add_validated_loop(2, 7);
    CHECK(t.has_edge(7, 2));
    CHECK(t.find_edge(2, 7)->kind == EdgeKind::ValidatedLoop);
    const std::size_t n = t.edges().size();
    t.add_validated_loop(2, 7);
    CHECK(t.edges().size() == n);
    REQUIRE(validate_loop(t, s, 1, 5, 0.6));
    t.bump_epoch();
    CHECK_THROWS_AS(t.add_validated_loop(1, 5), ValidationNotPerformed);
    CHECK(t.is_connected());
}

TEST_CASE("zero error leaves every anchor in place") {
    GlobalTopology t;
    SubmapStore s;
    for (int i = 0; i < 5; ++i) register_submap(t, s, make(i, Pose2(i, 0.5 * i, 0.1 * i, Frame::Corrected), block(0, 0, 2, 2, 0.3)));
    t.add_unvalidated_loop(0, 4);
    const Pose2 rel = t.anchor(0).between(t.anchor(4));
    const CorrectionResult r = apply_correction(t, s, {0, 4}, rel);
    CHECK(r.moved.empty());
    CHECK(r.metric_cell_writes == 0);
    for (int i = 0; i < 5; ++i) CHECK(t.anchor(i) == Pose2(i, 0.5 * i, 0.1 * i, Frame::Corrected));
    CHECK_THROWS_AS(apply_correction(t, s, {1, 2}, rel), NoSuchLoopEdge);
    CHECK_THROWS_AS(apply_correction(t, s, {0, 3}, rel), NoSuchLoopEdge);
}

TEST_CASE("a pure translation error spreads linearly along the chain") {
    GlobalTopology t;
    SubmapStore s;
    for (int i = 0; i < 5; ++i) register_submap(t, s, make(i, Pose2(2.0 * i, 0, 0, Frame::Corrected), block(0, 0, 2, 2, 0.3)));
    register_submap(t, s, make(5, Pose2(10.0, 1.0, 0, Frame::Corrected), block(0, 0, 2, 2, 0.3)));
    t.add_unvalidated_loop(0, 4);
    // Measured: 4 is 1 m further along x than the chain believes.
    const Pose2 observed(9.0, 0.0, 0.0, Frame::Corrected);
    const CorrectionResult r = apply_correction(t, s, {0, 4}, observed);
    CHECK(r.metric_cell_writes == 0);
    const double shift[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 5; ++i) {
        // Oracle: anchor composed with a translation of shift[i] in a
        // zero-rotation frame.
        const Pose2 expect = Pose2(shift[i], 0, 0, Frame::Corrected) * Pose2(2.0 * i, 0, 0, Frame::Corrected);
        CHECK(t.anchor(i).x() == doctest::Approx(expect.x()).epsilon(1e-12));
        CHECK(t.anchor(i).y() == doctest::Approx(0.0));
        CHECK(s.get(i).anchor == t.anchor(i));
    }
    // Later submaps move rigidly with the loop end.
    CHECK(t.anchor(5).x() == doctest::Approx(11.0));
    CHECK(t.find_edge(3, 4)->length == doctest::Approx(2.25));
    // Re-applying with zero residual changes nothing.
    const auto snapshot = t.anchor(3);
    CHECK(apply_correction(t, s, {0, 4}, observed).moved.empty());
    CHECK(t.anchor(3) == snapshot);
}

TEST_CASE("corrections are rigid per submap and close the loop") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        GlobalTopology t;
        SubmapStore s;
        Pose2 a(0, 0, 0, Frame::Corrected);
        for (int i = 0; i < 20; ++i) {
            Roadmap r;
            for (int k = 0; k < 6; ++k) r.add_vertex({3.0 * u(rng), 3.0 * u(rng)});
            register_submap(t, s, make(i, a, r));
            a = a * Pose2(2.0 + u(rng), u(rng), 0.3 * u(rng), Frame::Corrected);
        }
        std::uniform_int_distribution<int> pick(0, 17);
        const int lo = pick(rng);
        const int hi = std::uniform_int_distribution<int>(lo + 2, 19)(rng);
        t.add_unvalidated_loop(lo, hi);
        const Pose2 observed = t.anchor(lo).between(t.anchor(hi)) * Pose2(u(rng), u(rng), 0.5 * u(rng), Frame::Corrected);
        std::vector<std::vector<double>> before;
        for (const auto& sm : s.all()) {
            std::vector<double> d;
            for (std::size_t i = 0; i < sm.roadmap.vertices.size(); ++i) {
                for (std::size_t j = i + 1; j < sm.roadmap.vertices.size(); ++j) {
                    d.push_back(distance(sm.corrected_position(static_cast<int>(i)), sm.corrected_position(static_cast<int>(j))));
                }
            }
            before.push_back(d);
        }
        apply_correction(t, s, {lo, hi}, observed);
        for (std::size_t k = 0; k < s.size(); ++k) {
            const Submap& sm = s.get(static_cast<int>(k));
            std::size_t n = 0;
            for (std::size_t i = 0; i < sm.roadmap.vertices.size(); ++i) {
                for (std::size_t j = i + 1; j < sm.roadmap.vertices.size(); ++j) {
                    const double d = distance(sm.corrected_position(static_cast<int>(i)), sm.corrected_position(static_cast<int>(j)));
                    CHECK(std::abs(d - before[k][n++]) < 1e-9);
                }
            }
        }
        const Pose2 got = t.anchor(lo).between(t.anchor(hi));
        CHECK(std::abs(got.x() - observed.x()) < 1e-6);
        CHECK(std::abs(got.y() - observed.y()) < 1e-6);
        CHECK(std::abs(normalize_angle(got.theta() - observed.theta())) < 1e-6);
        CHECK(t.is_connected());
    }
}

}
