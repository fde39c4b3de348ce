#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "hitmap/errors.hpp"
#include "hitmap/scenarios.hpp"
#include "hitmap/world.hpp"
#include "support.hpp"

using namespace hitmap;

namespace {

World small_world() {
    return parse_ascii_world(
        "resolution 0.5\n"
        "######\n"
        "#....#\n"
        "#.##.#\n"
        "#....#\n"
        "######\n");
}

// March along the ray in tiny steps until the point lands in an obstacle.
double marched_range(const World& w, Vec2 p, double angle, double max_range) {
    const Vec2 d{std::cos(angle), std::sin(angle)};
    constexpr double h = 1e-4;
    for (double t = 0.0; t <= max_range; t += h) {
        if (w.is_obstacle(p + t * d)) return t;
    }
    return max_range;
}

}  // namespace

TEST_SUITE("world") {

TEST_CASE("pose composition round trips") {
    const Pose2 a(1.0, 2.0, 0.5, Frame::Corrected);
    const Pose2 b(-0.3, 0.7, -1.2, Frame::Corrected);
    const Pose2 ab = a * b;
    const Pose2 back = a.between(ab);
    CHECK(back.x() == doctest::Approx(b.x()).epsilon(1e-12));
    CHECK(back.y() == doctest::Approx(b.y()).epsilon(1e-12));
    CHECK(back.theta() == doctest::Approx(b.theta()).epsilon(1e-12));
    const Vec2 q = a.transform({0.4, -0.2});
    const Vec2 r = a.inverse_transform(q);
    CHECK(r.x == doctest::Approx(0.4));
    CHECK(r.y == doctest::Approx(-0.2));
    CHECK(normalize_angle(3.0 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK_THROWS_AS(a.compose(Pose2(0, 0, 0, Frame::Odometry)), FrameMismatch);
}

TEST_CASE("ascii world parses with row 0 at the bottom") {
    const World w = small_world();
    CHECK(w.width() == 6);
    CHECK(w.height() == 5);
    CHECK(w.resolution() == 0.5);
    // Row "#.##.#" is the second from the bottom.
    CHECK(w.at({2, 2}) == CellType::Obstacle);
    CHECK(w.at({1, 1}) == CellType::Free);
    CHECK(w.count(CellType::Free) == 10);
    CHECK(w.is_obstacle({1.2, 1.2}) == true);
    CHECK(w.is_obstacle({0.75, 0.75}) == false);
    CHECK(w.is_obstacle({-1.0, 1.0}) == true);
}

TEST_CASE("ascii and json formats round trip") {
    const World w = small_world();
    const World a = parse_ascii_world(to_ascii(w));
    CHECK(a.cells() == w.cells());
    CHECK(a.resolution() == w.resolution());
    const World j = parse_json_world(to_json(w));
    CHECK(j.cells() == w.cells());
    CHECK(j.width() == w.width());

    std::vector<CellType> cells = w.cells();
    std::vector<double> elev(cells.size());
    for (std::size_t i = 0; i < elev.size(); ++i) elev[i] = 0.01 * static_cast<double>(i);
    const World e(w.width(), w.height(), w.resolution(), cells, elev);
    const World e2 = parse_json_world(to_json(e));
    CHECK(e2.elevations() == e.elevations());

    const auto dir = testing::scratch_dir("world_io");
    save_world(w, dir / "w.txt");
    CHECK(load_world(dir / "w.txt").cells() == w.cells());
    save_world(e, dir / "w.json");
    CHECK(load_world(dir / "w.json").elevations() == e.elevations());
}

TEST_CASE("malformed worlds are rejected") {
    CHECK_THROWS_AS(parse_ascii_world("######\n#....#\n######\n"), ParseError);
    CHECK_THROWS_AS(parse_ascii_world("resolution 0.1\n###\n#.\n###\n"), ParseError);
    CHECK_THROWS_AS(parse_ascii_world("resolution 0.1\n###\n#..\n###\n"), BoundaryError);
    CHECK_THROWS_AS(parse_json_world(nlohmann::json{{"width", 3}, {"height", 3}, {"resolution", 0.1}, {"cells", {1, 1}}}),
                    ParseError);
}

TEST_CASE("sensor beam layout") {
    const SensorModel cam = SensorModel::depth_camera();
    CHECK(cam.beam_count() == 121);
    CHECK(cam.bearing(60) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(SensorModel::lidar().beam_count() == 360);
    SensorModel bad = cam;
    bad.max_range = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sense reports the entry face of the first obstacle") {
    const World w = WorldBuilder(6.0, 6.0, 0.1).block(3.0, 0.0, 3.2, 6.0).build();
    const RangeScan s = sense(w, Pose2(2.05, 2.55, 0.0), SensorModel::depth_camera(5.0));
    const Beam& centre = s.beams[60];
    CHECK(centre.hit);
    CHECK(centre.range == doctest::Approx(0.95).epsilon(1e-9));
    CHECK_THROWS_AS(sense(w, Pose2(3.1, 2.0, 0.0), SensorModel::depth_camera()), PoseInObstacle);
}

TEST_CASE("sense agrees with a fine ray march") {
    const Scenario sc = bug_trap_scenario();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0.2, 14.8);
    std::uniform_real_distribution<double> uy(0.2, 19.8);
    std::uniform_real_distribution<double> ut(-std::numbers::pi, std::numbers::pi);
    const SensorModel lidar = SensorModel::lidar(6.0);
    int checked = 0;
    while (checked < 20) {
        const Pose2 p(ux(rng), uy(rng), ut(rng));
        if (sc.world.is_obstacle(p.position())) continue;
        const RangeScan s = sense(sc.world, p, lidar);
        for (std::size_t i = 0; i < s.beams.size(); i += 7) {
            const double expect = marched_range(sc.world, p.position(), p.theta() + s.beams[i].bearing, lidar.max_range);
            CHECK(std::abs(s.beams[i].range - expect) < 2e-4);
            CHECK(s.beams[i].hit == (expect < lidar.max_range));
        }
        ++checked;
    }
}

TEST_CASE("drift-free stepping keeps odometry on the ground truth") {
    const World w = WorldBuilder(10.0, 10.0, 0.1).build();
    DriftSampler drift({0.0, 0.0, 1});
    Pose2 truth(2.0, 2.0, 0.3);
    Pose2 odom = truth.in_frame(Frame::Odometry);
    for (int i = 0; i < 50; ++i) {
        const StepResult r = step(w, truth, odom, {0.5, 0.2}, 0.1, drift);
        truth = r.true_pose;
        odom = r.odom_pose;
    }
    CHECK(odom.x() == doctest::Approx(truth.x()).epsilon(1e-12));
    CHECK(odom.y() == doctest::Approx(truth.y()).epsilon(1e-12));
    CHECK(odom.theta() == doctest::Approx(truth.theta()).epsilon(1e-12));
    // Exact arc: a full circle returns to the start.
    const Pose2 c = integrate_unicycle(Pose2(0, 0, 0), 1.0, 1.0, 2.0 * std::numbers::pi);
    CHECK(std::abs(c.x()) < 1e-12);
    CHECK(std::abs(c.y()) < 1e-12);
}

TEST_CASE("odometry error grows with distance and is seeded") {
    const World w = WorldBuilder(200.0, 6.0, 0.2).build();
    auto run = [&](std::uint64_t seed, int steps) {
        DriftSampler drift({0.02, 0.005, seed});
        Pose2 truth(1.0, 3.0, 0.0);
        Pose2 odom = truth.in_frame(Frame::Odometry);
        for (int i = 0; i < steps; ++i) {
            const StepResult r = step(w, truth, odom, {1.0, 0.0}, 0.1, drift);
            truth = r.true_pose;
            odom = r.odom_pose;
        }
        return distance(truth.position(), odom.position());
    };
    CHECK(run(3, 500) == run(3, 500));
    CHECK(run(3, 500) != run(4, 500));
    double short_err = 0.0;
    double long_err = 0.0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        short_err += run(s, 200);
        long_err += run(s, 1600);
    }
    CHECK(long_err > 2.0 * short_err);
}

TEST_CASE("stepping into a wall clamps at the contact") {
    const World w = WorldBuilder(6.0, 6.0, 0.1).block(3.0, 0.0, 3.2, 6.0).build();
    DriftSampler drift({0.0, 0.0, 1});
    Pose2 truth(2.8, 2.5, 0.0);
    Pose2 odom = truth.in_frame(Frame::Odometry);
    bool collided = false;
    for (int i = 0; i < 10; ++i) {
        const StepResult r = step(w, truth, odom, {1.0, 0.0}, 0.1, drift);
        collided = collided || r.collided;
        truth = r.true_pose;
        odom = r.odom_pose;
        CHECK_FALSE(w.is_obstacle(truth.position()));
    }
    CHECK(collided);
    CHECK(truth.x() < 3.0);
    CHECK(truth.x() > 2.9);
}

TEST_CASE("place recognition picks the oldest nearby submap, skipping recent ones") {
    const std::vector<AnchorRecord> hist{{0, Pose2(0, 0, 0)}, {1, Pose2(5, 0, 0)}, {2, Pose2(1, 0, 0)},
                                         {3, Pose2(1.5, 0, 0)}, {4, Pose2(1.4, 0, 0)}};
    CHECK(detect_loop(hist, Pose2(1.2, 0, 0), 2.0, 4) == std::optional<int>(0));
    CHECK(detect_loop(hist, Pose2(1.2, 0, 0), 0.5, 4) == std::optional<int>(2));
    CHECK_FALSE(detect_loop(hist, Pose2(1.2, 0, 0), 0.5, 3).has_value());
    CHECK_FALSE(detect_loop(hist, Pose2(20, 0, 0), 2.0, 4).has_value());
}

}
