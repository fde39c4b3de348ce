#include "hitmap/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "hitmap/errors.hpp"

namespace hitmap {

WorldBuilder::WorldBuilder(double width_m, double height_m, double resolution)
    : w_(static_cast<int>(std::lround(width_m / resolution))),
      h_(static_cast<int>(std::lround(height_m / resolution))),
      res_(resolution),
      cells_(static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_), CellType::Free) {
    if (w_ < 3 || h_ < 3) throw ConfigError("world too small");
    for (int x = 0; x < w_; ++x) {
        cells_[static_cast<std::size_t>(x)] = CellType::Obstacle;
        cells_[static_cast<std::size_t>((h_ - 1) * w_ + x)] = CellType::Obstacle;
    }
    for (int y = 0; y < h_; ++y) {
        cells_[static_cast<std::size_t>(y * w_)] = CellType::Obstacle;
        cells_[static_cast<std::size_t>(y * w_ + w_ - 1)] = CellType::Obstacle;
    }
}

namespace {

template <class F>
void for_cells_in(int w, int h, double res, double x0, double y0, double x1, double y1, F&& f) {
    constexpr double tol = 1e-9;
    for (int y = 0; y < h; ++y) {
        const double cy = (y + 0.5) * res;
        if (cy < y0 - tol || cy > y1 + tol) continue;
        for (int x = 0; x < w; ++x) {
            const double cx = (x + 0.5) * res;
            if (cx >= x0 - tol && cx <= x1 + tol) f(x, y);
        }
    }
}

}  // namespace

WorldBuilder& WorldBuilder::block(double x0, double y0, double x1, double y1) {
    for_cells_in(w_, h_, res_, x0, y0, x1, y1,
                 [&](int x, int y) { cells_[static_cast<std::size_t>(y * w_ + x)] = CellType::Obstacle; });
    return *this;
}

WorldBuilder& WorldBuilder::clear(double x0, double y0, double x1, double y1) {
    for_cells_in(w_, h_, res_, x0, y0, x1, y1, [&](int x, int y) {
        if (x > 0 && y > 0 && x < w_ - 1 && y < h_ - 1) cells_[static_cast<std::size_t>(y * w_ + x)] = CellType::Free;
    });
    return *this;
}

World WorldBuilder::build() const { return World(w_, h_, res_, cells_); }

Scenario bug_trap_scenario() {
    Scenario s{WorldBuilder(15.0, 20.0, 0.1)
                   .block(3.5, 9.0, 11.5, 9.2)
                   .block(3.5, 5.0, 3.7, 9.2)
                   .block(11.3, 5.0, 11.5, 9.2)
                   .build(),
               {}};
    ScenarioConfig& c = s.config;
    c.name = "bug_trap";
    c.start = Pose2(7.5, 3.0, std::numbers::pi / 2.0, Frame::GroundTruth);
    c.goals = {{7.5, 17.0}};
    c.sensor = SensorModel::depth_camera(5.0);
    c.drift = {0.01, 0.002, 42};
    c.seed = 42;
    c.frame_budget = 10000;
    return s;
}

Scenario low_wall_scenario() {
    Scenario s{WorldBuilder(15.0, 16.0, 0.1).block(7.4, 0.0, 7.6, 12.0).build(), {}};
    ScenarioConfig& c = s.config;
    c.name = "low_wall";
    c.start = Pose2(6.0, 2.0, 0.0, Frame::GroundTruth);
    c.goals = {{9.0, 2.0}, {5.5, 2.5}};
    c.sensor = SensorModel::depth_camera(5.0);
    c.drift = {0.003, 0.0005, 7};
    c.seed = 7;
    c.loop_radius = 3.5;
    c.frame_budget = 10000;
    return s;
}

Scenario corridor_loop_scenario() {
    Scenario s{WorldBuilder(60.0, 70.0, 0.2).block(4.5, 4.5, 55.5, 65.5).build(), {}};
    ScenarioConfig& c = s.config;
    c.name = "corridor_loop";
    c.start = Pose2(2.5, 2.5, 0.0, Frame::GroundTruth);
    // Corridor midpoints, then back beside the start to close the loop.
    c.goals = {{30.0, 2.5}, {57.5, 35.0}, {30.0, 67.5}, {2.5, 35.0}, {2.5, 4.0}};
    c.sensor = SensorModel::lidar(15.0);
    c.drift = {0.01, 0.0003, 11};
    c.attach_radius = 1.5;
    c.seed = 11;
    c.local_map_size = 15.0;
    c.resolution = 0.2;
    c.submap_interval = 10.0;
    c.sample_interval = 0.8;
    c.robot_radius = 0.3;
    c.loop_radius = 5.0;
    c.max_speed = 1.0;
    c.frame_budget = 10000;
    return s;
}

Scenario open_room_scenario() {
    Scenario s{WorldBuilder(10.0, 10.0, 0.1).build(), {}};
    ScenarioConfig& c = s.config;
    c.name = "open_room";
    c.start = Pose2(3.0, 5.0, 0.0, Frame::GroundTruth);
    c.goals = {{6.0, 5.0}};
    c.seed = 1;
    c.drift.seed = 1;
    c.frame_budget = 2000;
    return s;
}

Scenario sealed_goal_scenario() {
    Scenario s{WorldBuilder(8.0, 8.0, 0.1).block(5.0, 5.0, 7.0, 7.0).clear(5.3, 5.3, 6.7, 6.7).build(), {}};
    ScenarioConfig& c = s.config;
    c.name = "sealed_goal";
    c.start = Pose2(2.0, 2.0, 0.0, Frame::GroundTruth);
    c.goals = {{6.0, 6.0}};
    c.seed = 3;
    c.drift.seed = 3;
    c.frame_budget = 6000;
    return s;
}

std::vector<std::string> builtin_scenario_names() {
    return {"bug_trap", "low_wall", "corridor_loop", "open_room", "sealed_goal"};
}

Scenario builtin_scenario(const std::string& name) {
    if (name == "bug_trap") return bug_trap_scenario();
    if (name == "low_wall") return low_wall_scenario();
    if (name == "corridor_loop") return corridor_loop_scenario();
    if (name == "open_room") return open_room_scenario();
    if (name == "sealed_goal") return sealed_goal_scenario();
    throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace hitmap
