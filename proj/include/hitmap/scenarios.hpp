#pragma once

#include <string>
#include <vector>

#include "hitmap/bench.hpp"
#include "hitmap/world.hpp"

namespace hitmap {

/// Closed rectangular world builder in meters.
class WorldBuilder {
public:
    WorldBuilder(double width_m, double height_m, double resolution);
    /// Marks every cell whose center lies in [x0, x1] x [y0, y1] as obstacle.
    WorldBuilder& block(double x0, double y0, double x1, double y1);
    /// Clears cells whose centers lie in the rectangle (boundary excepted).
    WorldBuilder& clear(double x0, double y0, double x1, double y1);
    World build() const;

private:
    int w_;
    int h_;
    double res_;
    std::vector<CellType> cells_;
};

struct Scenario {
    World world;
    ScenarioConfig config;
};

/// 15 x 20 m room with a U-shaped trap opening towards the start and the
/// goal straight behind it.
Scenario bug_trap_scenario();
/// Thin wall splitting a 15 x 16 m room, open at the top. The first goal is
/// just across the wall, the second back beside the start.
Scenario low_wall_scenario();
/// 60 x 70 m ring corridor at the large-scale configuration, driven once
/// around so the loop closes at the start.
Scenario corridor_loop_scenario();
/// 10 x 10 m empty room, goal 3 m ahead.
Scenario open_room_scenario();
/// Small room whose goal sits inside a sealed chamber.
Scenario sealed_goal_scenario();

std::vector<std::string> builtin_scenario_names();
/// Throws ConfigError for unknown names.
Scenario builtin_scenario(const std::string& name);

}  // namespace hitmap
