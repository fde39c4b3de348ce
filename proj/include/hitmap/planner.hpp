#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hitmap/local_area.hpp"
#include "hitmap/submap.hpp"
#include "hitmap/topology.hpp"

namespace hitmap {

struct CostWeights {
    double w_d = 0.8;
    double w_l = 0.2;
    /// Throws ConfigError.
    void validate() const;
};

enum class PlanMode { Backtracing, Exploration };

std::string_view to_string(PlanMode mode);

struct PlannerState {
    std::optional<Vec2> last_waypoint;
    PlanMode mode = PlanMode::Exploration;
    Vec2 goal;
};

struct Plan {
    PlanMode mode = PlanMode::Backtracing;
    std::vector<Vec2> waypoints;
    /// Merged-roadmap vertex ids of the local leg.
    std::vector<int> graph_path;
    double cost = 0.0;
    /// Submap hops from the current submap to the target's owner.
    std::vector<int> topology_path;
    std::optional<VertexRef> target_frontier;
    bool uses_unvalidated_bridge = false;
};

struct FrontierCandidate {
    VertexRef ref;
    Vec2 position;  // corrected frame
};

struct PlannerParams {
    /// Goal attachment reach; <= 0 means the roadmap sample interval.
    double attach_radius = 0.0;
    /// How far the start may be from the roadmap, in sample intervals.
    double start_attach_factor = 3.0;
    /// Frontiers tried per exploration call before giving up.
    int max_attempts = 24;
};

/// w_d * |f - goal| + w_l * |f - last_waypoint|; the shift term is zero
/// before any waypoint was chosen.
double frontier_utility(Vec2 f, Vec2 goal, const PlannerState& state, const CostWeights& w);

/// Argmin of frontier_utility, ties to the lowest (submap, vertex). Sets
/// state.last_waypoint. Throws NoFrontiers.
FrontierCandidate select_waypoint(std::span<const FrontierCandidate> frontiers, Vec2 goal, PlannerState& state,
                                  const CostWeights& w);

/// Every frontier vertex across the store, ordered by (submap, vertex).
std::vector<FrontierCandidate> collect_frontiers(const SubmapStore& store);

/// Backtracing iff the goal attaches to the merged roadmap: a vertex within
/// attach_radius whose segment to the goal stays inside the area's coverage.
PlanMode select_mode(const LocalArea& area, Vec2 goal, double attach_radius);

/// Vertex the goal attaches to, if any.
std::optional<int> attach_goal(const LocalArea& area, Vec2 goal, double attach_radius);
/// Vertex the robot starts from: nearest covered attachment, else nearest
/// vertex within `reach`.
std::optional<int> attach_start(const LocalArea& area, Vec2 start, double reach);

/// A* over the merged roadmap between the attached start and goal.
/// Throws NoPath.
Plan plan_backtracing(const LocalArea& area, Vec2 start, Vec2 goal, const PlannerParams& params = {});

/// Where a goal lies in submaps outside the local area, if anywhere: the
/// submap owning the closest vertex within attach_radius.
std::optional<VertexRef> locate_in_map(const SubmapStore& store, Vec2 goal, double attach_radius);

/// Routes towards a position owned by a submap that may lie outside the
/// local area: topology A* picks the hop sequence, the local leg heads for
/// the area vertex that best approaches the first hop outside the area.
/// Throws NoPath.
Plan plan_via_topology(const GlobalTopology& topology, const LocalArea& area, Vec2 start, int target_submap,
                       Vec2 target, const PlannerParams& params = {});

/// Full exploration step: pick the frontier by utility (retrying the next
/// best when one is unreachable), then route to it. Throws NoFrontiers or NoPath.
Plan plan_exploration(const GlobalTopology& topology, const LocalArea& area,
                      std::span<const FrontierCandidate> frontiers, Vec2 start, Vec2 goal, PlannerState& state,
                      const CostWeights& w, const PlannerParams& params = {});

}  // namespace hitmap
