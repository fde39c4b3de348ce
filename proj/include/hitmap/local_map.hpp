#pragma once

#include <cstdint>
#include <vector>

#include "hitmap/geometry.hpp"
#include "hitmap/grid.hpp"
#include "hitmap/roadmap.hpp"
#include "hitmap/world.hpp"

namespace hitmap {

enum class CellState : std::uint8_t { Unknown, Free, Obstacle };

struct MapCell {
    CellState state = CellState::Unknown;
    std::uint32_t observation_count = 0;
    double height_mean = 0.0;
    double height_m2 = 0.0;  // sum of squared deviations (Welford)

    double height_var() const { return observation_count == 0 ? 0.0 : height_m2 / observation_count; }
};

/// Robot-centric fixed-size occupancy + elevation grid, axis-aligned with the
/// odometry frame. The window only ever moves by whole multiples of
/// `recenter_step` cells, so cells in the overlap keep their contents exactly.
class LocalMetricMap {
public:
    LocalMetricMap(double side_length, double resolution, int recenter_step_cells = 1);

    const GridGeometry& geometry() const { return geom_; }
    /// Window center in the odometry frame.
    Pose2 center() const;
    std::size_t cell_count() const { return cells_.size(); }
    const MapCell& cell(CellIndex c) const { return cells_[geom_.index(c)]; }
    MapCell& cell(CellIndex c) { return cells_[geom_.index(c)]; }
    const std::vector<MapCell>& cells() const { return cells_; }

    /// Moves the window so that `position` lies in its central step block.
    void recenter(Vec2 position);
    /// Ray-integrates a scan taken at `odom_pose`. Throws FrameMismatch unless
    /// both the scan origin and `odom_pose` are in the odometry frame.
    void integrate(const RangeScan& scan, const Pose2& odom_pose);

    /// Running count of per-cell writes (observation updates).
    std::uint64_t cell_writes() const { return writes_; }
    int recenter_step() const { return step_; }

private:
    void observe(CellIndex c, CellState observed, double height);

    GridGeometry geom_;
    int step_ = 1;
    long long origin_ix_ = 0;
    long long origin_iy_ = 0;
    std::vector<MapCell> cells_;
    std::uint64_t writes_ = 0;
};

LocalMetricMap integrate_scan(LocalMetricMap map, const RangeScan& scan, const Pose2& odom_pose);

struct TraversabilityCell {
    float slope = 0.0f;
    float roughness = 0.0f;
    bool traversable = false;
    bool inflated = false;
};

struct TraversabilityGrid {
    GridGeometry geometry;
    std::vector<TraversabilityCell> cells;

    const TraversabilityCell& at(CellIndex c) const { return cells[geometry.index(c)]; }
    TraversabilityCell& at(CellIndex c) { return cells[geometry.index(c)]; }
    bool traversable(CellIndex c) const { return geometry.contains(c) && at(c).traversable; }
    /// Terrain allows driving, ignoring the robot footprint.
    bool passable(CellIndex c) const { return geometry.contains(c) && (at(c).traversable || at(c).inflated); }
    bool traversable_at(Vec2 p) const;
    std::size_t traversable_count() const;
};

struct TraversabilityParams {
    double slope_threshold = 0.3;
    double roughness_threshold = 0.01;
};

TraversabilityGrid compute_traversability(const LocalMetricMap& map, const TraversabilityParams& params = {});

/// Marks traversable cells within `robot_radius` of any blocked cell
/// (obstacle, unknown, or too steep/rough) as inflated. Distances come from an
/// exact two-pass Euclidean distance transform between cell centers.
TraversabilityGrid inflate_obstacles(TraversabilityGrid grid, double robot_radius);

/// Squared distance (in cells) from every cell to the nearest seed cell;
/// +inf when there are no seeds.
std::vector<double> squared_distance_transform(int width, int height, const std::vector<bool>& seeds);

/// True when every lattice cell touched by [a, b] is traversable.
bool segment_traversable(const TraversabilityGrid& grid, Vec2 a, Vec2 b);

/// Square lattice of pitch `sample_interval` through the grid center; keeps
/// traversable lattice points and joins 8-neighbors with traversable segments.
Roadmap sample_roadmap(const TraversabilityGrid& grid, double sample_interval);

struct FrontierParams {
    int min_frontier_cells = 3;
    /// Treat cells beyond the window edge as unknown space.
    bool border_is_unknown = false;
};

/// Cells reached by a 4-connected BFS over passable cells from `robot_cell`
/// that are 4-adjacent to an Unknown cell, in row-major order.
std::vector<CellIndex> find_frontier_cells(const LocalMetricMap& map, const TraversabilityGrid& grid,
                                           CellIndex robot_cell, const FrontierParams& params = {});

/// 8-connected clusters of frontier cells.
std::vector<std::vector<CellIndex>> cluster_frontier_cells(const std::vector<CellIndex>& cells);

/// Wave-front frontier detection. Every cell of a cluster with at least
/// `min_frontier_cells` cells marks its nearest reachable roadmap vertex
/// (ties: lowest id). Throws RobotCellNotTraversable.
Roadmap detect_frontiers(const LocalMetricMap& map, const TraversabilityGrid& grid, const Roadmap& roadmap,
                         CellIndex robot_cell, const FrontierParams& params = {});

}  // namespace hitmap
