#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hitmap/geometry.hpp"
#include "hitmap/grid.hpp"
#include "hitmap/world.hpp"

namespace hitmap {

/// Global occupancy grid in the spirit of a conventional metric mapper: it
/// grows with the explored area, keeps every scan, and on a pose correction
/// rebuilds itself by re-integrating the whole scan history.
class BaselineGlobalMap {
public:
    enum class Cell : std::uint8_t { Unknown, Free, Obstacle };

    explicit BaselineGlobalMap(double resolution, int chunk_cells = 32);

    /// Integrates a scan taken at `pose` and appends it to the history.
    void integrate(const RangeScan& scan, const Pose2& pose);
    /// Replaces every history pose and re-integrates all scans from scratch.
    /// Returns the cell writes spent on the replay.
    std::uint64_t reintegrate(const std::vector<Pose2>& poses);

    const GridGeometry& geometry() const { return geom_; }
    std::size_t cell_count() const { return cells_.size(); }
    Cell at(CellIndex c) const { return geom_.contains(c) ? cells_[geom_.index(c)] : Cell::Unknown; }
    std::uint64_t cell_writes() const { return writes_; }
    const std::vector<Pose2>& poses() const { return poses_; }
    const std::vector<RangeScan>& scans() const { return scans_; }
    std::size_t history_beams() const { return beams_; }
    std::size_t memory_bytes() const;

private:
    void ensure_contains(Vec2 lo, Vec2 hi);
    void raycast(const RangeScan& scan, const Pose2& pose);
    void write(CellIndex c, Cell value);

    double res_;
    int chunk_;
    long long origin_ix_ = 0;
    long long origin_iy_ = 0;
    GridGeometry geom_;
    std::vector<Cell> cells_;
    std::vector<RangeScan> scans_;
    std::vector<Pose2> poses_;
    std::size_t beams_ = 0;
    std::uint64_t writes_ = 0;
};

/// 8-connected grid A* from `start` to `goal` treating Unknown as free and
/// cells within `robot_radius` of an obstacle as blocked. Returns cell centers.
std::optional<std::vector<Vec2>> plan_on_grid(const BaselineGlobalMap& map, Vec2 start, Vec2 goal,
                                              double robot_radius);

}  // namespace hitmap
