#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hitmap/geometry.hpp"
#include "hitmap/grid.hpp"

namespace hitmap {

enum class CellType : std::uint8_t { Free, Obstacle };

/// Immutable closed 2D grid world with optional per-cell elevation.
/// Row 0 is the bottom row (y = 0); the world origin is (0, 0).
class World {
public:
    World() = default;
    /// Validates cell count and the closed-boundary invariant.
    World(int width, int height, double resolution, std::vector<CellType> cells,
          std::vector<double> elevation = {});

    int width() const { return geom_.width; }
    int height() const { return geom_.height; }
    double resolution() const { return geom_.resolution; }
    const GridGeometry& geometry() const { return geom_; }
    bool has_elevation() const { return !elevation_.empty(); }

    CellType at(CellIndex c) const { return cells_[geom_.index(c)]; }
    double elevation(CellIndex c) const { return elevation_.empty() ? 0.0 : elevation_[geom_.index(c)]; }
    /// Points outside the grid count as obstacles.
    bool is_obstacle(Vec2 p) const;
    const std::vector<CellType>& cells() const { return cells_; }
    const std::vector<double>& elevations() const { return elevation_; }
    std::size_t count(CellType type) const;

private:
    GridGeometry geom_;
    std::vector<CellType> cells_;
    std::vector<double> elevation_;
};

/// ASCII: first line "resolution <meters>", then one line per row, top row
/// (highest y) first, '#' = Obstacle, '.' = Free.
World parse_ascii_world(const std::string& text);
std::string to_ascii(const World& world);
/// JSON: {"width", "height", "resolution", "cells": [0|1 row-major from y = 0],
/// optional "elevation": [meters, same layout]}.
World parse_json_world(const nlohmann::json& doc);
nlohmann::json to_json(const World& world);
/// Picks the format by content: JSON when the first non-blank character is '{'.
World load_world(const std::filesystem::path& path);
void save_world(const World& world, const std::filesystem::path& path);

enum class SensorKind { DepthCamera, Lidar };

struct SensorModel {
    double max_range = 5.0;
    double fov = 2.0 * std::numbers::pi / 3.0;
    double angular_resolution = std::numbers::pi / 180.0;
    SensorKind kind = SensorKind::DepthCamera;

    /// Throws ConfigError when an invariant fails.
    void validate() const;
    /// fov / angular_resolution + 1, except a full 2*pi sweep which does not
    /// repeat its first bearing.
    int beam_count() const;
    double bearing(int beam) const;

    static SensorModel depth_camera(double range = 5.0);
    static SensorModel lidar(double range = 15.0);
};

struct DriftModel {
    double trans_drift_per_meter = 0.0;
    double rot_drift_per_meter = 0.0;
    std::uint64_t seed = 0;
};

struct Beam {
    double bearing = 0.0;
    double range = 0.0;
    bool hit = false;
};

/// Ground height observed along a beam: valid for beam parameter t < t_exit.
struct HeightSample {
    double t_exit = 0.0;
    double height = 0.0;
};

struct RangeScan {
    Pose2 origin;
    double max_range = 0.0;
    std::vector<Beam> beams;
    /// Either empty (flat world) or one entry per beam.
    std::vector<std::vector<HeightSample>> heights;

    /// Same measurements attached to a different origin (e.g. the odometry pose).
    RangeScan with_origin(const Pose2& origin) const;
    /// Height observed at distance t along beam `i` (0 when no samples).
    double height_at(std::size_t beam, double t) const;
};

/// DDA ray cast from `true_pose`. Throws PoseInObstacle.
RangeScan sense(const World& world, const Pose2& true_pose, const SensorModel& sensor);

struct Command {
    double v = 0.0;  // m/s
    double w = 0.0;  // rad/s
};

struct StepResult {
    Pose2 true_pose;
    Pose2 odom_pose;
    bool collided = false;
    double distance = 0.0;
};

/// Seeded odometry error generator. Each mission draws a systematic bias
/// (scale, lateral, heading per meter) and every step adds white noise of the
/// same per-meter magnitude, so error grows roughly linearly with distance.
class DriftSampler {
public:
    explicit DriftSampler(const DriftModel& model);
    struct Perturbation {
        double along = 0.0;    // fractional extra forward travel
        double lateral = 0.0;  // sideways meters per meter
        double heading = 0.0;  // radians per meter
    };
    Perturbation next();
    const DriftModel& model() const { return model_; }

private:
    double gaussian();

    DriftModel model_;
    std::mt19937_64 rng_;
    Perturbation bias_;
};

/// Unicycle integration over `dt` (exact arc).
Pose2 integrate_unicycle(const Pose2& pose, double v, double w, double dt);

/// Advances ground truth and odometry by one command. Motion that would enter
/// an Obstacle cell is clamped at the last free sample; rotation still applies.
StepResult step(const World& world, const Pose2& true_pose, const Pose2& odom_pose, Command command, double dt,
                DriftSampler& drift);

struct AnchorRecord {
    int submap_id = 0;
    Pose2 true_anchor;
};

/// Simulated place recognition: the oldest submap whose true anchor is within
/// `radius` of the current true pose, skipping `current_id` and `current_id - 1`.
std::optional<int> detect_loop(std::span<const AnchorRecord> history, const Pose2& current_true_pose, double radius,
                               int current_id);

}  // namespace hitmap
