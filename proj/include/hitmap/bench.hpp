#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hitmap/local_area.hpp"
#include "hitmap/planner.hpp"
#include "hitmap/submap.hpp"
#include "hitmap/topology.hpp"
#include "hitmap/world.hpp"

namespace hitmap {

enum class PlannerKind { HiTMap, Greedy };

struct ScenarioConfig {
    std::string name = "scenario";
    /// World file; resolved relative to the config file when loaded from one.
    std::filesystem::path world_path;
    Pose2 start{1.0, 1.0, 0.0, Frame::GroundTruth};
    /// Visited in order; the mission is Reached after the last one.
    std::vector<Vec2> goals;
    SensorModel sensor = SensorModel::depth_camera();
    DriftModel drift;
    double local_map_size = 5.0;
    double resolution = 0.1;
    double submap_interval = 5.0;
    double sample_interval = 0.3;
    double robot_radius = 0.25;
    /// Goal attachment and arrival distance; <= 0 means the sample interval.
    double attach_radius = 0.0;
    CostWeights weights;
    int frame_budget = 10000;
    std::uint64_t seed = 0;
    /// Place-recognition radius around submap anchors; <= 0 means half the submap interval.
    double loop_radius = 0.0;
    bool loop_validation = true;
    double max_speed = 0.5;
    double max_turn_rate = 1.5;
    double dt = 0.1;
    PlannerKind planner = PlannerKind::HiTMap;
    /// Render a snapshot every N frames (0: final frame only).
    int snapshot_every = 0;
    /// Stuck when the robot moved less than stall_distance over stall_frames.
    int stall_frames = 300;
    double stall_distance = 0.15;

    /// Throws ConfigError.
    void validate() const;
    double effective_attach_radius() const { return attach_radius > 0.0 ? attach_radius : sample_interval; }
    double effective_loop_radius() const { return loop_radius > 0.0 ? loop_radius : 0.5 * submap_interval; }
};

nlohmann::json to_json(const ScenarioConfig& config);
/// Missing keys keep their defaults. Throws ConfigError.
ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

enum class Outcome { Reached, Timeout, Stuck };
std::string_view to_string(Outcome outcome);
int exit_code(Outcome outcome);

struct FrameMetrics {
    int frame_num = 0;
    std::uint64_t active_memory_bytes = 0;
    std::uint64_t total_memory_bytes = 0;
    double frame_time = 0.0;  // wall clock; kept out of the deterministic log
    std::uint64_t reintegration_cell_writes = 0;
    std::string mode;
    double distance_to_goal = 0.0;  // believed pose to current goal
    double true_distance_to_goal = 0.0;
    int goal_index = 0;
    int submaps = 0;
    int topology_edges = 0;
    int frontiers = 0;
    bool collided = false;
};

/// Deterministic fields only (no frame_time).
nlohmann::json to_json(const FrameMetrics& m);

struct LoopEvent {
    int frame = 0;
    int current = 0;
    int candidate = 0;
    bool accepted = false;
    bool validated = false;
    /// Wall time of the correction, seconds (0 when rejected).
    double correction_seconds = 0.0;
    int corrected_submaps = 0;
    std::uint64_t correction_cell_writes = 0;
    /// In the true world the two anchors are only joined by a path much longer
    /// than their separation: the loop spans an obstacle.
    bool crosses_obstacle = false;
};

struct RunResult {
    Outcome outcome = Outcome::Timeout;
    std::string reason;
    std::vector<FrameMetrics> metrics;
    std::vector<LoopEvent> loops;
    int frames = 0;
    int goals_reached = 0;
    Pose2 final_true_pose;
    Pose2 final_belief;
    /// First frame whose plan used an unvalidated bridge, or -1.
    int first_unvalidated_plan_frame = -1;
    std::optional<Plan> last_plan;
    std::vector<Vec2> true_path;

    // HiTMap state
    SubmapStore store;
    /// Ground-truth pose of the robot when each submap was created.
    std::vector<AnchorRecord> true_anchors;
    GlobalTopology topology;

    // Baseline state
    std::uint64_t baseline_replayed_writes = 0;
    std::size_t baseline_history_scans = 0;
    /// Scans and corrected poses fed to the last replay, for auditing it.
    std::vector<RangeScan> baseline_replay_scans;
    std::vector<Pose2> baseline_replay_poses;
};

struct RunOptions {
    /// Where metrics.jsonl, timing.jsonl, map/, topology.json and snapshots
    /// go; nothing is written when empty.
    std::filesystem::path out_dir;
    bool write_snapshots = true;
};

/// Full HiTMap loop: sense, map, sample, detect frontiers, merge into
/// submaps, close loops, plan and follow, once per frame. Throws ConfigError.
RunResult run_scenario(const World& world, const ScenarioConfig& config, const RunOptions& options = {});
/// Same mission with a growing global grid, grid A* and full re-integration
/// on every loop correction.
RunResult run_baseline(const World& world, const ScenarioConfig& config, const RunOptions& options = {});

/// Memory accounting (bytes) from item counts.
std::uint64_t local_map_bytes(std::size_t cells);
std::uint64_t roadmap_bytes(const Roadmap& roadmap);
std::uint64_t submap_bytes(const Submap& submap);
std::uint64_t topology_bytes(const GlobalTopology& topology);

/// Least-squares slope of ys against their index.
double least_squares_slope(const std::vector<double>& ys);

/// Pure pursuit along a polyline: steer at the point `lookahead` ahead of the
/// closest point, slowing for sharp turns and the final approach.
Command follow_path(const Pose2& pose, const std::vector<Vec2>& path, double lookahead, double max_speed,
                    double max_turn_rate);

}  // namespace hitmap
