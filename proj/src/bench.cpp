#include "hitmap/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <tuple>

#include "hitmap/baseline.hpp"
#include "hitmap/errors.hpp"
#include "hitmap/graph_search.hpp"
#include "hitmap/local_map.hpp"
#include "hitmap/render.hpp"
#include "hitmap/serialization.hpp"

namespace hitmap {

using nlohmann::json;

void ScenarioConfig::validate() const {
    sensor.validate();
    weights.validate();
    if (goals.empty()) throw ConfigError("at least one goal is required");
    if (!(local_map_size > 0.0) || !(resolution > 0.0)) throw ConfigError("local map size and resolution must be positive");
    if (!(submap_interval > 0.0)) throw ConfigError("submap interval must be positive");
    if (sample_interval < resolution) throw ConfigError("sample interval must be at least the resolution");
    if (robot_radius < 0.0) throw ConfigError("robot radius must be non-negative");
    if (attach_radius < 0.0) throw ConfigError("attach radius must be non-negative");
    if (frame_budget <= 0) throw ConfigError("frame budget must be positive");
    if (!(dt > 0.0) || !(max_speed > 0.0) || !(max_turn_rate > 0.0)) throw ConfigError("motion limits must be positive");
    if (start.frame() != Frame::GroundTruth) throw ConfigError("start pose must be given in the ground-truth frame");
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string planner_name(PlannerKind k) { return k == PlannerKind::HiTMap ? "hitmap" : "greedy"; }

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const ScenarioConfig& c) {
    json goals = json::array();
    for (const Vec2& g : c.goals) goals.push_back({g.x, g.y});
    return {
        {"name", c.name},
        {"world", c.world_path.generic_string()},
        {"start", {c.start.x(), c.start.y(), c.start.theta()}},
        {"goals", goals},
        {"sensor",
         {{"kind", c.sensor.kind == SensorKind::Lidar ? "lidar" : "depth_camera"},
          {"max_range", c.sensor.max_range},
          {"fov_deg", c.sensor.fov / kDeg},
          {"angular_resolution_deg", c.sensor.angular_resolution / kDeg}}},
        {"drift",
         {{"trans_per_meter", c.drift.trans_drift_per_meter}, {"rot_per_meter", c.drift.rot_drift_per_meter}}},
        {"local_map", {{"size", c.local_map_size}, {"resolution", c.resolution}}},
        {"submap_interval", c.submap_interval},
        {"sample_interval", c.sample_interval},
        {"robot_radius", c.robot_radius},
        {"attach_radius", c.attach_radius},
        {"weights", {c.weights.w_d, c.weights.w_l}},
        {"frame_budget", c.frame_budget},
        {"seed", c.seed},
        {"loop_radius", c.loop_radius},
        {"loop_validation", c.loop_validation},
        {"max_speed", c.max_speed},
        {"max_turn_rate", c.max_turn_rate},
        {"dt", c.dt},
        {"planner", planner_name(c.planner)},
        {"snapshot_every", c.snapshot_every},
        {"stall_frames", c.stall_frames},
        {"stall_distance", c.stall_distance},
    };
}

ScenarioConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    ScenarioConfig c;
    try {
        read_opt(j, "name", c.name);
        if (j.contains("world")) {
            std::filesystem::path p = j.at("world").get<std::string>();
            c.world_path = (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
        }
        if (j.contains("start")) {
            const auto& s = j.at("start");
            c.start = Pose2(s.at(0).get<double>(), s.at(1).get<double>(), s.size() > 2 ? s.at(2).get<double>() : 0.0,
                            Frame::GroundTruth);
        }
        if (j.contains("goals")) {
            c.goals.clear();
            for (const auto& g : j.at("goals")) c.goals.push_back({g.at(0).get<double>(), g.at(1).get<double>()});
        }
        if (j.contains("sensor")) {
            const auto& s = j.at("sensor");
            const std::string kind = s.value("kind", std::string("depth_camera"));
            if (kind == "lidar") {
                c.sensor = SensorModel::lidar();
            } else if (kind == "depth_camera") {
                c.sensor = SensorModel::depth_camera();
            } else {
                throw ConfigError("unknown sensor kind '" + kind + "'");
            }
            read_opt(s, "max_range", c.sensor.max_range);
            if (s.contains("fov_deg")) c.sensor.fov = s.at("fov_deg").get<double>() * kDeg;
            if (s.contains("angular_resolution_deg")) {
                c.sensor.angular_resolution = s.at("angular_resolution_deg").get<double>() * kDeg;
            }
        }
        if (j.contains("drift")) {
            read_opt(j.at("drift"), "trans_per_meter", c.drift.trans_drift_per_meter);
            read_opt(j.at("drift"), "rot_per_meter", c.drift.rot_drift_per_meter);
        }
        if (j.contains("local_map")) {
            read_opt(j.at("local_map"), "size", c.local_map_size);
            read_opt(j.at("local_map"), "resolution", c.resolution);
        }
        read_opt(j, "submap_interval", c.submap_interval);
        read_opt(j, "sample_interval", c.sample_interval);
        read_opt(j, "robot_radius", c.robot_radius);
        read_opt(j, "attach_radius", c.attach_radius);
        if (j.contains("weights")) {
            c.weights.w_d = j.at("weights").at(0).get<double>();
            c.weights.w_l = j.at("weights").at(1).get<double>();
        }
        read_opt(j, "frame_budget", c.frame_budget);
        read_opt(j, "seed", c.seed);
        read_opt(j, "loop_radius", c.loop_radius);
        read_opt(j, "loop_validation", c.loop_validation);
        read_opt(j, "max_speed", c.max_speed);
        read_opt(j, "max_turn_rate", c.max_turn_rate);
        read_opt(j, "dt", c.dt);
        if (j.contains("planner")) {
            const std::string p = j.at("planner").get<std::string>();
            if (p == "hitmap") {
                c.planner = PlannerKind::HiTMap;
            } else if (p == "greedy") {
                c.planner = PlannerKind::Greedy;
            } else {
                throw ConfigError("unknown planner '" + p + "'");
            }
        }
        read_opt(j, "snapshot_every", c.snapshot_every);
        read_opt(j, "stall_frames", c.stall_frames);
        read_opt(j, "stall_distance", c.stall_distance);
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    c.drift.seed = c.seed;
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    try {
        return config_from_json(json::parse(read_text(path)), path.parent_path());
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Reached: return "reached";
        case Outcome::Timeout: return "timeout";
        case Outcome::Stuck: return "stuck";
    }
    return "timeout";
}

int exit_code(Outcome outcome) {
    switch (outcome) {
        case Outcome::Reached: return 0;
        case Outcome::Timeout: return 2;
        case Outcome::Stuck: return 3;
    }
    return 1;
}

json to_json(const FrameMetrics& m) {
    return {{"frame_num", m.frame_num},
            {"active_memory_bytes", m.active_memory_bytes},
            {"total_memory_bytes", m.total_memory_bytes},
            {"reintegration_cell_writes", m.reintegration_cell_writes},
            {"mode", m.mode},
            {"distance_to_goal", m.distance_to_goal},
            {"true_distance_to_goal", m.true_distance_to_goal},
            {"goal_index", m.goal_index},
            {"submaps", m.submaps},
            {"topology_edges", m.topology_edges},
            {"frontiers", m.frontiers},
            {"collided", m.collided}};
}

std::uint64_t local_map_bytes(std::size_t cells) { return cells * (sizeof(MapCell) + sizeof(TraversabilityCell)); }

std::uint64_t roadmap_bytes(const Roadmap& roadmap) {
    return roadmap.vertices.size() * sizeof(RoadmapVertex) + roadmap.edges.size() * sizeof(RoadmapEdge);
}

std::uint64_t submap_bytes(const Submap& submap) {
    return sizeof(Submap) + roadmap_bytes(submap.roadmap) + submap.frontier_vertex_ids.size() * sizeof(int);
}

std::uint64_t topology_bytes(const GlobalTopology& topology) {
    return topology.node_count() * sizeof(Pose2) + topology.edges().size() * sizeof(TopologyEdge);
}

double least_squares_slope(const std::vector<double>& ys) {
    const std::size_t n = ys.size();
    if (n < 2) return 0.0;
    const double mx = (static_cast<double>(n) - 1.0) / 2.0;
    double my = 0.0;
    for (double y : ys) my += y;
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - mx;
        sxy += dx * (ys[i] - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

Command follow_path(const Pose2& pose, const std::vector<Vec2>& path, double lookahead, double max_speed,
                    double max_turn_rate) {
    if (path.empty()) return {};
    const Vec2 p = pose.position();
    Vec2 target = path.front();
    if (path.size() > 1) {
        // Closest point on the polyline, then walk `lookahead` further along it.
        std::size_t seg = 0;
        double seg_t = 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const Vec2 d = path[i + 1] - path[i];
            const double len2 = dot(d, d);
            const double t = len2 > 0.0 ? std::clamp(dot(p - path[i], d) / len2, 0.0, 1.0) : 0.0;
            const double dist = squared_distance(p, path[i] + t * d);
            if (dist < best) {
                best = dist;
                seg = i;
                seg_t = t;
            }
        }
        double remaining = lookahead;
        Vec2 cur = path[seg] + seg_t * (path[seg + 1] - path[seg]);
        target = path.back();
        for (std::size_t i = seg; i + 1 < path.size(); ++i) {
            const double len = distance(cur, path[i + 1]);
            if (len >= remaining) {
                target = cur + (remaining / len) * (path[i + 1] - cur);
                break;
            }
            remaining -= len;
            cur = path[i + 1];
        }
    }
    const Vec2 d = target - p;
    const double to_end = distance(p, path.back());
    if (norm(d) < 1e-6 && to_end < 1e-6) return {};
    const double alpha = normalize_angle(std::atan2(d.y, d.x) - pose.theta());
    Command c;
    c.w = std::clamp(2.0 * alpha, -max_turn_rate, max_turn_rate);
    const double align = std::cos(alpha);
    c.v = std::abs(alpha) > std::numbers::pi / 3.0 ? 0.0 : max_speed * align * align;
    c.v = std::min(c.v, std::max(0.1 * max_speed, to_end));
    return c;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// True when the free-space path between a and b in the true world is much
/// longer than the straight line (or absent): the pair sits on opposite
/// sides of an obstacle. 8-connected Dijkstra over free cells.
bool separated_by_obstacle(const World& world, Vec2 a, Vec2 b) {
    const GridGeometry& g = world.geometry();
    const auto ca = g.cell_of(a);
    const auto cb = g.cell_of(b);
    if (!ca || !cb || world.at(*ca) == CellType::Obstacle || world.at(*cb) == CellType::Obstacle) return true;
    const double straight = distance(a, b);
    const double limit = 3.0 * straight + 5.0;
    std::vector<double> dist(g.cell_count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[g.index(*ca)] = 0.0;
    open.push({0.0, g.index(*ca)});
    const std::size_t target = g.index(*cb);
    while (!open.empty()) {
        const auto [d, i] = open.top();
        open.pop();
        if (d > dist[i]) continue;
        if (i == target) return false;
        if (d > limit) break;
        const CellIndex c = g.cell_at(i);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const CellIndex n{c.x + dx, c.y + dy};
                if (!g.contains(n) || world.at(n) == CellType::Obstacle) continue;
                if (dx != 0 && dy != 0 &&
                    (world.at({c.x + dx, c.y}) == CellType::Obstacle || world.at({c.x, c.y + dy}) == CellType::Obstacle)) {
                    continue;
                }
                const double nd = d + g.resolution * ((dx != 0 && dy != 0) ? std::numbers::sqrt2 : 1.0);
                const std::size_t ni = g.index(n);
                if (nd < dist[ni]) {
                    dist[ni] = nd;
                    open.push({nd, ni});
                }
            }
        }
    }
    return true;
}

/// Traversable cell closest to `c` (within `reach` cells), preferring `c`.
std::optional<CellIndex> nearest_traversable(const TraversabilityGrid& grid, CellIndex c, int reach) {
    if (grid.traversable(c)) return c;
    std::optional<CellIndex> best;
    int best_d2 = reach * reach + 1;
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            const CellIndex n{c.x + dx, c.y + dy};
            const int d2 = dx * dx + dy * dy;
            if (d2 < best_d2 && grid.traversable(n)) {
                best = n;
                best_d2 = d2;
            }
        }
    }
    return best;
}

class Outputs {
public:
    Outputs(const RunOptions& opts) : dir_(opts.out_dir), snapshots_(opts.write_snapshots) {
        if (dir_.empty()) return;
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
        metrics_.open(dir_ / "metrics.jsonl", std::ios::binary | std::ios::trunc);
        timing_.open(dir_ / "timing.jsonl", std::ios::binary | std::ios::trunc);
        if (!metrics_ || !timing_) throw IoError("cannot open metrics files in " + dir_.string());
    }
    bool enabled() const { return !dir_.empty(); }
    bool snapshots() const { return enabled() && snapshots_; }
    const std::filesystem::path& dir() const { return dir_; }
    void frame(const FrameMetrics& m) {
        if (!enabled()) return;
        metrics_ << to_json(m).dump() << '\n';
        timing_ << json{{"frame_num", m.frame_num}, {"frame_time", m.frame_time}}.dump() << '\n';
    }
    void loop(const LoopEvent& e) {
        if (!enabled()) return;
        timing_ << json{{"frame_num", e.frame},
                        {"loop", {e.candidate, e.current}},
                        {"accepted", e.accepted},
                        {"correction_seconds", e.correction_seconds},
                        {"corrected_submaps", e.corrected_submaps}}
                       .dump()
                << '\n';
    }
    void flush() {
        if (!enabled()) return;
        metrics_.flush();
        timing_.flush();
    }

private:
    std::filesystem::path dir_;
    bool snapshots_;
    std::ofstream metrics_;
    std::ofstream timing_;
};

std::string snapshot_name(int frame) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.png", frame);
    return buf;
}

/// Backs off briefly after repeated bumps so the planner can re-route.
struct BumpRecovery {
    int bumps = 0;
    int backing = 0;

    Command filter(Command cmd, double max_speed) {
        if (backing <= 0) return cmd;
        --backing;
        return {-0.3 * max_speed, 0.0};
    }
    void observe(bool collided) {
        bumps = collided ? bumps + 1 : 0;
        if (bumps >= 5) {
            bumps = 0;
            backing = 10;
        }
    }
};

double lookahead_for(double sample_interval) { return std::min(2.0 * sample_interval, 1.0); }

/// Stall detector over the true trajectory.
bool stalled(const std::vector<Vec2>& path, int frames, double dist) {
    if (static_cast<int>(path.size()) <= frames) return false;
    const Vec2 now = path.back();
    for (std::size_t i = path.size() - 1 - static_cast<std::size_t>(frames); i < path.size(); ++i) {
        if (distance(path[i], now) >= dist) return false;
    }
    return true;
}

/// Point `ahead` meters along a polyline (its end when shorter).
Vec2 carrot_on(const std::vector<Vec2>& path, double ahead) {
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double len = distance(path[i - 1], path[i]);
        if (len >= ahead) return path[i - 1] + (ahead / len) * (path[i] - path[i - 1]);
        ahead -= len;
    }
    return path.back();
}

/// Route over the live local roadmap (odometry frame) towards `carrot`: the
/// reachable vertex closest to it, with a small charge for path length. The
/// robot joins every vertex within `reach` it can drive to in a straight
/// line, so near-ties between start vertices cannot flip the route. Empty
/// when the robot cannot attach or is already as close as it gets.
std::vector<Vec2> local_leg(const Roadmap& roadmap, const TraversabilityGrid& trav, Vec2 robot, Vec2 carrot,
                            double reach, bool append_carrot) {
    if (roadmap.empty()) return {};
    // The robot's own cell is exempt: a hit just in front of the robot can
    // land in it when it touches a wall.
    const auto rc = trav.geometry.cell_of(robot);
    const auto passable_segment = [&](Vec2 a, Vec2 b) {
        return for_each_segment_cell(trav.geometry, a, b, [&](CellIndex c) { return (rc && c == *rc) || trav.passable(c); });
    };
    Adjacency adj = roadmap.adjacency();
    const int src = static_cast<int>(adj.size());
    adj.emplace_back();
    for (const auto& v : roadmap.vertices) {
        const double d = distance(v.position, robot);
        if (d > reach) continue;
        if (!passable_segment(robot, v.position)) continue;
        adj.back().emplace_back(v.id, d);
    }
    if (adj.back().empty()) return {};
    const ShortestPathTree tree = dijkstra_tree(adj, src);
    constexpr double detour_weight = 0.1;
    int best = src;
    double best_score = distance(robot, carrot);
    for (const auto& v : roadmap.vertices) {
        const double g = tree.dist[static_cast<std::size_t>(v.id)];
        if (!std::isfinite(g)) continue;
        const double score = distance(v.position, carrot) + detour_weight * g;
        if (score < best_score - 1e-9) {
            best_score = score;
            best = v.id;
        }
    }
    if (best == src) return {};
    std::vector<Vec2> path;
    for (int v : tree.path_to(best)) {
        if (v != src) path.push_back(roadmap.vertices[static_cast<std::size_t>(v)].position);
    }
    if (append_carrot && distance(path.back(), carrot) <= roadmap.sample_interval) path.push_back(carrot);
    return path;
}

}  // namespace

RunResult run_scenario(const World& world, const ScenarioConfig& cfg, const RunOptions& options) {
    cfg.validate();
    if (world.is_obstacle(cfg.start.position())) throw ConfigError("start pose lies in an obstacle");
    const bool greedy = cfg.planner == PlannerKind::Greedy;
    DriftModel drift_model = cfg.drift;
    drift_model.seed = cfg.seed;
    DriftSampler drift(drift_model);
    Outputs out(options);

    const double interval = cfg.sample_interval;
    const double attach = cfg.effective_attach_radius();
    PlannerParams pparams;
    pparams.attach_radius = attach;
    const double connect = 2.0 * interval;
    const double eps = interval / 3.0;
    const double carrot_distance = 0.4 * cfg.local_map_size;
    const int step_cells = std::max(1, static_cast<int>(std::lround(interval / cfg.resolution)));
    const int robot_reach = static_cast<int>(std::ceil(cfg.robot_radius / cfg.resolution)) + 2;
    const FrontierParams fparams{3, true};
    const Pose2 odom_origin(0.0, 0.0, 0.0, Frame::Odometry);

    RunResult res;
    Pose2 truth = cfg.start;
    Pose2 odom = truth.in_frame(Frame::Odometry);
    LocalMetricMap local(cfg.local_map_size, cfg.resolution, step_cells);
    std::vector<AnchorRecord> history;
    if (!greedy) {
        register_submap(res.topology, res.store, make_initial_submap(odom, interval));
        history.push_back({0, truth});
    }
    // Rejected loop candidates are retried once anchors or contents change.
    std::map<std::pair<int, int>, std::tuple<std::uint64_t, std::size_t, std::size_t>> rejected;
    double arc = 0.0;
    std::uint64_t reintegration = 0;
    PlannerState state;
    std::size_t goal_idx = 0;
    res.true_path.push_back(truth.position());
    // Exploration target progress; targets that stop getting closer are
    // treated as unreachable and dropped.
    struct Progress {
        double best;
        int since;
    };
    std::map<VertexRef, Progress> targets;
    constexpr int kGiveUpFrames = 80;
    BumpRecovery recovery;

    auto snapshot = [&](int frame, const Plan* plan, const Pose2& belief) {
        if (!out.snapshots()) return;
        SnapshotInput in;
        in.world = &world;
        in.store = greedy ? nullptr : &res.store;
        in.topology = greedy ? nullptr : &res.topology;
        in.plan = plan;
        in.robot = belief;
        in.goals = cfg.goals;
        render_snapshot(in, out.dir() / snapshot_name(frame));
    };

    bool finished = false;
    int frame = 0;
    for (; frame < cfg.frame_budget && !finished; ++frame) {
        const auto t0 = Clock::now();
        FrameMetrics m;
        m.frame_num = frame;

        const RangeScan scan = sense(world, truth, cfg.sensor).with_origin(odom);
        local.integrate(scan, odom);
        const TraversabilityGrid trav = inflate_obstacles(compute_traversability(local), cfg.robot_radius);
        Roadmap roadmap = sample_roadmap(trav, interval);
        if (const auto cell = local.geometry().cell_of(odom.position())) {
            if (const auto rc = nearest_traversable(trav, *cell, robot_reach)) {
                roadmap = detect_frontiers(local, trav, roadmap, *rc, fparams);
            }
        }

        Pose2 belief = odom.in_frame(Frame::Corrected);
        std::optional<Plan> plan;
        std::vector<Vec2> path;
        bool no_frontiers = false;
        std::size_t active_extra = 0;

        if (greedy) {
            path = local_leg(roadmap, trav, odom.position(), cfg.goals[goal_idx], 3.0 * interval, true);
            m.mode = "greedy";
            active_extra = roadmap_bytes(roadmap);
        } else {
            merge_local_into_submap(res.store.back(), roadmap, odom_origin, eps);
            if (auto fresh = maybe_spawn_submap(odom, arc, res.store.back(), cfg.submap_interval)) {
                const int id = fresh->id;
                register_submap(res.topology, res.store, std::move(*fresh));
                history.push_back({id, truth});
                merge_local_into_submap(res.store.back(), roadmap, odom_origin, eps);
            }
            const int current = res.store.back().id;

            // Place recognition, connectivity validation, correction.
            std::vector<AnchorRecord> candidates;
            for (const AnchorRecord& r : history) {
                if (r.submap_id >= current - 1 || res.topology.has_edge(r.submap_id, current)) continue;
                const auto it = rejected.find({r.submap_id, current});
                if (it != rejected.end() &&
                    it->second == std::tuple(res.topology.anchor_epoch(), res.store.get(r.submap_id).roadmap.vertices.size(),
                                             res.store.get(current).roadmap.vertices.size())) {
                    continue;
                }
                candidates.push_back(r);
            }
            if (const auto cand = detect_loop(candidates, truth, cfg.effective_loop_radius(), current)) {
                LoopEvent ev;
                ev.frame = frame;
                ev.current = current;
                ev.candidate = *cand;
                const Pose2& ta = history[static_cast<std::size_t>(*cand)].true_anchor;
                const Pose2& tb = history[static_cast<std::size_t>(current)].true_anchor;
                ev.crosses_obstacle = separated_by_obstacle(world, ta.position(), tb.position());
                if (cfg.loop_validation) {
                    ev.validated = validate_loop(res.topology, res.store, *cand, current, connect,
                                                 ta.between(tb).in_frame(Frame::Corrected));
                    ev.accepted = ev.validated;
                    if (ev.accepted) {
                        res.topology.add_validated_loop(*cand, current);
                    } else {
                        rejected[{*cand, current}] = {res.topology.anchor_epoch(),
                                                      res.store.get(*cand).roadmap.vertices.size(),
                                                      res.store.get(current).roadmap.vertices.size()};
                    }
                } else {
                    ev.accepted = true;
                    res.topology.add_unvalidated_loop(*cand, current);
                }
                if (ev.accepted) {
                    const Pose2 observed = ta.between(tb).in_frame(Frame::Corrected);
                    const std::uint64_t writes_before = local.cell_writes();
                    const auto tc = Clock::now();
                    const CorrectionResult cr = apply_correction(res.topology, res.store, {*cand, current}, observed);
                    ev.correction_seconds = seconds_since(tc);
                    ev.corrected_submaps = static_cast<int>(cr.moved.size());
                    ev.correction_cell_writes = local.cell_writes() - writes_before + cr.metric_cell_writes;
                    reintegration += ev.correction_cell_writes;
                }
                out.loop(ev);
                res.loops.push_back(ev);
            }

            LocalArea area = compose_local_area(res.topology, res.store, current, {connect, eps});
            persist_frontier_demotions(area, res.store);
            belief = res.store.get(current).corrected_pose(odom);

            // Frontiers the robot has reached are exhausted.
            area.coverage.index().for_each_within(belief.position(), 2.0 * interval, [&](int k, Vec2) {
                for (const VertexRef& r : area.sources[static_cast<std::size_t>(k)]) {
                    if (area.merged_frontiers.erase(r) > 0) res.store.get(r.submap).set_frontier(r.vertex, false);
                }
                area.merged_roadmap.vertices[static_cast<std::size_t>(k)].is_frontier = false;
            });

            while (goal_idx < cfg.goals.size() && distance(belief.position(), cfg.goals[goal_idx]) <= attach) {
                ++goal_idx;
            }
            if (goal_idx < cfg.goals.size()) {
                const Vec2 goal = cfg.goals[goal_idx];
                const std::vector<FrontierCandidate> pool = collect_frontiers(res.store);
                m.frontiers = static_cast<int>(pool.size());
                auto explore = [&]() -> std::optional<Plan> {
                    try {
                        return plan_exploration(res.topology, area, pool, belief.position(), goal, state, cfg.weights, pparams);
                    } catch (const NoFrontiers&) {
                        no_frontiers = true;
                    } catch (const NoPath&) {
                    }
                    return std::nullopt;
                };
                try {
                    if (attach_goal(area, goal, attach)) {
                        plan = plan_backtracing(area, belief.position(), goal, pparams);
                    } else if (const auto ref = locate_in_map(res.store, goal, attach); ref && !area.is_member(ref->submap)) {
                        // Known goal outside the local area: follow the topology
                        // unless that is a large detour compared to exploring.
                        const auto topo = dijkstra(res.topology.adjacency(), current);
                        const double via_topology = topo[static_cast<std::size_t>(ref->submap)];
                        if (via_topology <= 2.0 * distance(belief.position(), goal) + cfg.submap_interval) {
                            plan = plan_via_topology(res.topology, area, belief.position(), ref->submap, goal, pparams);
                        }
                    }
                } catch (const NoPath&) {
                    plan.reset();
                }
                if (!plan) plan = explore();
                if (plan && plan->target_frontier) {
                    const VertexRef t = *plan->target_frontier;
                    const double d = distance(belief.position(), res.store.get(t.submap).corrected_position(t.vertex));
                    auto [it, fresh] = targets.try_emplace(t, Progress{d, frame});
                    if (!fresh && d < it->second.best - 0.1) {
                        it->second = {d, frame};
                    } else if (!fresh && frame - it->second.since > kGiveUpFrames) {
                        res.store.get(t.submap).set_frontier(t.vertex, false);
                        targets.erase(it);
                    }
                }
                if (plan) {
                    // Execute on the freshest geometry: the first stretch of
                    // the plan, re-routed over the live local roadmap.
                    const Submap& cur = res.store.get(current);
                    const Vec2 carrot = carrot_on(plan->waypoints, carrot_distance);
                    const Vec2 carrot_odom = cur.creation_odom.transform(cur.anchor.inverse_transform(carrot));
                    const bool is_end = distance(carrot, plan->waypoints.back()) < 1e-9;
                    path = local_leg(roadmap, trav, odom.position(), carrot_odom, 3.0 * interval, is_end);
                    if (path.empty()) {
                        for (const Vec2& w : plan->waypoints) {
                            path.push_back(cur.creation_odom.transform(cur.anchor.inverse_transform(w)));
                        }
                    }
                    m.mode = std::string(to_string(plan->mode));
                    if (plan->uses_unvalidated_bridge && res.first_unvalidated_plan_frame < 0) {
                        res.first_unvalidated_plan_frame = frame;
                    }
                } else {
                    m.mode = "none";
                }
            }
            active_extra = roadmap_bytes(area.merged_roadmap) + area.merged_frontiers.size() * sizeof(VertexRef);
        }

        if (greedy) {
            while (goal_idx < cfg.goals.size() && distance(belief.position(), cfg.goals[goal_idx]) <= attach) ++goal_idx;
        }
        const bool done = goal_idx >= cfg.goals.size();
        m.goal_index = static_cast<int>(goal_idx);
        const Vec2 goal_now = cfg.goals[std::min(goal_idx, cfg.goals.size() - 1)];
        m.distance_to_goal = distance(belief.position(), goal_now);
        m.true_distance_to_goal = distance(truth.position(), goal_now);

        if (done) {
            res.outcome = Outcome::Reached;
            res.reason = "all goals reached";
            finished = true;
        } else if (!greedy && !plan && no_frontiers) {
            res.outcome = Outcome::Stuck;
            res.reason = "no plan and no frontiers left";
            finished = true;
        } else {
            const Command cmd = recovery.filter(
                follow_path(odom, path, lookahead_for(interval), cfg.max_speed, cfg.max_turn_rate), cfg.max_speed);
            const StepResult sr = step(world, truth, odom, cmd, cfg.dt, drift);
            arc += distance(odom.position(), sr.odom_pose.position());
            truth = sr.true_pose;
            odom = sr.odom_pose;
            m.collided = sr.collided;
            recovery.observe(sr.collided);
            res.true_path.push_back(truth.position());
            if (stalled(res.true_path, cfg.stall_frames, cfg.stall_distance)) {
                res.outcome = Outcome::Stuck;
                res.reason = "robot stalled";
                finished = true;
            }
        }

        // Memory from item counts.
        m.active_memory_bytes = local_map_bytes(local.cell_count()) + active_extra;
        m.total_memory_bytes = local_map_bytes(local.cell_count());
        if (greedy) {
            m.total_memory_bytes += roadmap_bytes(roadmap);
        } else {
            for (const Submap& s : res.store.all()) m.total_memory_bytes += submap_bytes(s);
            m.total_memory_bytes += topology_bytes(res.topology);
            m.submaps = static_cast<int>(res.store.size());
            m.topology_edges = static_cast<int>(res.topology.edges().size());
        }
        m.reintegration_cell_writes = reintegration;
        m.frame_time = seconds_since(t0);
        out.frame(m);
        res.metrics.push_back(m);
        if (plan) res.last_plan = plan;
        res.final_belief = belief;
        if (cfg.snapshot_every > 0 && frame % cfg.snapshot_every == 0) snapshot(frame, plan ? &*plan : nullptr, belief);
    }
    if (!finished) {
        res.outcome = Outcome::Timeout;
        res.reason = "frame budget exhausted";
    }
    res.frames = frame;
    res.goals_reached = static_cast<int>(goal_idx);
    res.final_true_pose = truth;
    res.true_anchors = std::move(history);
    if (out.enabled()) {
        out.flush();
        if (!greedy) save_map(out.dir(), res.store, res.topology);
        snapshot(frame, res.last_plan ? &*res.last_plan : nullptr, res.final_belief);
    }
    return res;
}

RunResult run_baseline(const World& world, const ScenarioConfig& cfg, const RunOptions& options) {
    cfg.validate();
    if (world.is_obstacle(cfg.start.position())) throw ConfigError("start pose lies in an obstacle");
    DriftModel drift_model = cfg.drift;
    drift_model.seed = cfg.seed;
    DriftSampler drift(drift_model);
    Outputs out(options);

    RunResult res;
    BaselineGlobalMap map(cfg.resolution);
    Pose2 truth = cfg.start;
    Pose2 odom = truth.in_frame(Frame::Odometry);
    // belief = correction * odom, both in the corrected frame.
    Pose2 correction(0.0, 0.0, 0.0, Frame::Corrected);
    struct Keyframe {
        std::size_t pose_index;
        Pose2 truth;
    };
    std::vector<Keyframe> keyframes;
    std::vector<AnchorRecord> history;
    std::set<std::pair<int, int>> closed;
    double arc = 0.0;
    double last_key_arc = 0.0;
    std::uint64_t reintegration = 0;
    std::size_t goal_idx = 0;
    std::vector<Vec2> path;
    BumpRecovery recovery;
    const double attach = cfg.effective_attach_radius();
    res.true_path.push_back(truth.position());

    bool finished = false;
    int frame = 0;
    for (; frame < cfg.frame_budget && !finished; ++frame) {
        const auto t0 = Clock::now();
        FrameMetrics m;
        m.frame_num = frame;
        Pose2 belief = correction.compose(odom.in_frame(Frame::Corrected));
        map.integrate(sense(world, truth, cfg.sensor).with_origin(belief), belief);
        const std::size_t pose_index = map.poses().size() - 1;
        if (keyframes.empty() || arc - last_key_arc >= cfg.submap_interval - 1e-9) {
            keyframes.push_back({pose_index, truth});
            history.push_back({static_cast<int>(keyframes.size()) - 1, truth});
            last_key_arc = arc;
        }
        const int current = static_cast<int>(keyframes.size()) - 1;
        std::vector<AnchorRecord> candidates;
        for (const AnchorRecord& r : history) {
            if (!closed.contains({r.submap_id, current})) candidates.push_back(r);
        }
        if (const auto cand = detect_loop(candidates, truth, cfg.effective_loop_radius(), current)) {
            closed.insert({*cand, current});
            LoopEvent ev;
            ev.frame = frame;
            ev.current = current;
            ev.candidate = *cand;
            ev.accepted = true;
            // Where the current pose should be, given the recognised place.
            const Keyframe& kf = keyframes[static_cast<std::size_t>(*cand)];
            const Pose2 kb = map.poses()[kf.pose_index];
            const Pose2 target = kb.compose(kf.truth.between(truth).in_frame(Frame::Corrected));
            const Vec2 pivot = belief.position();
            const Vec2 delta = target.position() - pivot;
            const double dtheta = normalize_angle(target.theta() - belief.theta());
            std::vector<Pose2> poses = map.poses();
            const std::size_t n = pose_index - kf.pose_index;
            for (std::size_t i = kf.pose_index + 1; i <= pose_index; ++i) {
                const double f = static_cast<double>(i - kf.pose_index) / static_cast<double>(n);
                const double c = std::cos(f * dtheta);
                const double s = std::sin(f * dtheta);
                const Vec2 r = poses[i].position() - pivot;
                const Vec2 p = pivot + Vec2{c * r.x - s * r.y, s * r.x + c * r.y} + f * delta;
                poses[i] = Pose2(p.x, p.y, poses[i].theta() + f * dtheta, Frame::Corrected);
            }
            const auto tc = Clock::now();
            const std::uint64_t writes = map.reintegrate(poses);
            ev.correction_seconds = seconds_since(tc);
            ev.correction_cell_writes = writes;
            ev.corrected_submaps = static_cast<int>(n);
            reintegration += writes;
            res.baseline_replayed_writes = writes;
            res.baseline_history_scans = map.scans().size();
            res.baseline_replay_scans = map.scans();
            res.baseline_replay_poses = poses;
            // Future odometry continues from the corrected pose.
            correction = poses[pose_index].compose(odom.in_frame(Frame::Corrected).inverse());
            belief = poses[pose_index];
            out.loop(ev);
            res.loops.push_back(ev);
        }

        while (goal_idx < cfg.goals.size() && distance(belief.position(), cfg.goals[goal_idx]) <= attach) ++goal_idx;
        m.goal_index = static_cast<int>(goal_idx);
        const Vec2 goal_now = cfg.goals[std::min(goal_idx, cfg.goals.size() - 1)];
        m.distance_to_goal = distance(belief.position(), goal_now);
        m.true_distance_to_goal = distance(truth.position(), goal_now);
        m.mode = "grid";
        if (goal_idx >= cfg.goals.size()) {
            res.outcome = Outcome::Reached;
            res.reason = "all goals reached";
            finished = true;
        } else {
            if (frame % 5 == 0 || path.empty()) {
                const auto p = plan_on_grid(map, belief.position(), goal_now, cfg.robot_radius);
                path = p ? *p : std::vector<Vec2>{};
                if (p && !path.empty() && distance(path.back(), goal_now) > 1e-9) path.push_back(goal_now);
            }
            if (path.empty()) m.mode = "none";
            const Command cmd = recovery.filter(
                follow_path(belief, path, lookahead_for(cfg.sample_interval), cfg.max_speed, cfg.max_turn_rate),
                cfg.max_speed);
            const StepResult sr = step(world, truth, odom, cmd, cfg.dt, drift);
            arc += distance(odom.position(), sr.odom_pose.position());
            truth = sr.true_pose;
            odom = sr.odom_pose;
            m.collided = sr.collided;
            recovery.observe(sr.collided);
            res.true_path.push_back(truth.position());
            if (stalled(res.true_path, cfg.stall_frames, cfg.stall_distance)) {
                res.outcome = Outcome::Stuck;
                res.reason = "robot stalled";
                finished = true;
            }
        }
        m.active_memory_bytes = map.memory_bytes();
        m.total_memory_bytes = map.memory_bytes();
        m.reintegration_cell_writes = reintegration;
        m.submaps = static_cast<int>(keyframes.size());
        m.frame_time = seconds_since(t0);
        out.frame(m);
        res.metrics.push_back(m);
        res.final_belief = belief;
    }
    if (!finished) {
        res.outcome = Outcome::Timeout;
        res.reason = "frame budget exhausted";
    }
    res.frames = frame;
    res.goals_reached = static_cast<int>(goal_idx);
    res.final_true_pose = truth;
    out.flush();
    return res;
}

}  // namespace hitmap
