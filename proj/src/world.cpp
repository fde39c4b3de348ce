#include "hitmap/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hitmap/errors.hpp"

namespace hitmap {

World::World(int width, int height, double resolution, std::vector<CellType> cells, std::vector<double> elevation)
    : geom_{Vec2{0.0, 0.0}, width, height, resolution}, cells_(std::move(cells)), elevation_(std::move(elevation)) {
    if (width <= 0 || height <= 0) {
        throw ParseError("world dimensions must be positive");
    }
    if (!(resolution > 0.0)) {
        throw ParseError("resolution must be positive");
    }
    if (cells_.size() != geom_.cell_count()) {
        throw ParseError("cell array has " + std::to_string(cells_.size()) + " entries, expected " +
                         std::to_string(geom_.cell_count()));
    }
    if (!elevation_.empty() && elevation_.size() != cells_.size()) {
        throw ParseError("elevation array size does not match the cell array");
    }
    for (int x = 0; x < width; ++x) {
        if (at({x, 0}) != CellType::Obstacle || at({x, height - 1}) != CellType::Obstacle) {
            throw BoundaryError("open boundary at column " + std::to_string(x));
        }
    }
    for (int y = 0; y < height; ++y) {
        if (at({0, y}) != CellType::Obstacle || at({width - 1, y}) != CellType::Obstacle) {
            throw BoundaryError("open boundary at row " + std::to_string(y));
        }
    }
}

bool World::is_obstacle(Vec2 p) const {
    const auto c = geom_.cell_of(p);
    return !c || at(*c) == CellType::Obstacle;
}

std::size_t World::count(CellType type) const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), type));
}

World parse_ascii_world(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    double resolution = 0.0;
    bool have_header = false;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            std::istringstream header(line);
            std::string key;
            header >> key >> resolution;
            if (key != "resolution" || header.fail()) {
                throw ParseError("expected 'resolution <meters>' header, got '" + line + "'");
            }
            have_header = true;
            continue;
        }
        if (line.empty()) continue;
        rows.push_back(line);
    }
    if (!have_header) throw ParseError("missing resolution header");
    if (rows.empty()) throw ParseError("no grid rows");
    const std::size_t width = rows.front().size();
    const int height = static_cast<int>(rows.size());
    std::vector<CellType> cells(width * rows.size());
    for (int r = 0; r < height; ++r) {
        const std::string& row = rows[static_cast<std::size_t>(r)];
        if (row.size() != width) {
            throw ParseError("ragged row " + std::to_string(r) + ": " + std::to_string(row.size()) + " != " +
                             std::to_string(width));
        }
        const int y = height - 1 - r;
        for (std::size_t x = 0; x < width; ++x) {
            CellType type;
            switch (row[x]) {
            case '#': type = CellType::Obstacle; break;
            case '.': type = CellType::Free; break;
            default: throw ParseError(std::string("unexpected character '") + row[x] + "'");
            }
            cells[static_cast<std::size_t>(y) * width + x] = type;
        }
    }
    return World(static_cast<int>(width), height, resolution, std::move(cells));
}

std::string to_ascii(const World& world) {
    std::ostringstream out;
    out.precision(17);
    out << "resolution " << world.resolution() << '\n';
    for (int y = world.height() - 1; y >= 0; --y) {
        for (int x = 0; x < world.width(); ++x) {
            out << (world.at({x, y}) == CellType::Obstacle ? '#' : '.');
        }
        out << '\n';
    }
    return out.str();
}

World parse_json_world(const nlohmann::json& doc) {
    try {
        const int width = doc.at("width").get<int>();
        const int height = doc.at("height").get<int>();
        const double resolution = doc.at("resolution").get<double>();
        const auto& raw = doc.at("cells");
        if (!raw.is_array()) throw ParseError("'cells' must be an array");
        std::vector<CellType> cells;
        cells.reserve(raw.size());
        for (const auto& v : raw) {
            const int value = v.is_boolean() ? static_cast<int>(v.get<bool>()) : v.get<int>();
            if (value != 0 && value != 1) throw ParseError("cell values must be 0 or 1");
            cells.push_back(value == 1 ? CellType::Obstacle : CellType::Free);
        }
        std::vector<double> elevation;
        if (doc.contains("elevation")) {
            elevation = doc.at("elevation").get<std::vector<double>>();
        }
        return World(width, height, resolution, std::move(cells), std::move(elevation));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    }
}

nlohmann::json to_json(const World& world) {
    nlohmann::json doc;
    doc["width"] = world.width();
    doc["height"] = world.height();
    doc["resolution"] = world.resolution();
    std::vector<int> cells;
    cells.reserve(world.cells().size());
    for (CellType c : world.cells()) cells.push_back(c == CellType::Obstacle ? 1 : 0);
    doc["cells"] = std::move(cells);
    if (world.has_elevation()) doc["elevation"] = world.elevations();
    return doc;
}

World load_world(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open world file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(e.what());
        }
        return parse_json_world(doc);
    }
    return parse_ascii_world(text);
}

void save_world(const World& world, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    if (path.extension() == ".json") {
        out << to_json(world).dump() << '\n';
    } else {
        out << to_ascii(world);
    }
}

void SensorModel::validate() const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (!(max_range > 0.0)) throw ConfigError("sensor max_range must be positive");
    if (!(fov > 0.0) || fov > two_pi + 1e-12) throw ConfigError("sensor fov must be in (0, 2pi]");
    if (!(angular_resolution > 0.0)) throw ConfigError("angular_resolution must be positive");
    const double steps = fov / angular_resolution;
    if (std::abs(steps - std::round(steps)) > 1e-6) {
        throw ConfigError("angular_resolution must divide fov evenly");
    }
}

int SensorModel::beam_count() const {
    const int steps = static_cast<int>(std::lround(fov / angular_resolution));
    const bool full_circle = std::abs(fov - 2.0 * std::numbers::pi) < 1e-9;
    return full_circle ? steps : steps + 1;
}

double SensorModel::bearing(int beam) const { return -0.5 * fov + beam * angular_resolution; }

SensorModel SensorModel::depth_camera(double range) {
    return SensorModel{range, 2.0 * std::numbers::pi / 3.0, std::numbers::pi / 180.0, SensorKind::DepthCamera};
}

SensorModel SensorModel::lidar(double range) {
    return SensorModel{range, 2.0 * std::numbers::pi, std::numbers::pi / 180.0, SensorKind::Lidar};
}

RangeScan RangeScan::with_origin(const Pose2& new_origin) const {
    RangeScan out = *this;
    out.origin = new_origin;
    return out;
}

double RangeScan::height_at(std::size_t beam, double t) const {
    if (heights.empty()) return 0.0;
    const auto& samples = heights[beam];
    if (samples.empty()) return 0.0;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double value, const HeightSample& s) { return value < s.t_exit; });
    if (it == samples.end()) return samples.back().height;
    return it->height;
}

RangeScan sense(const World& world, const Pose2& true_pose, const SensorModel& sensor) {
    sensor.validate();
    if (world.is_obstacle(true_pose.position())) {
        throw PoseInObstacle("pose (" + std::to_string(true_pose.x()) + ", " + std::to_string(true_pose.y()) +
                             ") is inside an obstacle");
    }
    const GridGeometry& geom = world.geometry();
    RangeScan scan;
    scan.origin = true_pose;
    scan.max_range = sensor.max_range;
    const int n = sensor.beam_count();
    scan.beams.reserve(static_cast<std::size_t>(n));
    if (world.has_elevation()) scan.heights.resize(static_cast<std::size_t>(n));
    const Vec2 start = true_pose.position();
    for (int i = 0; i < n; ++i) {
        const double bearing = sensor.bearing(i);
        const double angle = true_pose.theta() + bearing;
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        std::optional<double> hit_t;
        auto blocked = [&](CellIndex c) { return !geom.contains(c) || world.at(c) == CellType::Obstacle; };
        auto* samples = world.has_elevation() ? &scan.heights[static_cast<std::size_t>(i)] : nullptr;
        walk_ray(
            geom, start, dir, sensor.max_range,
            [&](CellIndex c, double t_enter, double t_exit) {
                if (blocked(c)) {
                    hit_t = t_enter;
                    return false;
                }
                if (samples) samples->push_back({t_exit, world.elevation(c)});
                return true;
            },
            [&](CellIndex a, CellIndex b, double t) {
                if (blocked(a) || blocked(b)) {
                    hit_t = t;
                    return false;
                }
                return true;
            });
        Beam beam{bearing, sensor.max_range, false};
        if (hit_t && *hit_t < sensor.max_range) {
            beam.range = *hit_t;
            beam.hit = true;
        }
        scan.beams.push_back(beam);
    }
    return scan;
}

DriftSampler::DriftSampler(const DriftModel& model) : model_(model), rng_(model.seed) {
    bias_.along = model_.trans_drift_per_meter * gaussian();
    bias_.lateral = model_.trans_drift_per_meter * gaussian();
    bias_.heading = model_.rot_drift_per_meter * gaussian();
}

double DriftSampler::gaussian() {
    // Box-Muller on raw mt19937_64 output keeps the stream identical across
    // standard library implementations.
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * scale;
    const double u2 = static_cast<double>(rng_() >> 11) * scale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

DriftSampler::Perturbation DriftSampler::next() {
    Perturbation p;
    p.along = bias_.along + model_.trans_drift_per_meter * gaussian();
    p.lateral = bias_.lateral + model_.trans_drift_per_meter * gaussian();
    p.heading = bias_.heading + model_.rot_drift_per_meter * gaussian();
    return p;
}

Pose2 integrate_unicycle(const Pose2& pose, double v, double w, double dt) {
    const double th = pose.theta();
    if (std::abs(w) < 1e-12) {
        return {pose.x() + v * dt * std::cos(th), pose.y() + v * dt * std::sin(th), th, pose.frame()};
    }
    const double th2 = th + w * dt;
    const double r = v / w;
    return {pose.x() + r * (std::sin(th2) - std::sin(th)), pose.y() - r * (std::cos(th2) - std::cos(th)), th2,
            pose.frame()};
}

namespace {

// Full step when frac == 1; otherwise translate along the same arc for a
// fraction of dt and still apply the full commanded rotation.
Pose2 advance(const Pose2& pose, double v, double w, double dt, double frac) {
    if (frac >= 1.0) return integrate_unicycle(pose, v, w, dt);
    const Pose2 moved = integrate_unicycle(pose, v, w, dt * frac);
    return {moved.x(), moved.y(), pose.theta() + w * dt, pose.frame()};
}

}  // namespace

StepResult step(const World& world, const Pose2& true_pose, const Pose2& odom_pose, Command command, double dt,
                DriftSampler& drift) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    StepResult out{true_pose, odom_pose, false, 0.0};
    const double full_distance = std::abs(command.v) * dt;
    double frac = 1.0;
    if (full_distance > 0.0) {
        const double spacing = world.resolution() * 0.25;
        const int samples = static_cast<int>(std::ceil(full_distance / spacing));
        for (int k = 1; k <= samples; ++k) {
            const double f = static_cast<double>(k) / samples;
            const Pose2 p = integrate_unicycle(true_pose, command.v, command.w, dt * f);
            if (world.is_obstacle(p.position())) {
                frac = static_cast<double>(k - 1) / samples;
                out.collided = true;
                break;
            }
        }
    }
    out.true_pose = advance(true_pose, command.v, command.w, dt, frac);
    const double traveled = full_distance * frac;
    out.distance = traveled;

    const DriftSampler::Perturbation p = drift.next();
    const double v_odom = command.v * (1.0 + p.along);
    double w_odom = command.w;
    if (traveled > 0.0) w_odom = command.w + p.heading * traveled / (dt * frac);
    Pose2 odom = advance(odom_pose, v_odom, w_odom, dt, frac);
    const double lateral = p.lateral * traveled;
    out.odom_pose = Pose2(odom.x() - lateral * std::sin(odom.theta()), odom.y() + lateral * std::cos(odom.theta()),
                          odom.theta(), odom.frame());
    return out;
}

std::optional<int> detect_loop(std::span<const AnchorRecord> history, const Pose2& current_true_pose, double radius,
                               int current_id) {
    std::optional<int> best;
    for (const AnchorRecord& rec : history) {
        if (rec.submap_id >= current_id - 1) continue;
        if (distance(rec.true_anchor.position(), current_true_pose.position()) > radius) continue;
        if (!best || rec.submap_id < *best) best = rec.submap_id;
    }
    return best;
}

}  // namespace hitmap
