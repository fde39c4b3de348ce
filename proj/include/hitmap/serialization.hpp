#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "hitmap/local_area.hpp"
#include "hitmap/local_map.hpp"
#include "hitmap/planner.hpp"
#include "hitmap/roadmap.hpp"
#include "hitmap/submap.hpp"
#include "hitmap/topology.hpp"

namespace hitmap {

// Objects are emitted with sorted keys and arrays in id order, so dump()
// output is canonical and doubles survive a round trip bit-exactly.

nlohmann::json to_json(const Pose2& pose);
Pose2 pose_from_json(const nlohmann::json& j);

/// {"sample_interval", "vertices": [[x, y, frontier, origin], ...],
///  "edges": [[a, b, length], ...]}
nlohmann::json to_json(const Roadmap& roadmap);
Roadmap roadmap_from_json(const nlohmann::json& j);

/// {"id", "anchor", "creation_odom", "creation_arc_length", "roadmap"}.
/// The frontier set is implied by the vertex flags.
nlohmann::json to_json(const Submap& submap);
Submap submap_from_json(const nlohmann::json& j);

/// {"anchor_epoch", "nodes": [{"id", "anchor"}], "edges": [{"a", "b", "kind", "length"}]}
/// with edges sorted by (min id, max id).
nlohmann::json to_json(const GlobalTopology& topology);
GlobalTopology topology_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Plan& plan);
nlohmann::json to_json(const LocalArea& area);

/// Run-length encoded cell layers: each layer is [[value, run], ...] in
/// row-major order from the grid origin.
nlohmann::json to_json(const TraversabilityGrid& grid);
nlohmann::json to_json(const LocalMetricMap& map);

/// Map directory layout: <dir>/map/submap_000000.json ... plus <dir>/topology.json.
void save_map(const std::filesystem::path& dir, const SubmapStore& store, const GlobalTopology& topology);
struct LoadedMap {
    SubmapStore store;
    GlobalTopology topology;
};
LoadedMap load_map(const std::filesystem::path& dir);

std::string submap_filename(int id);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hitmap
