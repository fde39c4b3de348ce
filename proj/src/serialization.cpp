#include "hitmap/serialization.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hitmap/errors.hpp"

namespace hitmap {

using nlohmann::json;

json to_json(const Pose2& pose) {
    return {{"x", pose.x()}, {"y", pose.y()}, {"theta", pose.theta()}, {"frame", std::string(to_string(pose.frame()))}};
}

Pose2 pose_from_json(const json& j) {
    try {
        return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>(),
                frame_from_string(j.at("frame").get<std::string>())};
    } catch (const json::exception& e) {
        throw ParseError(std::string("pose: ") + e.what());
    }
}

json to_json(const Roadmap& roadmap) {
    json verts = json::array();
    for (const auto& v : roadmap.vertices) {
        verts.push_back({v.position.x, v.position.y, v.is_frontier,
                         v.frontier_origin == FrontierOrigin::Local ? "local" : "incremental"});
    }
    json edges = json::array();
    for (const auto& e : roadmap.edges) edges.push_back({e.a, e.b, e.length});
    return {{"sample_interval", roadmap.sample_interval}, {"vertices", std::move(verts)}, {"edges", std::move(edges)}};
}

Roadmap roadmap_from_json(const json& j) {
    try {
        Roadmap r;
        r.sample_interval = j.at("sample_interval").get<double>();
        for (const auto& v : j.at("vertices")) {
            const std::string origin = v.at(3).get<std::string>();
            if (origin != "local" && origin != "incremental") throw ParseError("vertex origin '" + origin + "'");
            r.add_vertex({v.at(0).get<double>(), v.at(1).get<double>()}, v.at(2).get<bool>(),
                         origin == "local" ? FrontierOrigin::Local : FrontierOrigin::Incremental);
        }
        const int n = static_cast<int>(r.vertices.size());
        for (const auto& e : j.at("edges")) {
            const int a = e.at(0).get<int>();
            const int b = e.at(1).get<int>();
            if (a < 0 || b < 0 || a >= n || b >= n) throw ParseError("edge endpoint out of range");
            r.edges.push_back({a, b, e.at(2).get<double>()});
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("roadmap: ") + e.what());
    }
}

json to_json(const Submap& submap) {
    return {{"id", submap.id},
            {"anchor", to_json(submap.anchor)},
            {"creation_odom", to_json(submap.creation_odom)},
            {"creation_arc_length", submap.creation_arc_length},
            {"roadmap", to_json(submap.roadmap)}};
}

Submap submap_from_json(const json& j) {
    try {
        Submap s;
        s.id = j.at("id").get<int>();
        s.anchor = pose_from_json(j.at("anchor"));
        s.creation_odom = pose_from_json(j.at("creation_odom"));
        s.creation_arc_length = j.at("creation_arc_length").get<double>();
        s.roadmap = roadmap_from_json(j.at("roadmap"));
        for (const auto& v : s.roadmap.vertices) {
            if (v.is_frontier) s.frontier_vertex_ids.insert(v.id);
        }
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("submap: ") + e.what());
    }
}

json to_json(const GlobalTopology& topology) {
    json nodes = json::array();
    for (int id = 0; id < static_cast<int>(topology.node_count()); ++id) {
        nodes.push_back({{"id", id}, {"anchor", to_json(topology.anchor(id))}});
    }
    std::vector<TopologyEdge> edges = topology.edges();
    for (auto& e : edges) {
        if (e.a > e.b) std::swap(e.a, e.b);
    }
    std::sort(edges.begin(), edges.end(), [](const TopologyEdge& x, const TopologyEdge& y) {
        return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });
    json ej = json::array();
    for (const auto& e : edges) {
        ej.push_back({{"a", e.a}, {"b", e.b}, {"kind", std::string(to_string(e.kind))}, {"length", e.length}});
    }
    return {{"anchor_epoch", topology.anchor_epoch()}, {"nodes", std::move(nodes)}, {"edges", std::move(ej)}};
}

GlobalTopology topology_from_json(const json& j) {
    try {
        GlobalTopology t;
        for (const auto& n : j.at("nodes")) t.add_node(n.at("id").get<int>(), pose_from_json(n.at("anchor")));
        for (const auto& e : j.at("edges")) {
            t.restore_edge({e.at("a").get<int>(), e.at("b").get<int>(),
                            edge_kind_from_string(e.at("kind").get<std::string>()), e.at("length").get<double>()});
        }
        t.restore_epoch(j.at("anchor_epoch").get<std::uint64_t>());
        return t;
    } catch (const json::exception& e) {
        throw ParseError(std::string("topology: ") + e.what());
    }
}

json to_json(const Plan& plan) {
    json wps = json::array();
    for (const Vec2& p : plan.waypoints) wps.push_back({p.x, p.y});
    json j = {{"mode", std::string(to_string(plan.mode))},
              {"waypoints", std::move(wps)},
              {"vertex_ids", plan.graph_path},
              {"cost", plan.cost},
              {"topology_path", plan.topology_path},
              {"uses_unvalidated_bridge", plan.uses_unvalidated_bridge}};
    if (plan.target_frontier) j["target_frontier"] = {plan.target_frontier->submap, plan.target_frontier->vertex};
    return j;
}

json to_json(const LocalArea& area) {
    json bridges = json::array();
    for (const auto& b : area.bridge_edges) bridges.push_back({b.a, b.b, b.length, b.validated});
    json frontiers = json::array();
    for (const auto& f : area.merged_frontiers) frontiers.push_back({f.submap, f.vertex});
    return {{"current_id", area.current_id},
            {"members", area.member_submap_ids},
            {"roadmap", to_json(area.merged_roadmap)},
            {"bridges", std::move(bridges)},
            {"frontiers", std::move(frontiers)}};
}

namespace {

template <class Get>
json rle(std::size_t n, Get get) {
    json runs = json::array();
    std::size_t i = 0;
    while (i < n) {
        const int value = get(i);
        std::size_t run = 1;
        while (i + run < n && get(i + run) == value) ++run;
        runs.push_back({value, run});
        i += run;
    }
    return runs;
}

json geometry_json(const GridGeometry& g) {
    return {{"origin", {g.origin.x, g.origin.y}}, {"width", g.width}, {"height", g.height}, {"resolution", g.resolution}};
}

}  // namespace

json to_json(const TraversabilityGrid& grid) {
    json j = geometry_json(grid.geometry);
    // 0 = blocked, 1 = traversable, 2 = inflated
    j["state"] = rle(grid.cells.size(), [&](std::size_t i) {
        const auto& c = grid.cells[i];
        return c.traversable ? 1 : (c.inflated ? 2 : 0);
    });
    return j;
}

json to_json(const LocalMetricMap& map) {
    json j = geometry_json(map.geometry());
    // 0 = unknown, 1 = free, 2 = obstacle
    j["state"] = rle(map.cells().size(), [&](std::size_t i) { return static_cast<int>(map.cells()[i].state); });
    return j;
}

std::string submap_filename(int id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "submap_%06d.json", id);
    return buf;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void save_map(const std::filesystem::path& dir, const SubmapStore& store, const GlobalTopology& topology) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "map", ec);
    if (ec) throw IoError("cannot create " + (dir / "map").string() + ": " + ec.message());
    for (const Submap& s : store.all()) write_text(dir / "map" / submap_filename(s.id), to_json(s).dump() + "\n");
    write_text(dir / "topology.json", to_json(topology).dump() + "\n");
}

LoadedMap load_map(const std::filesystem::path& dir) {
    LoadedMap out;
    try {
        out.topology = topology_from_json(json::parse(read_text(dir / "topology.json")));
        for (int id = 0; id < static_cast<int>(out.topology.node_count()); ++id) {
            out.store.add(submap_from_json(json::parse(read_text(dir / "map" / submap_filename(id)))));
        }
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    return out;
}

}  // namespace hitmap
