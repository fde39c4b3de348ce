#include "hitmap/submap.hpp"

#include <string>
#include <unordered_set>

#include "hitmap/errors.hpp"
#include "hitmap/spatial_index.hpp"

namespace hitmap {

Pose2 Submap::corrected_pose(const Pose2& odom_pose) const {
    const Pose2 rel = creation_odom.between(odom_pose);
    return anchor.compose(rel.in_frame(Frame::Corrected));
}

void Submap::set_frontier(int vertex, bool value) {
    roadmap.vertices[static_cast<std::size_t>(vertex)].is_frontier = value;
    if (value) {
        frontier_vertex_ids.insert(vertex);
    } else {
        frontier_vertex_ids.erase(vertex);
    }
}

Submap& SubmapStore::add(Submap submap) {
    if (submap.id != static_cast<int>(submaps_.size())) {
        throw UnknownSubmapId("submap id " + std::to_string(submap.id) + " is not the next id " +
                              std::to_string(submaps_.size()));
    }
    submaps_.push_back(std::move(submap));
    return submaps_.back();
}

const Submap& SubmapStore::get(int id) const {
    if (!contains(id)) throw UnknownSubmapId(std::to_string(id));
    return submaps_[static_cast<std::size_t>(id)];
}

Submap& SubmapStore::get(int id) {
    if (!contains(id)) throw UnknownSubmapId(std::to_string(id));
    return submaps_[static_cast<std::size_t>(id)];
}

Submap make_initial_submap(const Pose2& odom_pose, double sample_interval) {
    if (odom_pose.frame() != Frame::Odometry) throw FrameMismatch("submaps are created from odometry poses");
    Submap s;
    s.id = 0;
    s.anchor = odom_pose.in_frame(Frame::Corrected);
    s.creation_odom = odom_pose;
    s.roadmap.sample_interval = sample_interval;
    return s;
}

std::optional<Submap> maybe_spawn_submap(const Pose2& current_odom, double arc_length, const Submap& active,
                                         double interval) {
    if (!(interval > 0.0)) throw ConfigError("submap interval must be positive");
    if (current_odom.frame() != Frame::Odometry) throw FrameMismatch("submaps are created from odometry poses");
    if (arc_length - active.creation_arc_length < interval - 1e-9) return std::nullopt;
    Submap s;
    s.id = active.id + 1;
    // Continue the corrected chain from the active submap, not raw odometry.
    s.anchor = active.corrected_pose(current_odom);
    s.creation_odom = current_odom;
    s.creation_arc_length = arc_length;
    s.roadmap.sample_interval = active.roadmap.sample_interval;
    return s;
}

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

MergeStats merge_local_into_submap(Submap& submap, const Roadmap& local, const Pose2& roadmap_origin,
                                   double dedup_epsilon) {
    if (roadmap_origin.frame() != submap.creation_odom.frame()) {
        throw FrameMismatch("local roadmap origin must be in the odometry frame");
    }
    MergeStats stats;
    if (local.vertices.empty()) return stats;
    if (submap.roadmap.sample_interval == 0.0) submap.roadmap.sample_interval = local.sample_interval;

    const double bucket = dedup_epsilon > 0.0 ? dedup_epsilon : std::max(local.sample_interval, 1e-3);
    PointIndex index(bucket);
    for (const auto& v : submap.roadmap.vertices) index.insert(v.position, v.id);
    std::unordered_set<std::uint64_t> edges;
    edges.reserve(submap.roadmap.edges.size() * 2);
    for (const auto& e : submap.roadmap.edges) edges.insert(edge_key(e.a, e.b));

    std::vector<int> mapped(local.vertices.size(), -1);
    for (std::size_t i = 0; i < local.vertices.size(); ++i) {
        const RoadmapVertex& lv = local.vertices[i];
        const Vec2 in_odom = roadmap_origin.transform(lv.position);
        const Vec2 p = submap.creation_odom.inverse_transform(in_odom);
        if (const auto hit = index.nearest_within(p, dedup_epsilon)) {
            mapped[i] = *hit;
            RoadmapVertex& sv = submap.roadmap.vertices[static_cast<std::size_t>(*hit)];
            if (sv.is_frontier && !lv.is_frontier) {
                submap.set_frontier(*hit, false);
                sv.frontier_origin = FrontierOrigin::Local;
            }
            ++stats.matched_vertices;
            continue;
        }
        const int id = submap.roadmap.add_vertex(p, lv.is_frontier, FrontierOrigin::Incremental);
        if (lv.is_frontier) submap.frontier_vertex_ids.insert(id);
        index.insert(p, id);
        mapped[i] = id;
        ++stats.added_vertices;
    }
    for (const RoadmapEdge& e : local.edges) {
        const int a = mapped[static_cast<std::size_t>(e.a)];
        const int b = mapped[static_cast<std::size_t>(e.b)];
        if (a == b) continue;
        if (!edges.insert(edge_key(a, b)).second) continue;
        submap.roadmap.add_edge(a, b);
        ++stats.added_edges;
    }
    return stats;
}

}  // namespace hitmap
