#pragma once

#include <compare>
#include <optional>
#include <set>
#include <vector>

#include "hitmap/geometry.hpp"
#include "hitmap/roadmap.hpp"

namespace hitmap {

/// Identifies a roadmap vertex across the whole map.
struct VertexRef {
    int submap = -1;
    int vertex = -1;
    friend constexpr auto operator<=>(const VertexRef&, const VertexRef&) = default;
};

/// A locally consistent roadmap fragment. Vertex positions are stored
/// relative to `creation_odom`; `anchor` places that origin in the corrected
/// frame, so loop correction only ever rewrites the anchor.
struct Submap {
    int id = 0;
    Pose2 anchor{0.0, 0.0, 0.0, Frame::Corrected};
    Pose2 creation_odom{0.0, 0.0, 0.0, Frame::Odometry};
    double creation_arc_length = 0.0;
    Roadmap roadmap;
    std::set<int> frontier_vertex_ids;

    Vec2 to_corrected(Vec2 local) const { return anchor.transform(local); }
    Vec2 corrected_position(int vertex) const {
        return to_corrected(roadmap.vertices[static_cast<std::size_t>(vertex)].position);
    }
    /// Robot pose in the corrected frame given its current odometry pose,
    /// assuming odometry is locally consistent since this submap was created.
    Pose2 corrected_pose(const Pose2& odom_pose) const;
    void set_frontier(int vertex, bool value);
};

class SubmapStore {
public:
    /// Appends a submap; its id must equal the current size.
    Submap& add(Submap submap);
    bool contains(int id) const { return id >= 0 && id < static_cast<int>(submaps_.size()); }
    /// Throws UnknownSubmapId.
    const Submap& get(int id) const;
    Submap& get(int id);
    std::size_t size() const { return submaps_.size(); }
    bool empty() const { return submaps_.empty(); }
    const std::vector<Submap>& all() const { return submaps_; }
    const Submap& back() const { return submaps_.back(); }
    Submap& back() { return submaps_.back(); }

private:
    std::vector<Submap> submaps_;
};

/// The first submap of a mission, anchored at the starting odometry pose.
Submap make_initial_submap(const Pose2& odom_pose, double sample_interval);

/// A fresh submap when odometric arc length since `active` was created
/// reaches `interval` (inclusive); nothing otherwise.
std::optional<Submap> maybe_spawn_submap(const Pose2& current_odom, double arc_length, const Submap& active,
                                         double interval);

struct MergeStats {
    int added_vertices = 0;
    int matched_vertices = 0;
    int added_edges = 0;
};

/// Folds a local roadmap into a submap. `roadmap_origin` is the odometry pose
/// of the frame the local vertex positions are expressed in. Local vertices
/// within `dedup_epsilon` of a stored vertex reuse it; otherwise they are
/// appended. Stored vertices never move. A matched vertex takes the newer
/// frontier flag unless it has already been observed as interior (a cleared
/// frontier stays cleared).
MergeStats merge_local_into_submap(Submap& submap, const Roadmap& local, const Pose2& roadmap_origin,
                                   double dedup_epsilon);

}  // namespace hitmap
