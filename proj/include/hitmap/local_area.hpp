#pragma once

#include <set>
#include <vector>

#include "hitmap/coverage.hpp"
#include "hitmap/roadmap.hpp"
#include "hitmap/submap.hpp"
#include "hitmap/topology.hpp"

namespace hitmap {

/// Edge between vertices of two different member submaps (merged indices).
struct BridgeEdge {
    int a = 0;
    int b = 0;
    double length = 0.0;
    /// False only for bridges created across an unvalidated loop (ablation).
    bool validated = true;
};

/// The current submap merged with its topology neighbors, in the corrected frame.
struct LocalArea {
    int current_id = -1;
    std::vector<int> member_submap_ids;  // ascending
    Roadmap merged_roadmap;
    /// Member vertices that merged into each merged vertex, first = owner.
    std::vector<std::vector<VertexRef>> sources;
    std::set<VertexRef> merged_frontiers;
    std::vector<BridgeEdge> bridge_edges;
    double coverage_radius = 0.0;
    /// Merged vertices (ids = merged indices) with their coverage discs.
    Coverage coverage{1.0};

    bool is_member(int submap_id) const;
    /// Merged index of a member vertex, or -1.
    int merged_of(VertexRef ref) const;
    bool has_unvalidated_bridges() const;

    /// Per member (same order as member_submap_ids): member vertex -> merged index.
    std::vector<std::vector<int>> index_of;
};

struct AreaParams {
    /// Bridge reach between vertices of different members; <= 0 means 2 x sample interval.
    double connect_radius = 0.0;
    /// Cross-member duplicate radius; <= 0 means sample interval / 3.
    double dedup_epsilon = 0.0;
};

/// Throws UnknownSubmapId.
LocalArea compose_local_area(const GlobalTopology& topology, const SubmapStore& store, int current_id,
                             const AreaParams& params = {});

/// Drops frontier vertices that lie within another member's coverage, i.e.
/// within coverage_radius of one of its non-frontier vertices.
LocalArea reconcile_frontiers(LocalArea area, const SubmapStore& store);

/// Writes the reconciled frontier state back into the member submaps.
/// Returns the number of demoted vertices.
int persist_frontier_demotions(const LocalArea& area, SubmapStore& store);

}  // namespace hitmap
