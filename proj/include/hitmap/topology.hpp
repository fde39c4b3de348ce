#pragma once

#include <cstdint>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "hitmap/geometry.hpp"
#include "hitmap/roadmap.hpp"
#include "hitmap/submap.hpp"

namespace hitmap {

/// UnvalidatedLoop only exists for the connectivity-validation ablation: a
/// loop accepted on place recognition alone.
enum class EdgeKind : std::uint8_t { Sequential, ValidatedLoop, UnvalidatedLoop };

std::string_view to_string(EdgeKind kind);
EdgeKind edge_kind_from_string(std::string_view name);

struct TopologyEdge {
    int a = 0;
    int b = 0;
    EdgeKind kind = EdgeKind::Sequential;
    double length = 0.0;
};

/// Graph over submaps. Node k is submap k; anchors mirror the submap store.
class GlobalTopology {
public:
    /// Node ids are dense and appended in creation order.
    void add_node(int id, const Pose2& anchor);
    std::size_t node_count() const { return anchors_.size(); }
    bool contains(int id) const { return id >= 0 && id < static_cast<int>(anchors_.size()); }
    const Pose2& anchor(int id) const;
    void set_anchor(int id, const Pose2& anchor);

    /// Throws NonConsecutiveIds unless new_id == prev_id + 1.
    void add_sequential_edge(int prev_id, int new_id);
    /// Throws ValidationNotPerformed unless validate_loop accepted the pair
    /// at the current anchor epoch. Re-adding an existing edge is a no-op.
    void add_validated_loop(int a, int b);
    /// Ablation only: inserts a loop edge without any validation.
    void add_unvalidated_loop(int a, int b);

    bool has_edge(int a, int b) const;
    const TopologyEdge* find_edge(int a, int b) const;
    const std::vector<TopologyEdge>& edges() const { return edges_; }
    /// Sorted neighbor ids.
    std::vector<int> neighbors(int id) const;
    int degree(int id) const;
    int max_degree() const;
    bool is_connected() const;
    Adjacency adjacency() const;

    /// Incremented by every correction.
    std::uint64_t anchor_epoch() const { return epoch_; }
    /// Starts a new anchor epoch; earlier validations no longer count.
    void bump_epoch() {
        ++epoch_;
        validated_.clear();
    }
    void recompute_lengths();

    /// Deserialization hooks: restore an edge or epoch exactly as stored.
    void restore_edge(const TopologyEdge& edge);
    void restore_epoch(std::uint64_t epoch) { epoch_ = epoch; }

    void mark_validated(int a, int b);
    bool is_validated(int a, int b) const;

private:
    void require(int id) const;
    void insert_edge(int a, int b, EdgeKind kind);

    std::vector<Pose2> anchors_;
    std::vector<TopologyEdge> edges_;
    std::vector<std::set<int>> adj_;
    std::set<std::pair<int, int>> validated_;
    std::uint64_t epoch_ = 0;
};

/// Adds a submap to both the store and the topology, linking it to its
/// predecessor with a sequential edge.
void register_submap(GlobalTopology& topology, SubmapStore& store, Submap submap);

/// Radius within which a roadmap vertex vouches for free space: half the
/// lattice cell diagonal.
inline double coverage_radius(double sample_interval) { return sample_interval * 0.70710678118654752440; }

/// Connectivity check for a loop candidate: true iff some vertex pair (u in A,
/// v in B) within connect_radius is joined by a segment that stays inside the
/// union of both submaps' vertex coverage. Records the result for
/// add_validated_loop. Throws UnknownSubmapId.
bool validate_loop(GlobalTopology& topology, const SubmapStore& store, int id_a, int id_b, double connect_radius);
/// Same check with B placed where the loop measurement puts it (anchor of A
/// composed with `observed_relative`, the pose of B relative to A) rather than
/// at its drifted anchor.
bool validate_loop(GlobalTopology& topology, const SubmapStore& store, int id_a, int id_b, double connect_radius,
                   const std::optional<Pose2>& observed_relative);

struct CorrectionResult {
    std::vector<int> moved;
    Pose2 error{0.0, 0.0, 0.0, Frame::Corrected};
    std::uint64_t metric_cell_writes = 0;
};

/// Rewrites anchors so that anchor(b) relative to anchor(a) equals
/// `observed_relative`, spreading the error linearly over the chain a..b;
/// submaps created after the later one move rigidly with it. Only anchors are
/// touched. Throws NoSuchLoopEdge.
CorrectionResult apply_correction(GlobalTopology& topology, SubmapStore& store, std::pair<int, int> loop,
                                  const Pose2& observed_relative);

}  // namespace hitmap
