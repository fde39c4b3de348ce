#include "hitmap/topology.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <tuple>

#include "hitmap/coverage.hpp"
#include "hitmap/errors.hpp"

namespace hitmap {

std::string_view to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::Sequential: return "sequential";
        case EdgeKind::ValidatedLoop: return "validated_loop";
        case EdgeKind::UnvalidatedLoop: return "unvalidated_loop";
    }
    return "sequential";
}

EdgeKind edge_kind_from_string(std::string_view name) {
    if (name == "sequential") return EdgeKind::Sequential;
    if (name == "validated_loop") return EdgeKind::ValidatedLoop;
    if (name == "unvalidated_loop") return EdgeKind::UnvalidatedLoop;
    throw ParseError("unknown edge kind '" + std::string(name) + "'");
}

void GlobalTopology::require(int id) const {
    if (!contains(id)) throw UnknownSubmapId(std::to_string(id));
}

void GlobalTopology::add_node(int id, const Pose2& anchor) {
    if (id != static_cast<int>(anchors_.size())) throw NonConsecutiveIds("node " + std::to_string(id));
    anchors_.push_back(anchor);
    adj_.emplace_back();
}

const Pose2& GlobalTopology::anchor(int id) const {
    require(id);
    return anchors_[static_cast<std::size_t>(id)];
}

void GlobalTopology::set_anchor(int id, const Pose2& anchor) {
    require(id);
    anchors_[static_cast<std::size_t>(id)] = anchor;
}

void GlobalTopology::insert_edge(int a, int b, EdgeKind kind) {
    const double len = distance(anchors_[static_cast<std::size_t>(a)].position(),
                                anchors_[static_cast<std::size_t>(b)].position());
    edges_.push_back({a, b, kind, len});
    adj_[static_cast<std::size_t>(a)].insert(b);
    adj_[static_cast<std::size_t>(b)].insert(a);
}

void GlobalTopology::restore_edge(const TopologyEdge& edge) {
    require(edge.a);
    require(edge.b);
    edges_.push_back(edge);
    adj_[static_cast<std::size_t>(edge.a)].insert(edge.b);
    adj_[static_cast<std::size_t>(edge.b)].insert(edge.a);
}

void GlobalTopology::add_sequential_edge(int prev_id, int new_id) {
    if (new_id != prev_id + 1) {
        throw NonConsecutiveIds(std::to_string(prev_id) + " -> " + std::to_string(new_id));
    }
    require(prev_id);
    require(new_id);
    if (has_edge(prev_id, new_id)) return;
    insert_edge(prev_id, new_id, EdgeKind::Sequential);
}

void GlobalTopology::add_validated_loop(int a, int b) {
    require(a);
    require(b);
    if (has_edge(a, b)) return;
    if (!is_validated(a, b)) {
        throw ValidationNotPerformed(std::to_string(a) + " <-> " + std::to_string(b));
    }
    insert_edge(a, b, EdgeKind::ValidatedLoop);
}

void GlobalTopology::add_unvalidated_loop(int a, int b) {
    require(a);
    require(b);
    if (a == b || has_edge(a, b)) return;
    insert_edge(a, b, EdgeKind::UnvalidatedLoop);
}

bool GlobalTopology::has_edge(int a, int b) const {
    if (!contains(a) || !contains(b)) return false;
    return adj_[static_cast<std::size_t>(a)].contains(b);
}

const TopologyEdge* GlobalTopology::find_edge(int a, int b) const {
    for (const auto& e : edges_) {
        if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return &e;
    }
    return nullptr;
}

std::vector<int> GlobalTopology::neighbors(int id) const {
    require(id);
    const auto& s = adj_[static_cast<std::size_t>(id)];
    return {s.begin(), s.end()};
}

int GlobalTopology::degree(int id) const {
    require(id);
    return static_cast<int>(adj_[static_cast<std::size_t>(id)].size());
}

int GlobalTopology::max_degree() const {
    int d = 0;
    for (const auto& s : adj_) d = std::max(d, static_cast<int>(s.size()));
    return d;
}

bool GlobalTopology::is_connected() const {
    if (anchors_.empty()) return true;
    std::vector<bool> seen(anchors_.size(), false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj_[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                ++count;
                q.push(v);
            }
        }
    }
    return count == anchors_.size();
}

Adjacency GlobalTopology::adjacency() const {
    Adjacency adj(anchors_.size());
    for (const auto& e : edges_) {
        adj[static_cast<std::size_t>(e.a)].emplace_back(e.b, e.length);
        adj[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.length);
    }
    return adj;
}

void GlobalTopology::recompute_lengths() {
    for (auto& e : edges_) {
        e.length = distance(anchors_[static_cast<std::size_t>(e.a)].position(),
                            anchors_[static_cast<std::size_t>(e.b)].position());
    }
}

void GlobalTopology::mark_validated(int a, int b) { validated_.insert(std::minmax(a, b)); }

bool GlobalTopology::is_validated(int a, int b) const { return validated_.contains(std::minmax(a, b)); }

void register_submap(GlobalTopology& topology, SubmapStore& store, Submap submap) {
    const int id = submap.id;
    topology.add_node(id, submap.anchor);
    store.add(std::move(submap));
    if (id > 0) topology.add_sequential_edge(id - 1, id);
}

bool validate_loop(GlobalTopology& topology, const SubmapStore& store, int id_a, int id_b, double connect_radius) {
    return validate_loop(topology, store, id_a, id_b, connect_radius, std::nullopt);
}

bool validate_loop(GlobalTopology& topology, const SubmapStore& store, int id_a, int id_b, double connect_radius,
                   const std::optional<Pose2>& observed_relative) {
    const Submap& a = store.get(id_a);
    const Submap& b = store.get(id_b);
    if (id_a == id_b || a.roadmap.empty() || b.roadmap.empty()) return false;
    if (observed_relative && observed_relative->frame() != Frame::Corrected) {
        throw FrameMismatch("observed relative pose must be in the corrected frame");
    }
    const Pose2 b_anchor = observed_relative ? a.anchor.compose(*observed_relative) : b.anchor;

    const double cov_r = coverage_radius(std::max(a.roadmap.sample_interval, b.roadmap.sample_interval));
    Coverage coverage(cov_r);
    PointIndex b_index(std::max(connect_radius, 1e-6));
    std::vector<Vec2> pa;
    pa.reserve(a.roadmap.vertices.size());
    for (const auto& v : a.roadmap.vertices) {
        pa.push_back(a.to_corrected(v.position));
        coverage.add(pa.back());
    }
    std::vector<Vec2> pb;
    pb.reserve(b.roadmap.vertices.size());
    for (const auto& v : b.roadmap.vertices) {
        pb.push_back(b_anchor.transform(v.position));
        coverage.add(pb.back());
        b_index.insert(pb.back(), v.id);
    }

    // Candidate bridges, shortest first so the cheapest evidence is tried early.
    struct Candidate {
        double d;
        int u;
        int v;
    };
    std::vector<Candidate> candidates;
    for (std::size_t u = 0; u < pa.size(); ++u) {
        b_index.for_each_within(pa[u], connect_radius, [&](int v, Vec2 p) {
            candidates.push_back({distance(pa[u], p), static_cast<int>(u), v});
        });
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        return std::tie(x.d, x.u, x.v) < std::tie(y.d, y.u, y.v);
    });
    for (const Candidate& c : candidates) {
        if (!coverage.covers_segment(pa[static_cast<std::size_t>(c.u)], pb[static_cast<std::size_t>(c.v)])) continue;
        // The bridge joins the two vertex sets; confirm on the bridged graph.
        const std::size_t na = pa.size();
        Adjacency adj(na + pb.size());
        for (const auto& e : a.roadmap.edges) {
            adj[static_cast<std::size_t>(e.a)].emplace_back(e.b, e.length);
            adj[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.length);
        }
        for (const auto& e : b.roadmap.edges) {
            adj[na + static_cast<std::size_t>(e.a)].emplace_back(static_cast<int>(na) + e.b, e.length);
            adj[na + static_cast<std::size_t>(e.b)].emplace_back(static_cast<int>(na) + e.a, e.length);
        }
        adj[static_cast<std::size_t>(c.u)].emplace_back(static_cast<int>(na) + c.v, c.d);
        adj[na + static_cast<std::size_t>(c.v)].emplace_back(c.u, c.d);
        std::vector<bool> seen(adj.size(), false);
        std::queue<int> q;
        q.push(c.u);
        seen[static_cast<std::size_t>(c.u)] = true;
        bool reached_b = false;
        while (!q.empty() && !reached_b) {
            const int x = q.front();
            q.pop();
            for (const auto& [y, w] : adj[static_cast<std::size_t>(x)]) {
                if (seen[static_cast<std::size_t>(y)]) continue;
                seen[static_cast<std::size_t>(y)] = true;
                if (static_cast<std::size_t>(y) >= na) reached_b = true;
                q.push(y);
            }
        }
        if (!reached_b) continue;
        topology.mark_validated(id_a, id_b);
        return true;
    }
    return false;
}

CorrectionResult apply_correction(GlobalTopology& topology, SubmapStore& store, std::pair<int, int> loop,
                                  const Pose2& observed_relative) {
    auto [a, b] = loop;
    const TopologyEdge* edge = topology.find_edge(a, b);
    if (edge == nullptr || edge->kind == EdgeKind::Sequential) {
        throw NoSuchLoopEdge(std::to_string(a) + " <-> " + std::to_string(b));
    }
    if (observed_relative.frame() != Frame::Corrected) {
        throw FrameMismatch("observed relative pose must be in the corrected frame");
    }
    Pose2 rel = observed_relative;
    if (a > b) {
        std::swap(a, b);
        rel = rel.inverse();
    }
    const Pose2 lo = topology.anchor(a);
    const Pose2 hi = topology.anchor(b);
    const Pose2 target = lo.compose(rel);

    const Vec2 pivot = hi.position();
    const Vec2 delta = target.position() - pivot;
    const double dtheta = normalize_angle(target.theta() - hi.theta());

    CorrectionResult out;
    out.error = Pose2(delta.x, delta.y, dtheta, Frame::Corrected);
    if (delta.x == 0.0 && delta.y == 0.0 && dtheta == 0.0) return out;

    const int n = b - a;
    const int count = static_cast<int>(topology.node_count());
    for (int k = a + 1; k < count; ++k) {
        const Pose2& cur = topology.anchor(k);
        Pose2 moved;
        if (k == b) {
            moved = target;
        } else {
            const double f = k < b ? static_cast<double>(k - a) / n : 1.0;
            const double c = std::cos(f * dtheta);
            const double s = std::sin(f * dtheta);
            const Vec2 r = cur.position() - pivot;
            const Vec2 p = pivot + Vec2{c * r.x - s * r.y, s * r.x + c * r.y} + f * delta;
            moved = Pose2(p.x, p.y, cur.theta() + f * dtheta, Frame::Corrected);
        }
        topology.set_anchor(k, moved);
        store.get(k).anchor = moved;
        out.moved.push_back(k);
    }
    topology.recompute_lengths();
    topology.bump_epoch();
    return out;
}

}  // namespace hitmap
