#include "hitmap/local_area.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <unordered_set>

#include "hitmap/coverage.hpp"
#include "hitmap/errors.hpp"
#include "hitmap/spatial_index.hpp"

namespace hitmap {

bool LocalArea::is_member(int submap_id) const {
    return std::binary_search(member_submap_ids.begin(), member_submap_ids.end(), submap_id);
}

int LocalArea::merged_of(VertexRef ref) const {
    const auto it = std::lower_bound(member_submap_ids.begin(), member_submap_ids.end(), ref.submap);
    if (it == member_submap_ids.end() || *it != ref.submap) return -1;
    const auto& table = index_of[static_cast<std::size_t>(it - member_submap_ids.begin())];
    if (ref.vertex < 0 || ref.vertex >= static_cast<int>(table.size())) return -1;
    return table[static_cast<std::size_t>(ref.vertex)];
}

bool LocalArea::has_unvalidated_bridges() const {
    return std::any_of(bridge_edges.begin(), bridge_edges.end(), [](const BridgeEdge& e) { return !e.validated; });
}

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

void refresh_frontier_flags(LocalArea& area) {
    for (std::size_t k = 0; k < area.sources.size(); ++k) {
        bool frontier = false;
        for (const VertexRef& r : area.sources[k]) frontier = frontier || area.merged_frontiers.contains(r);
        area.merged_roadmap.vertices[k].is_frontier = frontier;
    }
}

}  // namespace

LocalArea compose_local_area(const GlobalTopology& topology, const SubmapStore& store, int current_id,
                             const AreaParams& params) {
    const Submap& current = store.get(current_id);
    LocalArea area;
    area.current_id = current_id;
    area.member_submap_ids = topology.contains(current_id) ? topology.neighbors(current_id) : std::vector<int>{};
    area.member_submap_ids.push_back(current_id);
    std::sort(area.member_submap_ids.begin(), area.member_submap_ids.end());

    double interval = current.roadmap.sample_interval;
    for (int id : area.member_submap_ids) interval = std::max(interval, store.get(id).roadmap.sample_interval);
    const double connect = params.connect_radius > 0.0 ? params.connect_radius : 2.0 * interval;
    const double eps = params.dedup_epsilon > 0.0 ? params.dedup_epsilon : interval / 3.0;
    area.coverage_radius = coverage_radius(interval);
    area.merged_roadmap.sample_interval = interval;

    // Vertices: members in ascending id order; later members reuse earlier
    // members' vertices within eps.
    PointIndex merged_index(std::max(eps, 1e-6));
    std::vector<std::vector<Vec2>> positions;
    area.index_of.resize(area.member_submap_ids.size());
    for (std::size_t m = 0; m < area.member_submap_ids.size(); ++m) {
        const Submap& s = store.get(area.member_submap_ids[m]);
        auto& table = area.index_of[m];
        table.resize(s.roadmap.vertices.size(), -1);
        std::vector<Vec2> pos;
        pos.reserve(s.roadmap.vertices.size());
        for (const auto& v : s.roadmap.vertices) {
            const Vec2 p = s.to_corrected(v.position);
            pos.push_back(p);
            std::optional<int> hit;
            if (m > 0) {
                // Only vertices of other members are dedup candidates; a
                // member never collapses its own vertices.
                std::optional<int> best;
                double best_d2 = eps * eps;
                merged_index.for_each_within(p, eps, [&](int k, Vec2 q) {
                    if (area.sources[static_cast<std::size_t>(k)].front().submap == s.id) return;
                    const double d2 = squared_distance(p, q);
                    if (!best || d2 < best_d2 || (d2 == best_d2 && k < *best)) {
                        best = k;
                        best_d2 = d2;
                    }
                });
                hit = best;
            }
            const VertexRef ref{s.id, v.id};
            if (hit) {
                table[static_cast<std::size_t>(v.id)] = *hit;
                area.sources[static_cast<std::size_t>(*hit)].push_back(ref);
            } else {
                const int k = area.merged_roadmap.add_vertex(p, false, v.frontier_origin);
                merged_index.insert(p, k);
                area.sources.push_back({ref});
                table[static_cast<std::size_t>(v.id)] = k;
            }
            if (v.is_frontier) area.merged_frontiers.insert(ref);
        }
        positions.push_back(std::move(pos));
    }

    // Member edges.
    std::unordered_set<std::uint64_t> edges;
    for (std::size_t m = 0; m < area.member_submap_ids.size(); ++m) {
        const Submap& s = store.get(area.member_submap_ids[m]);
        for (const auto& e : s.roadmap.edges) {
            const int a = area.index_of[m][static_cast<std::size_t>(e.a)];
            const int b = area.index_of[m][static_cast<std::size_t>(e.b)];
            if (a == b || !edges.insert(edge_key(a, b)).second) continue;
            area.merged_roadmap.add_edge(a, b);
        }
    }

    // Bridges: every member vertex links to its nearest vertex of each other
    // member whose connecting segment stays inside the area's coverage.
    area.coverage = Coverage(area.coverage_radius);
    for (const auto& v : area.merged_roadmap.vertices) area.coverage.add(v.position, v.id);
    const Coverage& coverage = area.coverage;
    std::vector<PointIndex> member_index;
    member_index.reserve(area.member_submap_ids.size());
    for (std::size_t m = 0; m < area.member_submap_ids.size(); ++m) {
        PointIndex idx(std::max(connect, 1e-6));
        for (std::size_t v = 0; v < positions[m].size(); ++v) idx.insert(positions[m][v], static_cast<int>(v));
        member_index.push_back(std::move(idx));
    }
    auto add_bridge = [&](int a, int b, bool validated) {
        if (a == b || !edges.insert(edge_key(a, b)).second) return;
        area.merged_roadmap.add_edge(std::min(a, b), std::max(a, b));
        area.bridge_edges.push_back({std::min(a, b), std::max(a, b), area.merged_roadmap.edges.back().length, validated});
    };
    struct Candidate {
        double d2;
        int v;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < area.member_submap_ids.size(); ++i) {
        for (std::size_t j = 0; j < area.member_submap_ids.size(); ++j) {
            if (i == j) continue;
            for (std::size_t u = 0; u < positions[i].size(); ++u) {
                const Vec2 pu = positions[i][u];
                const int mu = area.index_of[i][u];
                candidates.clear();
                bool joined = false;
                member_index[j].for_each_within(pu, connect, [&](int v, Vec2 pv) {
                    if (area.index_of[j][static_cast<std::size_t>(v)] == mu) joined = true;
                    candidates.push_back({squared_distance(pu, pv), v});
                });
                if (joined) continue;
                std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
                    return std::tie(x.d2, x.v) < std::tie(y.d2, y.v);
                });
                for (const Candidate& c : candidates) {
                    const Vec2 pv = positions[j][static_cast<std::size_t>(c.v)];
                    // Both endpoints are covered, so a segment no longer than
                    // two coverage radii is covered throughout.
                    if (c.d2 <= 4.0 * area.coverage_radius * area.coverage_radius ||
                        coverage.covers_segment(pu, pv)) {
                        add_bridge(mu, area.index_of[j][static_cast<std::size_t>(c.v)], true);
                        break;
                    }
                }
            }
        }
    }

    // Loops accepted without validation are trusted blindly: join their
    // closest vertex pair.
    for (std::size_t i = 0; i < area.member_submap_ids.size(); ++i) {
        for (std::size_t j = i + 1; j < area.member_submap_ids.size(); ++j) {
            const TopologyEdge* e = topology.find_edge(area.member_submap_ids[i], area.member_submap_ids[j]);
            if (e == nullptr || e->kind != EdgeKind::UnvalidatedLoop) continue;
            double best = std::numeric_limits<double>::infinity();
            int bu = -1;
            int bv = -1;
            for (std::size_t u = 0; u < positions[i].size(); ++u) {
                for (std::size_t v = 0; v < positions[j].size(); ++v) {
                    const double d2 = squared_distance(positions[i][u], positions[j][v]);
                    if (d2 < best) {
                        best = d2;
                        bu = static_cast<int>(u);
                        bv = static_cast<int>(v);
                    }
                }
            }
            if (bu < 0) continue;
            const int a = area.index_of[i][static_cast<std::size_t>(bu)];
            const int b = area.index_of[j][static_cast<std::size_t>(bv)];
            if (a == b) continue;
            if (edges.contains(edge_key(a, b))) {
                for (auto& br : area.bridge_edges) {
                    if (br.a == std::min(a, b) && br.b == std::max(a, b)) br.validated = false;
                }
                continue;
            }
            add_bridge(a, b, false);
        }
    }

    return reconcile_frontiers(std::move(area), store);
}

LocalArea reconcile_frontiers(LocalArea area, const SubmapStore& store) {
    if (area.member_submap_ids.size() > 1) {
        std::vector<Coverage> interior;
        interior.reserve(area.member_submap_ids.size());
        for (int id : area.member_submap_ids) {
            const Submap& s = store.get(id);
            Coverage c(area.coverage_radius);
            for (const auto& v : s.roadmap.vertices) {
                if (!v.is_frontier) c.add(s.to_corrected(v.position));
            }
            interior.push_back(std::move(c));
        }
        for (auto it = area.merged_frontiers.begin(); it != area.merged_frontiers.end();) {
            const Submap& s = store.get(it->submap);
            const Vec2 p = s.corrected_position(it->vertex);
            bool covered = false;
            for (std::size_t m = 0; m < area.member_submap_ids.size() && !covered; ++m) {
                if (area.member_submap_ids[m] == it->submap) continue;
                covered = interior[m].covers(p);
            }
            it = covered ? area.merged_frontiers.erase(it) : std::next(it);
        }
    }
    refresh_frontier_flags(area);
    return area;
}

int persist_frontier_demotions(const LocalArea& area, SubmapStore& store) {
    int demoted = 0;
    for (int id : area.member_submap_ids) {
        Submap& s = store.get(id);
        std::vector<int> drop;
        for (int v : s.frontier_vertex_ids) {
            if (!area.merged_frontiers.contains({id, v})) drop.push_back(v);
        }
        for (int v : drop) s.set_frontier(v, false);
        demoted += static_cast<int>(drop.size());
    }
    return demoted;
}

}  // namespace hitmap
