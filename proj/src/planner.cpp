#include "hitmap/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <unordered_set>

#include "hitmap/errors.hpp"
#include "hitmap/graph_search.hpp"

namespace hitmap {

void CostWeights::validate() const {
    if (!(w_d >= 0.0) || !(w_l >= 0.0) || !(w_d + w_l > 0.0)) {
        throw ConfigError("cost weights must be non-negative with a positive sum");
    }
}

std::string_view to_string(PlanMode mode) {
    return mode == PlanMode::Backtracing ? "backtracing" : "exploration";
}

double frontier_utility(Vec2 f, Vec2 goal, const PlannerState& state, const CostWeights& w) {
    const double shift = state.last_waypoint ? distance(f, *state.last_waypoint) : 0.0;
    return w.w_d * distance(f, goal) + w.w_l * shift;
}

namespace {

bool utility_less(double ua, const FrontierCandidate& a, double ub, const FrontierCandidate& b) {
    return std::tie(ua, a.ref) < std::tie(ub, b.ref);
}

double attach_radius_of(const LocalArea& area, const PlannerParams& params) {
    return params.attach_radius > 0.0 ? params.attach_radius : area.merged_roadmap.sample_interval;
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

/// Vertices within `radius` of p, nearest first (ties: lowest id).
std::vector<int> nearby(const LocalArea& area, Vec2 p, double radius) {
    std::vector<std::pair<double, int>> found;
    area.coverage.index().for_each_within(p, radius, [&](int id, Vec2 q) { found.emplace_back(squared_distance(p, q), id); });
    std::sort(found.begin(), found.end());
    std::vector<int> out;
    out.reserve(found.size());
    for (const auto& [d2, id] : found) out.push_back(id);
    return out;
}

void finish_plan(Plan& plan, const LocalArea& area, const std::vector<int>& path, std::optional<Vec2> tail) {
    plan.graph_path = path;
    plan.cost = 0.0;
    std::unordered_set<std::uint64_t> unvalidated;
    for (const BridgeEdge& b : area.bridge_edges) {
        if (!b.validated) unvalidated.insert(edge_key(b.a, b.b));
    }
    const auto& verts = area.merged_roadmap.vertices;
    for (std::size_t i = 0; i < path.size(); ++i) {
        plan.waypoints.push_back(verts[static_cast<std::size_t>(path[i])].position);
        if (i == 0) continue;
        plan.cost += distance(verts[static_cast<std::size_t>(path[i - 1])].position,
                              verts[static_cast<std::size_t>(path[i])].position);
        if (unvalidated.contains(edge_key(path[i - 1], path[i]))) plan.uses_unvalidated_bridge = true;
    }
    if (tail && (plan.waypoints.empty() || distance(plan.waypoints.back(), *tail) > 1e-9)) {
        plan.waypoints.push_back(*tail);
    }
}

/// Shortest-path tree from the attached start, shared by every target tried
/// during one planning call.
constexpr double kDetourWeight = 0.1;

struct Router {
    const GlobalTopology& topology;
    const LocalArea& area;
    int start_vertex;
    ShortestPathTree tree;

    /// Reachable area vertex closest to `aim`, with a small charge for path
    /// length so marginal gains do not buy long detours. When that is the
    /// start itself, the nearest reachable frontier that gets closer to `aim`
    /// instead; -1 when neither exists.
    int approach(Vec2 aim) const {
        const auto& verts = area.merged_roadmap.vertices;
        int best = -1;
        double best_score = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < verts.size(); ++v) {
            if (!std::isfinite(tree.dist[v])) continue;
            const double score = distance(verts[v].position, aim) + kDetourWeight * tree.dist[v];
            if (score < best_score) {
                best_score = score;
                best = static_cast<int>(v);
            }
        }
        if (best != start_vertex) return best;
        const double here = distance(verts[static_cast<std::size_t>(start_vertex)].position, aim);
        best = -1;
        double best_g = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < verts.size(); ++v) {
            if (!verts[v].is_frontier || !std::isfinite(tree.dist[v])) continue;
            if (distance(verts[v].position, aim) >= here) continue;
            if (tree.dist[v] < best_g) {
                best_g = tree.dist[v];
                best = static_cast<int>(v);
            }
        }
        return best;
    }

    Plan route(int target_submap, std::optional<int> target_vertex, std::optional<Vec2> target_position) const {
        Plan plan;
        if (area.is_member(target_submap)) {
            int tv = target_vertex ? area.merged_of({target_submap, *target_vertex}) : -1;
            if (tv < 0) throw NoPath("target vertex is not part of the local area");
            if (!std::isfinite(tree.dist[static_cast<std::size_t>(tv)])) throw NoPath("target unreachable in local area");
            plan.topology_path = {area.current_id};
            if (target_submap != area.current_id) plan.topology_path.push_back(target_submap);
            finish_plan(plan, area, tree.path_to(tv), std::nullopt);
            return plan;
        }

        const Adjacency topo = topology.adjacency();
        const Vec2 goal_anchor = topology.anchor(target_submap).position();
        const SearchResult hops = astar(topo, area.current_id, target_submap, [&](int k) {
            return distance(topology.anchor(k).position(), goal_anchor);
        });
        if (!hops.found) throw NoPath("topology does not connect the target submap");
        plan.topology_path = hops.path;
        // Aim at successive hops outside the area; the first one the known
        // area can make progress towards wins.
        std::vector<Vec2> aims;
        for (int k : hops.path) {
            if (!area.is_member(k)) aims.push_back(topology.anchor(k).position());
        }
        if (target_position) aims.push_back(*target_position);
        int best = -1;
        for (const Vec2& aim : aims) {
            best = approach(aim);
            if (best >= 0) break;
        }
        if (best < 0) throw NoPath("no progress towards submap " + std::to_string(target_submap));
        finish_plan(plan, area, tree.path_to(best), std::nullopt);
        return plan;
    }
};

Router make_router(const GlobalTopology& topology, const LocalArea& area, Vec2 start, const PlannerParams& params) {
    const double reach = params.start_attach_factor * area.merged_roadmap.sample_interval;
    const auto s = attach_start(area, start, reach);
    if (!s) throw NoPath("start does not attach to the roadmap");
    return Router{topology, area, *s, dijkstra_tree(area.merged_roadmap.adjacency(), *s)};
}

}  // namespace

FrontierCandidate select_waypoint(std::span<const FrontierCandidate> frontiers, Vec2 goal, PlannerState& state,
                                  const CostWeights& w) {
    if (frontiers.empty()) throw NoFrontiers("no frontier to choose from");
    std::size_t best = 0;
    double best_u = frontier_utility(frontiers[0].position, goal, state, w);
    for (std::size_t i = 1; i < frontiers.size(); ++i) {
        const double u = frontier_utility(frontiers[i].position, goal, state, w);
        if (utility_less(u, frontiers[i], best_u, frontiers[best])) {
            best = i;
            best_u = u;
        }
    }
    state.last_waypoint = frontiers[best].position;
    return frontiers[best];
}

std::vector<FrontierCandidate> collect_frontiers(const SubmapStore& store) {
    std::vector<FrontierCandidate> out;
    for (const Submap& s : store.all()) {
        for (int v : s.frontier_vertex_ids) out.push_back({{s.id, v}, s.corrected_position(v)});
    }
    return out;
}

std::optional<int> attach_goal(const LocalArea& area, Vec2 goal, double attach_radius) {
    for (int v : nearby(area, goal, attach_radius)) {
        if (area.coverage.covers_segment(area.merged_roadmap.vertices[static_cast<std::size_t>(v)].position, goal)) {
            return v;
        }
    }
    return std::nullopt;
}

std::optional<int> attach_start(const LocalArea& area, Vec2 start, double reach) {
    const auto candidates = nearby(area, start, reach);
    for (int v : candidates) {
        if (area.coverage.covers_segment(area.merged_roadmap.vertices[static_cast<std::size_t>(v)].position, start)) {
            return v;
        }
    }
    if (!candidates.empty()) return candidates.front();
    return std::nullopt;
}

PlanMode select_mode(const LocalArea& area, Vec2 goal, double attach_radius) {
    return attach_goal(area, goal, attach_radius) ? PlanMode::Backtracing : PlanMode::Exploration;
}

Plan plan_backtracing(const LocalArea& area, Vec2 start, Vec2 goal, const PlannerParams& params) {
    const double reach = params.start_attach_factor * area.merged_roadmap.sample_interval;
    const auto s = attach_start(area, start, reach);
    const auto g = attach_goal(area, goal, attach_radius_of(area, params));
    if (!s || !g) throw NoPath("start or goal does not attach to the roadmap");
    const auto& verts = area.merged_roadmap.vertices;
    const Vec2 gp = verts[static_cast<std::size_t>(*g)].position;
    const SearchResult r = astar(area.merged_roadmap.adjacency(), *s, *g,
                                 [&](int v) { return distance(verts[static_cast<std::size_t>(v)].position, gp); });
    if (!r.found) throw NoPath("goal is in a different roadmap component");
    Plan plan;
    plan.mode = PlanMode::Backtracing;
    plan.topology_path = {area.current_id};
    finish_plan(plan, area, r.path, goal);
    return plan;
}

std::optional<VertexRef> locate_in_map(const SubmapStore& store, Vec2 goal, double attach_radius) {
    std::optional<VertexRef> best;
    double best_d2 = attach_radius * attach_radius;
    for (const Submap& s : store.all()) {
        const Vec2 local = s.anchor.inverse_transform(goal);
        for (const auto& v : s.roadmap.vertices) {
            const double d2 = squared_distance(v.position, local);
            if (d2 <= best_d2 && (!best || d2 < best_d2)) {
                best = VertexRef{s.id, v.id};
                best_d2 = d2;
            }
        }
    }
    return best;
}

Plan plan_via_topology(const GlobalTopology& topology, const LocalArea& area, Vec2 start, int target_submap,
                       Vec2 target, const PlannerParams& params) {
    const Router router = make_router(topology, area, start, params);
    std::optional<int> tv;
    if (area.is_member(target_submap)) {
        const auto g = attach_goal(area, target, attach_radius_of(area, params));
        if (g) {
            // Any member vertex that merged into the attached vertex will do.
            tv = area.sources[static_cast<std::size_t>(*g)].front().vertex;
            target_submap = area.sources[static_cast<std::size_t>(*g)].front().submap;
        }
    }
    Plan plan = router.route(target_submap, tv, target);
    plan.mode = PlanMode::Backtracing;
    if (area.is_member(target_submap)) plan.waypoints.push_back(target);
    return plan;
}

Plan plan_exploration(const GlobalTopology& topology, const LocalArea& area,
                      std::span<const FrontierCandidate> frontiers, Vec2 start, Vec2 goal, PlannerState& state,
                      const CostWeights& w, const PlannerParams& params) {
    if (frontiers.empty()) throw NoFrontiers("map has no frontiers left");
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(frontiers.size());
    for (std::size_t i = 0; i < frontiers.size(); ++i) {
        order.emplace_back(frontier_utility(frontiers[i].position, goal, state, w), i);
    }
    std::sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
        return utility_less(x.first, frontiers[x.second], y.first, frontiers[y.second]);
    });
    const Router router = make_router(topology, area, start, params);
    const int attempts = std::min<int>(params.max_attempts, static_cast<int>(order.size()));
    for (int i = 0; i < attempts; ++i) {
        const FrontierCandidate& f = frontiers[order[static_cast<std::size_t>(i)].second];
        try {
            Plan plan = router.route(f.ref.submap, f.ref.vertex, f.position);
            plan.mode = PlanMode::Exploration;
            plan.target_frontier = f.ref;
            state.last_waypoint = f.position;
            state.mode = PlanMode::Exploration;
            return plan;
        } catch (const NoPath&) {
        }
    }
    throw NoPath("none of the best frontiers is reachable");
}

}  // namespace hitmap
