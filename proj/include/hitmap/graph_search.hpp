#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "hitmap/roadmap.hpp"

namespace hitmap {

struct SearchResult {
    bool found = false;
    double cost = std::numeric_limits<double>::infinity();
    std::vector<int> path;
    std::size_t expansions = 0;
};

namespace detail {

struct QueueEntry {
    double key;
    int node;
    bool operator>(const QueueEntry& o) const { return key > o.key || (key == o.key && node > o.node); }
};

inline std::vector<int> unwind(const std::vector<int>& parent, int goal) {
    std::vector<int> path;
    for (int v = goal; v != -1; v = parent[static_cast<std::size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace detail

/// Best-first search with heuristic `h`. Nodes are reopened whenever a cheaper
/// route appears, so the result is optimal for any admissible heuristic.
/// Queue ties break on the lowest node id.
template <class Heuristic>
SearchResult astar(const Adjacency& adj, int start, int goal, Heuristic&& h) {
    SearchResult out;
    const std::size_t n = adj.size();
    if (start < 0 || goal < 0 || static_cast<std::size_t>(start) >= n || static_cast<std::size_t>(goal) >= n) {
        return out;
    }
    std::vector<double> g(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    std::priority_queue<detail::QueueEntry, std::vector<detail::QueueEntry>, std::greater<>> open;
    g[static_cast<std::size_t>(start)] = 0.0;
    open.push({h(start), start});
    while (!open.empty()) {
        const auto [key, u] = open.top();
        open.pop();
        const double gu = g[static_cast<std::size_t>(u)];
        if (key > gu + h(u)) continue;  // stale entry
        ++out.expansions;
        if (u == goal) {
            out.found = true;
            out.cost = gu;
            out.path = detail::unwind(parent, goal);
            return out;
        }
        for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
            const double cand = gu + w;
            if (cand < g[static_cast<std::size_t>(v)]) {
                g[static_cast<std::size_t>(v)] = cand;
                parent[static_cast<std::size_t>(v)] = u;
                open.push({cand + h(v), v});
            }
        }
    }
    return out;
}

inline SearchResult dijkstra_path(const Adjacency& adj, int start, int goal) {
    return astar(adj, start, goal, [](int) { return 0.0; });
}

struct ShortestPathTree {
    std::vector<double> dist;
    std::vector<int> parent;
    std::vector<int> path_to(int v) const { return detail::unwind(parent, v); }
};

/// Single-source shortest paths (+inf where unreachable).
inline ShortestPathTree dijkstra_tree(const Adjacency& adj, int source) {
    const std::size_t n = adj.size();
    ShortestPathTree t{std::vector<double>(n, std::numeric_limits<double>::infinity()), std::vector<int>(n, -1)};
    auto& dist = t.dist;
    if (source < 0 || static_cast<std::size_t>(source) >= n) return t;
    std::priority_queue<detail::QueueEntry, std::vector<detail::QueueEntry>, std::greater<>> open;
    dist[static_cast<std::size_t>(source)] = 0.0;
    open.push({0.0, source});
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
            if (d + w < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = d + w;
                t.parent[static_cast<std::size_t>(v)] = u;
                open.push({d + w, v});
            }
        }
    }
    return t;
}

inline std::vector<double> dijkstra(const Adjacency& adj, int source) { return dijkstra_tree(adj, source).dist; }

}  // namespace hitmap
