#include "hitmap/roadmap.hpp"

#include <numeric>

namespace hitmap {

int Roadmap::add_vertex(Vec2 position, bool is_frontier, FrontierOrigin origin) {
    const int id = static_cast<int>(vertices.size());
    vertices.push_back({id, position, is_frontier, origin});
    return id;
}

void Roadmap::add_edge(int a, int b) {
    edges.push_back({a, b, distance(vertices[static_cast<std::size_t>(a)].position,
                                     vertices[static_cast<std::size_t>(b)].position)});
}

Adjacency Roadmap::adjacency() const {
    Adjacency adj(vertices.size());
    for (const RoadmapEdge& e : edges) {
        adj[static_cast<std::size_t>(e.a)].emplace_back(e.b, e.length);
        adj[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.length);
    }
    return adj;
}

std::size_t Roadmap::frontier_count() const {
    std::size_t n = 0;
    for (const auto& v : vertices) n += v.is_frontier ? 1 : 0;
    return n;
}

int connected_components(const Roadmap& roadmap) {
    std::vector<int> parent(roadmap.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    int components = static_cast<int>(roadmap.vertices.size());
    for (const auto& e : roadmap.edges) {
        const int ra = find(e.a);
        const int rb = find(e.b);
        if (ra != rb) {
            parent[static_cast<std::size_t>(ra)] = rb;
            --components;
        }
    }
    return components;
}

}  // namespace hitmap
