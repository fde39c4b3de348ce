#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hitmap/geometry.hpp"

namespace hitmap {

enum class FrontierOrigin : std::uint8_t { Local, Incremental };

struct RoadmapVertex {
    int id = 0;
    Vec2 position;
    bool is_frontier = false;
    FrontierOrigin frontier_origin = FrontierOrigin::Local;
};

struct RoadmapEdge {
    int a = 0;
    int b = 0;
    double length = 0.0;
};

using Adjacency = std::vector<std::vector<std::pair<int, double>>>;

/// Sparse graph of traversable sample points. Vertex ids are dense: the
/// vertex with id k is stored at index k.
struct Roadmap {
    double sample_interval = 0.0;
    std::vector<RoadmapVertex> vertices;
    std::vector<RoadmapEdge> edges;

    int add_vertex(Vec2 position, bool is_frontier = false, FrontierOrigin origin = FrontierOrigin::Local);
    /// Appends an edge whose length is the Euclidean distance between endpoints.
    void add_edge(int a, int b);
    Adjacency adjacency() const;
    std::size_t frontier_count() const;
    bool empty() const { return vertices.empty(); }
};

/// Number of connected components (isolated vertices count as components).
int connected_components(const Roadmap& roadmap);

}  // namespace hitmap
