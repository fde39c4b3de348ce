#pragma once

#include <algorithm>
#include <cmath>

#include "hitmap/spatial_index.hpp"

namespace hitmap {

/// Free space vouched for by a set of roadmap vertices: the union of discs of
/// radius `radius` around them. Used to check segments between vertices of
/// different submaps, whose metric cells are no longer available.
class Coverage {
public:
    explicit Coverage(double radius) : index_(std::max(radius, 1e-6)), radius_(radius) {}

    void add(Vec2 p, int id = 0) { index_.insert(p, id); }
    const PointIndex& index() const { return index_; }
    double radius() const { return radius_; }
    bool covers(Vec2 p) const { return index_.any_within(p, radius_ + 1e-9); }

    /// Samples the segment at most radius/4 apart, endpoints included.
    bool covers_segment(Vec2 a, Vec2 b) const {
        const double len = distance(a, b);
        const int n = std::max(1, static_cast<int>(std::ceil(len / (radius_ * 0.25))));
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            if (!covers(a + t * (b - a))) return false;
        }
        return true;
    }

private:
    PointIndex index_;
    double radius_;
};

}  // namespace hitmap
