#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hitmap/geometry.hpp"

namespace hitmap {

/// Uniform bucket grid over 2D points for radius queries.
class PointIndex {
public:
    explicit PointIndex(double bucket_size) : bucket_(bucket_size) {}

    void insert(Vec2 p, int id) { buckets_[key(p)].push_back({p, id}); }
    bool empty() const { return buckets_.empty(); }

    /// Calls f(id, position) for every point with |p - q| <= radius.
    template <class F>
    void for_each_within(Vec2 q, double radius, F&& f) const {
        const double r2 = radius * radius;
        const auto [bx0, by0] = coords({q.x - radius, q.y - radius});
        const auto [bx1, by1] = coords({q.x + radius, q.y + radius});
        for (std::int64_t by = by0; by <= by1; ++by) {
            for (std::int64_t bx = bx0; bx <= bx1; ++bx) {
                const auto it = buckets_.find(pack(bx, by));
                if (it == buckets_.end()) continue;
                for (const Entry& e : it->second) {
                    if (squared_distance(e.p, q) <= r2) f(e.id, e.p);
                }
            }
        }
    }

    /// Closest point within radius; ties go to the lowest id.
    std::optional<int> nearest_within(Vec2 q, double radius) const {
        std::optional<int> best;
        double best_d2 = std::numeric_limits<double>::infinity();
        for_each_within(q, radius, [&](int id, Vec2 p) {
            const double d2 = squared_distance(p, q);
            if (d2 < best_d2 || (d2 == best_d2 && id < *best)) {
                best = id;
                best_d2 = d2;
            }
        });
        return best;
    }

    bool any_within(Vec2 q, double radius) const {
        const double r2 = radius * radius;
        const auto [bx0, by0] = coords({q.x - radius, q.y - radius});
        const auto [bx1, by1] = coords({q.x + radius, q.y + radius});
        for (std::int64_t by = by0; by <= by1; ++by) {
            for (std::int64_t bx = bx0; bx <= bx1; ++bx) {
                const auto it = buckets_.find(pack(bx, by));
                if (it == buckets_.end()) continue;
                for (const Entry& e : it->second) {
                    if (squared_distance(e.p, q) <= r2) return true;
                }
            }
        }
        return false;
    }

private:
    struct Entry {
        Vec2 p;
        int id;
    };
    std::pair<std::int64_t, std::int64_t> coords(Vec2 p) const {
        return {static_cast<std::int64_t>(std::floor(p.x / bucket_)), static_cast<std::int64_t>(std::floor(p.y / bucket_))};
    }
    static std::uint64_t pack(std::int64_t x, std::int64_t y) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
    }
    std::uint64_t key(Vec2 p) const {
        const auto [x, y] = coords(p);
        return pack(x, y);
    }

    double bucket_;
    std::unordered_map<std::uint64_t, std::vector<Entry>> buckets_;
};

}  // namespace hitmap
