#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hitmap/planner.hpp"
#include "hitmap/submap.hpp"
#include "hitmap/topology.hpp"
#include "hitmap/world.hpp"

namespace hitmap {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, top row first

    Image(int w, int h, std::uint8_t gray = 255);
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

struct SnapshotInput {
    const World* world = nullptr;  // ground truth backdrop, optional
    const SubmapStore* store = nullptr;
    const GlobalTopology* topology = nullptr;
    const Plan* plan = nullptr;
    std::optional<Pose2> robot;
    std::vector<Vec2> goals;
};

struct RenderOptions {
    int width = 480;
    int height = 480;
    /// World-space window; derived from the world (or the map) when unset.
    std::optional<Vec2> view_min;
    std::optional<Vec2> view_max;
};

/// Obstacles, roadmap edges, submap anchors and global edges, frontiers and
/// the plan drawn with fixed colors; identical inputs give identical pixels.
Image render_snapshot(const SnapshotInput& input, const RenderOptions& options = {});

/// Encodes as PNG without timestamps or other varying chunks. Throws IoError.
void write_png(const Image& image, const std::filesystem::path& path);

void render_snapshot(const SnapshotInput& input, const std::filesystem::path& path, const RenderOptions& options = {});

}  // namespace hitmap
