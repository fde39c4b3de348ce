#include "hitmap/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hitmap/errors.hpp"

namespace hitmap {

Image::Image(int w, int h, std::uint8_t gray)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, gray) {}

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
}

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr Rgb kObstacle{60, 60, 60};
constexpr Rgb kRoadmap{150, 190, 230};
constexpr Rgb kVertex{70, 120, 200};
constexpr Rgb kFrontier{220, 40, 40};
constexpr Rgb kGlobalEdge{40, 170, 60};
constexpr Rgb kUnvalidated{200, 0, 200};
constexpr Rgb kAnchor{20, 110, 30};
constexpr Rgb kPlan{255, 140, 0};
constexpr Rgb kRobot{0, 0, 220};
constexpr Rgb kGoal{230, 180, 0};

struct Canvas {
    Image& img;
    Vec2 lo;
    double scale;  // pixels per meter

    std::pair<double, double> px(Vec2 p) const {
        return {(p.x - lo.x) * scale, img.height - (p.y - lo.y) * scale};
    }
    void dot(Vec2 p, int radius, Rgb c) {
        const auto [fx, fy] = px(p);
        const int cx = static_cast<int>(std::floor(fx));
        const int cy = static_cast<int>(std::floor(fy));
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                if (dx * dx + dy * dy <= radius * radius) img.set(cx + dx, cy + dy, c.r, c.g, c.b);
            }
        }
    }
    void line(Vec2 a, Vec2 b, Rgb c) {
        const auto [ax, ay] = px(a);
        const auto [bx, by] = px(b);
        const int n = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(bx - ax), std::abs(by - ay)))));
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            img.set(static_cast<int>(std::floor(ax + t * (bx - ax))), static_cast<int>(std::floor(ay + t * (by - ay))),
                    c.r, c.g, c.b);
        }
    }
};

}  // namespace

Image render_snapshot(const SnapshotInput& input, const RenderOptions& options) {
    Image img(options.width, options.height);
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};
    if (input.world != nullptr) {
        hi = {input.world->geometry().side_x(), input.world->geometry().side_y()};
    } else if (input.store != nullptr && !input.store->empty()) {
        lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        hi = {-lo.x, -lo.y};
        for (const Submap& s : input.store->all()) {
            for (const auto& v : s.roadmap.vertices) {
                const Vec2 p = s.to_corrected(v.position);
                lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
                hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
            }
            lo = {std::min(lo.x, s.anchor.x()), std::min(lo.y, s.anchor.y())};
            hi = {std::max(hi.x, s.anchor.x()), std::max(hi.y, s.anchor.y())};
        }
        lo = lo - Vec2{1.0, 1.0};
        hi = hi + Vec2{1.0, 1.0};
    }
    if (options.view_min) lo = *options.view_min;
    if (options.view_max) hi = *options.view_max;
    const double scale = std::min(options.width / std::max(hi.x - lo.x, 1e-9), options.height / std::max(hi.y - lo.y, 1e-9));
    Canvas cv{img, lo, scale};

    if (input.world != nullptr) {
        const World& w = *input.world;
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const Vec2 p{lo.x + (x + 0.5) / scale, lo.y + (img.height - y - 0.5) / scale};
                if (w.is_obstacle(p)) img.set(x, y, kObstacle.r, kObstacle.g, kObstacle.b);
            }
        }
    }
    if (input.store != nullptr) {
        for (const Submap& s : input.store->all()) {
            for (const auto& e : s.roadmap.edges) {
                cv.line(s.corrected_position(e.a), s.corrected_position(e.b), kRoadmap);
            }
        }
        for (const Submap& s : input.store->all()) {
            for (const auto& v : s.roadmap.vertices) {
                if (!v.is_frontier) cv.dot(s.to_corrected(v.position), 0, kVertex);
            }
        }
        for (const Submap& s : input.store->all()) {
            for (int v : s.frontier_vertex_ids) cv.dot(s.corrected_position(v), 1, kFrontier);
        }
    }
    if (input.topology != nullptr) {
        for (const auto& e : input.topology->edges()) {
            cv.line(input.topology->anchor(e.a).position(), input.topology->anchor(e.b).position(),
                    e.kind == EdgeKind::UnvalidatedLoop ? kUnvalidated : kGlobalEdge);
        }
        for (int id = 0; id < static_cast<int>(input.topology->node_count()); ++id) {
            cv.dot(input.topology->anchor(id).position(), 2, kAnchor);
        }
    }
    if (input.plan != nullptr) {
        const auto& wps = input.plan->waypoints;
        for (std::size_t i = 1; i < wps.size(); ++i) cv.line(wps[i - 1], wps[i], kPlan);
    }
    for (const Vec2& g : input.goals) cv.dot(g, 3, kGoal);
    if (input.robot) {
        cv.dot(input.robot->position(), 3, kRobot);
        const Vec2 nose = input.robot->position() +
                          (6.0 / scale) * Vec2{std::cos(input.robot->theta()), std::sin(input.robot->theta())};
        cv.line(input.robot->position(), nose, kRobot);
    }
    return img;
}

void write_png(const Image& image, const std::filesystem::path& path) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (fp == nullptr) throw IoError("cannot open " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        std::fclose(fp);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("png encoding failed for " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, image.rgb.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width) * 3);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw IoError("cannot close " + path.string());
}

void render_snapshot(const SnapshotInput& input, const std::filesystem::path& path, const RenderOptions& options) {
    write_png(render_snapshot(input, options), path);
}

}  // namespace hitmap
