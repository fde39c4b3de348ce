#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

namespace hitmap {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double squared_distance(Vec2 a, Vec2 b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

enum class Frame { GroundTruth, Odometry, Corrected };

std::string_view to_string(Frame frame);
Frame frame_from_string(std::string_view name);

/// Planar pose tagged with the frame it is expressed in. Composition,
/// inversion and relative poses are only defined within one frame; moving a
/// pose between frames is always explicit through `in_frame`.
class Pose2 {
public:
    Pose2() = default;
    Pose2(double x, double y, double theta, Frame frame = Frame::GroundTruth);

    double x() const { return x_; }
    double y() const { return y_; }
    double theta() const { return theta_; }
    Frame frame() const { return frame_; }
    Vec2 position() const { return {x_, y_}; }

    /// this * other: `other` is interpreted as a motion expressed in this pose's local frame.
    Pose2 compose(const Pose2& other) const;
    Pose2 inverse() const;
    /// The pose of `other` relative to this one: inverse() * other.
    Pose2 between(const Pose2& other) const;

    /// Local point -> frame point.
    Vec2 transform(Vec2 local) const;
    /// Frame point -> local point.
    Vec2 inverse_transform(Vec2 point) const;

    /// Same numbers, different frame label.
    Pose2 in_frame(Frame frame) const { return {x_, y_, theta_, frame}; }

    friend bool operator==(const Pose2&, const Pose2&) = default;

private:
    double x_ = 0.0;
    double y_ = 0.0;
    double theta_ = 0.0;
    Frame frame_ = Frame::GroundTruth;
};

inline Pose2 operator*(const Pose2& a, const Pose2& b) { return a.compose(b); }

}  // namespace hitmap
