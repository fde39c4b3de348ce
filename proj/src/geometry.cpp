#include "hitmap/geometry.hpp"

#include <string>

#include "hitmap/errors.hpp"

namespace hitmap {

double normalize_angle(double theta) {
    constexpr double pi = std::numbers::pi;
    if (theta > -pi && theta <= pi) {
        return theta;
    }
    double wrapped = std::fmod(theta + pi, 2.0 * pi);
    if (wrapped <= 0.0) {
        wrapped += 2.0 * pi;
    }
    return wrapped - pi;
}

std::string_view to_string(Frame frame) {
    switch (frame) {
    case Frame::GroundTruth: return "GroundTruth";
    case Frame::Odometry: return "Odometry";
    case Frame::Corrected: return "Corrected";
    }
    return "GroundTruth";
}

Frame frame_from_string(std::string_view name) {
    if (name == "GroundTruth") return Frame::GroundTruth;
    if (name == "Odometry") return Frame::Odometry;
    if (name == "Corrected") return Frame::Corrected;
    throw ParseError("unknown frame '" + std::string(name) + "'");
}

Pose2::Pose2(double x, double y, double theta, Frame frame)
    : x_(x), y_(y), theta_(normalize_angle(theta)), frame_(frame) {}

static void require_same_frame(const Pose2& a, const Pose2& b) {
    if (a.frame() != b.frame()) {
        throw FrameMismatch(std::string(to_string(a.frame())) + " vs " + std::string(to_string(b.frame())));
    }
}

Pose2 Pose2::compose(const Pose2& other) const {
    require_same_frame(*this, other);
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    return {x_ + c * other.x_ - s * other.y_, y_ + s * other.x_ + c * other.y_, theta_ + other.theta_, frame_};
}

Pose2 Pose2::inverse() const {
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    return {-(c * x_ + s * y_), s * x_ - c * y_, -theta_, frame_};
}

Pose2 Pose2::between(const Pose2& other) const {
    require_same_frame(*this, other);
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    const double dx = other.x_ - x_;
    const double dy = other.y_ - y_;
    return {c * dx + s * dy, -s * dx + c * dy, other.theta_ - theta_, frame_};
}

Vec2 Pose2::transform(Vec2 local) const {
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    return {x_ + c * local.x - s * local.y, y_ + s * local.x + c * local.y};
}

Vec2 Pose2::inverse_transform(Vec2 point) const {
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    const double dx = point.x - x_;
    const double dy = point.y - y_;
    return {c * dx + s * dy, -s * dx + c * dy};
}

}  // namespace hitmap
