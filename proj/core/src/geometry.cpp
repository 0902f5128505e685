#include "porrt/geometry.hpp"

#include <cmath>
#include <numbers>

#include "porrt/errors.hpp"

namespace porrt {

namespace {

constexpr double kUnitTolerance = 1e-9;

Eigen::Quaterniond normalized_or_throw(const Eigen::Quaterniond& q)
{
    const double norm = q.norm();
    if (!(norm > 1e-12) || !std::isfinite(norm)) {
        throw ValidationError("pose rotation quaternion has zero or non-finite norm");
    }
    return Eigen::Quaterniond(q.coeffs() / norm);
}

void require_unit(const Eigen::Quaterniond& q, const char* name)
{
    if (std::abs(q.norm() - 1.0) > kUnitTolerance) {
        throw ValidationError(std::string("quaternion ") + name + " is not unit norm");
    }
}

} // namespace

double wrap_angle(double angle)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::fmod(angle + std::numbers::pi, two_pi);
    if (wrapped <= 0.0) {
        wrapped += two_pi;
    }
    return wrapped - std::numbers::pi;
}

Pose::Pose() : rotation_(Eigen::Quaterniond::Identity()), translation_(Vec3::Zero()) {}

Pose::Pose(const Eigen::Quaterniond& rotation, const Vec3& translation)
    : rotation_(normalized_or_throw(rotation)), translation_(translation)
{
}

Pose Pose::planar(double x, double y, double yaw, double z)
{
    const double half = 0.5 * yaw;
    return {Eigen::Quaterniond(std::cos(half), 0.0, 0.0, std::sin(half)), Vec3(x, y, z)};
}

Pose Pose::from_array(std::span<const double> values)
{
    if (values.size() != 7) {
        throw ValidationError("pose needs 7 numbers [qw,qx,qy,qz,tx,ty,tz]");
    }
    return {Eigen::Quaterniond(values[0], values[1], values[2], values[3]),
            Vec3(values[4], values[5], values[6])};
}

std::array<double, 7> Pose::to_array() const
{
    return {rotation_.w(), rotation_.x(), rotation_.y(), rotation_.z(),
            translation_.x(), translation_.y(), translation_.z()};
}

double Pose::yaw() const
{
    const auto& q = rotation_;
    const double siny = 2.0 * (q.w() * q.z() + q.x() * q.y());
    const double cosy = 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z());
    return std::atan2(siny, cosy);
}

Pose Pose::compose(const Pose& rhs) const
{
    return {rotation_ * rhs.rotation_, translation_ + rotation_ * rhs.translation_};
}

Pose Pose::inverse() const
{
    const Eigen::Quaterniond inv = rotation_.conjugate();
    return {inv, -(inv * translation_)};
}

Vec3 Pose::transform(const Vec3& point) const
{
    return rotation_ * point + translation_;
}

MetricWeights::MetricWeights() : alpha_(0.5), beta_(0.5) {}

MetricWeights::MetricWeights(double alpha, double beta)
{
    if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) {
        throw ValidationError("metric weights must lie in [0, 1]");
    }
    if (std::abs(alpha + beta - 1.0) > 1e-12) {
        throw ValidationError("metric weights must sum to 1");
    }
    alpha_ = alpha;
    beta_ = 1.0 - alpha;
}

PoseBounds::PoseBounds(const Vec3& lower, const Vec3& upper, double z)
    : lower_(lower), upper_(upper), z_(z)
{
    for (int i = 0; i < 3; ++i) {
        if (!(lower_[i] <= upper_[i])) {
            throw ValidationError("pose bounds require lower <= upper in every dimension");
        }
    }
}

bool PoseBounds::contains_xy(const Vec2& point) const
{
    return point.x() >= lower_.x() && point.x() <= upper_.x() && point.y() >= lower_.y() &&
           point.y() <= upper_.y();
}

bool PoseBounds::contains(const Pose& pose) const
{
    const double yaw = pose.yaw();
    return contains_xy(pose.xy()) && yaw >= lower_.z() && yaw <= upper_.z();
}

double quat_distance(const Eigen::Quaterniond& q1, const Eigen::Quaterniond& q2)
{
    require_unit(q1, "q1");
    require_unit(q2, "q2");
    const double minus = (q1.coeffs() - q2.coeffs()).norm();
    const double plus = (q1.coeffs() + q2.coeffs()).norm();
    return std::min(minus, plus);
}

double pose_metric(const Pose& p1, const Pose& p2, const MetricWeights& weights)
{
    const double rot = quat_distance(p1.rotation(), p2.rotation());
    const double lin = (p2.translation() - p1.translation()).norm();
    return weights.alpha() * rot + weights.beta() * lin;
}

Pose sample_pose_uniform(const PoseBounds& bounds, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec3 sample;
    for (int i = 0; i < 3; ++i) {
        const double r = unit(rng);
        sample[i] = bounds.lower()[i] + r * (bounds.upper()[i] - bounds.lower()[i]);
    }
    return Pose::planar(sample.x(), sample.y(), sample.z(), bounds.z());
}

} // namespace porrt
