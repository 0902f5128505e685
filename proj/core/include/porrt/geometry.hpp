#pragma once

#include <array>
#include <random>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace porrt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Rng = std::mt19937_64;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Rigid transform of the object (or finger) in the world frame.
///
/// Rotation is held as a unit quaternion and renormalized after every
/// operation that produces one.
class Pose {
public:
    Pose();
    /// Throws ValidationError if `rotation` is (numerically) zero.
    Pose(const Eigen::Quaterniond& rotation, const Vec3& translation);

    /// Pose in the table plane: rotation about +z by `yaw`, z fixed.
    static Pose planar(double x, double y, double yaw, double z = 0.0);
    static Pose identity() { return {}; }

    /// Serialized layout is [qw, qx, qy, qz, tx, ty, tz].
    static Pose from_array(std::span<const double> values);
    std::array<double, 7> to_array() const;

    const Eigen::Quaterniond& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    /// Rotation angle about +z in (-pi, pi]. Exact for planar poses.
    double yaw() const;
    Vec2 xy() const { return translation_.head<2>(); }

    Pose compose(const Pose& rhs) const;
    Pose inverse() const;
    Vec3 transform(const Vec3& point) const;

private:
    Eigen::Quaterniond rotation_;
    Vec3 translation_;
};

/// Weights of the rotational and translational terms of the pose metric.
class MetricWeights {
public:
    /// alpha = beta = 0.5.
    MetricWeights();
    /// Requires alpha, beta in [0, 1] and alpha + beta = 1 (within 1e-12).
    MetricWeights(double alpha, double beta);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

private:
    double alpha_;
    double beta_;
};

/// Box limits on the planar pose coordinates (x [m], y [m], yaw [rad]).
class PoseBounds {
public:
    PoseBounds(const Vec3& lower, const Vec3& upper, double z = 0.0);

    const Vec3& lower() const { return lower_; }
    const Vec3& upper() const { return upper_; }
    double z() const { return z_; }

    bool contains(const Pose& pose) const;
    /// Translation-only containment, yaw ignored.
    bool contains_xy(const Vec2& point) const;

private:
    Vec3 lower_;
    Vec3 upper_;
    double z_;
};

/// Double-cover-safe chord distance min(|q1 - q2|, |q1 + q2|).
/// Throws ValidationError when either input is not unit norm within 1e-9.
double quat_distance(const Eigen::Quaterniond& q1, const Eigen::Quaterniond& q2);

/// alpha * quat_distance + beta * |t2 - t1|.
double pose_metric(const Pose& p1, const Pose& p2, const MetricWeights& weights);

/// Uniform sample of (x, y, yaw) inside `bounds`; z, roll and pitch fixed.
Pose sample_pose_uniform(const PoseBounds& bounds, Rng& rng);

} // namespace porrt
