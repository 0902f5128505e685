#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "porrt/errors.hpp"
#include "porrt/geometry.hpp"

using namespace porrt;

namespace {

Pose random_pose(Rng& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    return Pose(q, Vec3(n(rng), n(rng), n(rng)));
}

} // namespace

TEST(QuatDistance, IdentityAndDoubleCover)
{
    const Eigen::Quaterniond id = Eigen::Quaterniond::Identity();
    EXPECT_DOUBLE_EQ(quat_distance(id, id), 0.0);
    EXPECT_DOUBLE_EQ(quat_distance(id, Eigen::Quaterniond(-1, 0, 0, 0)), 0.0);
}

TEST(QuatDistance, HalfTurnIsSqrtTwo)
{
    const double d = quat_distance(Eigen::Quaterniond::Identity(), Eigen::Quaterniond(0, 0, 0, 1));
    EXPECT_NEAR(d, std::sqrt(2.0), 1e-12);
}

TEST(QuatDistance, RejectsNonUnitInput)
{
    EXPECT_THROW(quat_distance(Eigen::Quaterniond(2, 0, 0, 0), Eigen::Quaterniond::Identity()),
                 ValidationError);
}

TEST(QuatDistance, MonotoneInRotationAngle)
{
    Rng rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Pose base = random_pose(rng);
        Vec3 axis(n(rng), n(rng), n(rng));
        axis.normalize();
        double last = 0.0;
        for (int k = 0; k <= 64; ++k) {
            const double angle = std::numbers::pi * k / 64;
            const Eigen::Quaterniond delta(Eigen::AngleAxisd(angle, axis));
            const double d = quat_distance(base.rotation(), (base.rotation() * delta).normalized());
            EXPECT_GE(d, last - 1e-12);
            last = d;
        }
    }
}

TEST(PoseMetric, Examples)
{
    const Pose a = Pose::planar(0, 0, 0);
    EXPECT_DOUBLE_EQ(pose_metric(a, a, MetricWeights()), 0.0);
    const Pose b(Eigen::Quaterniond::Identity(), Vec3(3, 4, 0));
    EXPECT_NEAR(pose_metric(a, b, MetricWeights(0.0, 1.0)), 5.0, 1e-12);
    const Pose flip(Eigen::Quaterniond(0, 0, 0, 1), Vec3::Zero());
    EXPECT_NEAR(pose_metric(a, flip, MetricWeights(1.0, 0.0)), std::sqrt(2.0), 1e-12);
}

TEST(PoseMetric, AxiomsOnRandomPairs)
{
    Rng rng(11);
    const MetricWeights w(0.3, 0.7);
    for (int i = 0; i < 10000; ++i) {
        const Pose p = random_pose(rng);
        const Pose q = random_pose(rng);
        const double d = pose_metric(p, q, w);
        EXPECT_GE(d, 0.0);
        EXPECT_DOUBLE_EQ(d, pose_metric(q, p, w));
        EXPECT_EQ(pose_metric(p, p, w), 0.0);
    }
}

TEST(PoseMetric, PlanarTranslationInvariance)
{
    Rng rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Pose p = Pose::planar(u(rng), u(rng), 3 * u(rng));
        const Pose q = Pose::planar(u(rng), u(rng), 3 * u(rng));
        const double dx = u(rng);
        const double dy = u(rng);
        const Pose ps = Pose::planar(p.xy().x() + dx, p.xy().y() + dy, p.yaw());
        const Pose qs = Pose::planar(q.xy().x() + dx, q.xy().y() + dy, q.yaw());
        EXPECT_NEAR(pose_metric(p, q, MetricWeights()), pose_metric(ps, qs, MetricWeights()), 1e-12);
    }
}

TEST(MetricWeights, EnforcesUnitSum)
{
    EXPECT_NO_THROW(MetricWeights(0.25, 0.75));
    EXPECT_THROW(MetricWeights(0.5, 0.6), ValidationError);
    EXPECT_THROW(MetricWeights(-0.5, 1.5), ValidationError);
    EXPECT_DOUBLE_EQ(MetricWeights().alpha(), 0.5);
}

TEST(Pose, ComposeWithInverseIsIdentity)
{
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const Pose p = random_pose(rng);
        const Pose id = p.compose(p.inverse());
        EXPECT_LT(quat_distance(id.rotation(), Eigen::Quaterniond::Identity()), 1e-9);
        EXPECT_LT(id.translation().norm(), 1e-9);
        EXPECT_NEAR(id.rotation().norm(), 1.0, 1e-9);
    }
}

TEST(Pose, ArrayRoundTripAndValidation)
{
    const Pose p = Pose::planar(0.1, -0.2, 0.7, 0.03);
    const auto a = p.to_array();
    const Pose q = Pose::from_array(a);
    EXPECT_EQ(q.to_array(), a);
    EXPECT_NEAR(p.yaw(), 0.7, 1e-12);
    const double zero[7] = {0, 0, 0, 0, 1, 2, 3};
    EXPECT_THROW(Pose::from_array(zero), ValidationError);
}

TEST(WrapAngle, RangeIsHalfOpen)
{
    EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(wrap_angle(0.5), 0.5, 1e-15);
}

TEST(SamplePose, DegenerateBoundsGiveExactPose)
{
    const PoseBounds b(Vec3(0.3, 0.4, 0.5), Vec3(0.3, 0.4, 0.5), 0.1);
    Rng rng(1);
    const Pose p = sample_pose_uniform(b, rng);
    EXPECT_DOUBLE_EQ(p.xy().x(), 0.3);
    EXPECT_DOUBLE_EQ(p.xy().y(), 0.4);
    EXPECT_NEAR(p.yaw(), 0.5, 1e-15);
    EXPECT_DOUBLE_EQ(p.translation().z(), 0.1);
}

TEST(SamplePose, DeterministicGivenSeed)
{
    const PoseBounds b(Vec3::Zero(), Vec3::Ones());
    Rng r1(42);
    Rng r2(42);
    EXPECT_EQ(sample_pose_uniform(b, r1).to_array(), sample_pose_uniform(b, r2).to_array());
}

TEST(SamplePose, UniformMeansAndOffsetBounds)
{
    const PoseBounds unit(Vec3::Zero(), Vec3::Ones());
    Rng rng(7);
    Vec3 sum = Vec3::Zero();
    for (int i = 0; i < 10000; ++i) {
        const Pose p = sample_pose_uniform(unit, rng);
        ASSERT_TRUE(unit.contains(p));
        sum += Vec3(p.xy().x(), p.xy().y(), p.yaw());
    }
    sum /= 10000.0;
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(sum[k], 0.5, 0.02);
    }
    const PoseBounds shifted(Vec3(2, 3, -1), Vec3(2.5, 3.5, -0.5));
    for (int i = 0; i < 1000; ++i) {
        EXPECT_TRUE(shifted.contains(sample_pose_uniform(shifted, rng)));
    }
}

TEST(PoseBounds, RejectsInvertedLimits)
{
    EXPECT_THROW(PoseBounds(Vec3(1, 0, 0), Vec3(0, 1, 1)), ValidationError);
}
