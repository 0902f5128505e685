#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "porrt/dynamics.hpp"
#include "porrt/errors.hpp"

using namespace porrt;

namespace {

const ObjectModel kSquare = ObjectModel::box(0.1, 0.1);

WorldState at(const Pose& pose)
{
    WorldState s;
    s.object_pose = pose;
    s.finger_pos = pose.xy() + Vec2(-0.5, 0.0);
    return s;
}

PushAction push(Vec2 from, Vec2 dir, double travel)
{
    PushAction a;
    a.approach_point = from;
    a.direction = dir.normalized();
    a.travel = travel;
    return a;
}

Vec2 rotate(const Vec2& v, double angle)
{
    return {std::cos(angle) * v.x() - std::sin(angle) * v.y(),
            std::sin(angle) * v.x() + std::cos(angle) * v.y()};
}

} // namespace

TEST(ObjectModel, Validation)
{
    EXPECT_THROW(ObjectModel({{0, 0}, {0, 1}, {1, 1}, {1, 0}}, {0.5, 0.5}), ValidationError);
    EXPECT_THROW(ObjectModel({{0, 0}, {1, 0}, {0.2, 0.2}, {0, 1}}, {0.1, 0.1}), ValidationError);
    EXPECT_THROW(ObjectModel({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {2.0, 0.5}), ValidationError);
    EXPECT_THROW(ObjectModel::box(0.1, 0.1, 0.0), ValidationError);
    EXPECT_NO_THROW(ObjectModel({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {0.5, 0.5}));
}

TEST(ObjectModel, SquareMeanDistanceMatchesClosedForm)
{
    // Mean distance from the centre of a square of side a.
    const double a = 0.1;
    const double expected = a * (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 6.0;
    EXPECT_NEAR(kSquare.limit_surface_radius(), expected, 1e-4 * expected);
    EXPECT_NEAR(kSquare.area(), 0.01, 1e-15);
    EXPECT_NEAR(kSquare.min_edge_length(), 0.1, 1e-15);
}

TEST(DetectContact, InteriorFarAndBoundary)
{
    const Pose p = Pose::planar(0.2, 0.3, 0.4);
    const ContactInfo inside = detect_contact(p.xy(), kSquare, p);
    EXPECT_TRUE(inside.contact);
    EXPECT_GT(inside.depth, 0.0);

    const Vec2 edge_mid = p.xy() + rotate(Vec2(0.05, 0.0), 0.4);
    const Vec2 out = rotate(Vec2(1.0, 0.0), 0.4);
    EXPECT_FALSE(detect_contact(edge_mid + 10 * 0.001 * out, kSquare, p).contact);

    const Pose axis = Pose::planar(0, 0, 0);
    const ContactInfo on = detect_contact(Vec2(0.05, 0.01), kSquare, axis);
    EXPECT_TRUE(on.contact);
    EXPECT_EQ(on.depth, 0.0);
}

TEST(SimulatePush, NoContactMeansNoMotion)
{
    const WorldState s = at(Pose::planar(0.5, 0.5, 0.3));
    const PushResult r = simulate_push(s, kSquare, push({0.2, 0.8}, {-1, 0}, 0.2));
    EXPECT_EQ(r.state.object_pose.to_array(), s.object_pose.to_array());
    EXPECT_FALSE(r.state.in_contact);
    for (const ContactRecord& c : r.trace) {
        EXPECT_FALSE(c.in_contact);
        EXPECT_EQ(c.object_pose.to_array(), s.object_pose.to_array());
    }
}

TEST(SimulatePush, ThroughComSquarePushTranslatesOnly)
{
    const WorldState s = at(Pose::identity());
    const PushResult r = simulate_push(s, kSquare, push({-0.10, 0.0}, {1, 0}, 0.15));
    EXPECT_LT(std::abs(r.state.object_pose.yaw()), 1e-6);
    const double moved = r.state.object_pose.xy().norm();
    EXPECT_GT(moved, 0.0);
    EXPECT_LE(moved, 0.10 + 1e-12);
    // Point contact through the centre sticks, so the object follows the finger.
    EXPECT_NEAR(moved, 0.10, 1e-9);
    double last = 0.0;
    for (const ContactRecord& c : r.trace) {
        const double d = c.object_pose.xy().norm();
        EXPECT_GE(d, last);
        last = d;
    }
}

TEST(SimulatePush, MirroredPushesGiveOppositeYaw)
{
    for (double offset : {0.01, 0.02, 0.04}) {
        const WorldState s = at(Pose::identity());
        const PushResult up = simulate_push(s, kSquare, push({-0.1, offset}, {1, 0}, 0.2));
        const PushResult down = simulate_push(s, kSquare, push({-0.1, -offset}, {1, 0}, 0.2));
        const double yu = up.state.object_pose.yaw();
        const double yd = down.state.object_pose.yaw();
        EXPECT_GT(std::abs(yu), 1e-4);
        EXPECT_LT(yu * yd, 0.0);
        EXPECT_NEAR(yu, -yd, 1e-9);
        // Pushing above the centre turns the object clockwise.
        EXPECT_LT(yu, 0.0);
    }
}

TEST(SimulatePush, FrameEquivariance)
{
    Rng rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ObjectModel flap({{-0.06, -0.05}, {0.07, -0.05}, {0.09, 0.0}, {0.03, 0.06}, {-0.06, 0.05}},
                           {0.01, 0.0});
    for (int trial = 0; trial < 50; ++trial) {
        const Pose p = Pose::planar(0.1 * u(rng), 0.1 * u(rng), u(rng));
        const WorldState s = at(p);
        const Vec2 dir = rotate(Vec2::UnitX(), 0.5 * u(rng));
        const PushAction a = push(p.xy() - 0.15 * dir + Vec2(0, 0.03 * u(rng)), dir, 0.2);
        const PushResult base = simulate_push(s, flap, a);

        const double theta = 3 * u(rng);
        const Vec2 shift(u(rng), u(rng));
        const auto move = [&](const Vec2& v) { return Vec2(rotate(v, theta) + shift); };
        const Pose moved_pose = Pose::planar(move(p.xy()).x(), move(p.xy()).y(), p.yaw() + theta);
        WorldState ms = s;
        ms.object_pose = moved_pose;
        ms.finger_pos = move(s.finger_pos);
        PushAction ma = a;
        ma.approach_point = move(a.approach_point);
        ma.direction = rotate(a.direction, theta);
        const PushResult moved = simulate_push(ms, flap, ma);

        const Vec2 expect_xy = move(base.state.object_pose.xy());
        EXPECT_NEAR(moved.state.object_pose.xy().x(), expect_xy.x(), 1e-9);
        EXPECT_NEAR(moved.state.object_pose.xy().y(), expect_xy.y(), 1e-9);
        EXPECT_NEAR(wrap_angle(moved.state.object_pose.yaw() - base.state.object_pose.yaw() - theta), 0.0,
                    1e-9);
    }
}

TEST(SimulatePush, DeterministicAndQuasiStatic)
{
    const WorldState s = at(Pose::planar(0.0, 0.0, 0.2));
    const PushAction a = push({-0.12, 0.03}, {1, -0.2}, 0.25);
    const PushResult r1 = simulate_push(s, kSquare, a);
    const PushResult r2 = simulate_push(s, kSquare, a);
    ASSERT_EQ(r1.trace.size(), r2.trace.size());
    Pose prev = s.object_pose;
    for (std::size_t i = 0; i < r1.trace.size(); ++i) {
        EXPECT_EQ(r1.trace[i].object_pose.to_array(), r2.trace[i].object_pose.to_array());
        EXPECT_EQ(r1.trace[i].finger_pos, r2.trace[i].finger_pos);
        if (!r1.trace[i].in_contact) {
            EXPECT_EQ(r1.trace[i].object_pose.to_array(), prev.to_array());
        }
        // The finger never ends a step inside the object.
        EXPECT_GE(PosedFootprint(kSquare, r1.trace[i].object_pose).signed_distance_bound(r1.trace[i].finger_pos),
                  -1e-9);
        prev = r1.trace[i].object_pose;
    }
}

TEST(SimulatePush, OffCentrePushSlidesAtShallowAngle)
{
    const WorldState s = at(Pose::identity());
    const PushResult r = simulate_push(s, kSquare, push({-0.1, 0.1}, Vec2(1, -0.9), 0.2));
    bool any_sliding = false;
    for (const ContactRecord& c : r.trace) {
        any_sliding = any_sliding || c.sliding;
    }
    EXPECT_TRUE(any_sliding);
}

TEST(SimulatePush, RejectsTunnellingStepAndInteriorStart)
{
    const ObjectModel thin = ObjectModel::box(0.1, 0.001);
    PushAction a = push({-0.1, 0.0}, {1, 0}, 0.1);
    EXPECT_THROW(simulate_push(at(Pose::identity()), thin, a), ConfigurationError);
    a.approach_point = Vec2(0.01, 0.0);
    EXPECT_THROW(simulate_push(at(Pose::identity()), kSquare, a), ValidationError);
    a.direction = Vec2(1, 1);
    EXPECT_THROW(a.validate(), ValidationError);
}

TEST(SimulatePush, TruncatedActionReplaysPrefix)
{
    const WorldState s = at(Pose::identity());
    const PushAction a = push({-0.1, 0.02}, {1, 0}, 0.2);
    const PushResult full = simulate_push(s, kSquare, a);
    for (int k : {1, 10, 37, a.step_count()}) {
        const PushResult part = simulate_push(s, kSquare, a.truncated(k));
        ASSERT_EQ(static_cast<int>(part.trace.size()), k);
        EXPECT_EQ(part.state.object_pose.to_array(), full.trace[static_cast<std::size_t>(k - 1)].object_pose.to_array());
    }
}

TEST(SimulatePush, StopsNearTarget)
{
    const WorldState s = at(Pose::identity());
    const PushAction a = push({-0.1, 0.0}, {1, 0}, 0.4);
    const Pose target = Pose::planar(0.1, 0.0, 0.0);
    const PushResult r = simulate_push(s, kSquare, a, PushStop{target, MetricWeights(), 0.005});
    EXPECT_LT(pose_metric(r.state.object_pose, target, MetricWeights()), 0.005);
    EXPECT_LT(static_cast<int>(r.trace.size()), a.step_count());
}

TEST(FingerLineAction, Examples)
{
    const WorldState s = at(Pose::identity());
    PushAction a = finger_line_action(s, kSquare, Pose::planar(1, 0, 0));
    EXPECT_NEAR(a.direction.x(), 1.0, 1e-12);
    EXPECT_NEAR(a.direction.y(), 0.0, 1e-12);
    EXPECT_NEAR(a.approach_point.x(), -0.10, 1e-9);
    EXPECT_NEAR(a.approach_point.y(), 0.0, 1e-9);

    a = finger_line_action(s, kSquare, Pose::planar(1, 1, 0));
    EXPECT_NEAR(a.direction.x(), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(a.direction.y(), std::sqrt(0.5), 1e-12);
    EXPECT_THROW(finger_line_action(s, kSquare, Pose::planar(0, 0, 1.0)), DegenerateDirectionError);
}

TEST(FingerLineAction, FirstContactOnBoundary)
{
    Rng rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const WorldState s = at(Pose::planar(0.5 + 0.2 * u(rng), 0.5 + 0.2 * u(rng), 3 * u(rng)));
        const Pose target = Pose::planar(0.5 + 0.4 * u(rng), 0.5 + 0.4 * u(rng), 0.0);
        const PushAction a = finger_line_action(s, kSquare, target);
        EXPECT_FALSE(detect_contact(a.approach_point, kSquare, s.object_pose).contact);
        const PushResult r = simulate_push(s, kSquare, a);
        const auto first = std::find_if(r.trace.begin(), r.trace.end(),
                                        [](const ContactRecord& c) { return c.in_contact; });
        ASSERT_NE(first, r.trace.end());
        const Pose& before = first == r.trace.begin() ? s.object_pose : std::prev(first)->object_pose;
        EXPECT_NEAR(PosedFootprint(kSquare, first->object_pose).signed_distance_bound(first->finger_pos), 0.0,
                    a.contact_threshold);
        // Contact was made by the finger reaching the boundary, not by a jump.
        EXPECT_LT((first->object_pose.xy() - before.xy()).norm(), a.step_forward + 1e-12);
    }
}

TEST(FingerLineAction, FaceNormalPushDeliversComToTarget)
{
    for (double d : {0.05, 0.2, 0.35}) {
        const WorldState s = at(Pose::planar(0.3, 0.5, 0.0));
        const Pose target = Pose::planar(0.3 + d, 0.5, 0.0);
        const PushResult r = simulate_push(s, kSquare, finger_line_action(s, kSquare, target));
        EXPECT_LT((posed_com(kSquare, r.state.object_pose) - target.xy()).norm(), 1e-9);
        EXPECT_LT(std::abs(r.state.object_pose.yaw()), 1e-9);
    }
}
