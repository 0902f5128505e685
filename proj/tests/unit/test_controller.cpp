#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "porrt/controller.hpp"
#include "porrt/errors.hpp"

using namespace porrt;

namespace {

const ObjectModel kSquare = ObjectModel::box(0.1, 0.1);

WorldState at(double x, double y, double yaw)
{
    WorldState s;
    s.object_pose = Pose::planar(x, y, yaw);
    s.finger_pos = Vec2(x - 0.2, y);
    return s;
}

bool ray_hits(const PushAction& a, const WorldState& x, const ObjectModel& object)
{
    return PosedFootprint(object, x.object_pose).segment_entry(a.approach_point, a.travel * a.direction)
        .has_value();
}

PushAction through_com(double travel)
{
    PushAction a;
    a.approach_point = Vec2(-0.1, 0.0);
    a.direction = Vec2::UnitX();
    a.travel = travel;
    return a;
}

} // namespace

TEST(SampleRandomActions, EveryRayHitsTheFootprint)
{
    const WorldState x = at(0.4, 0.6, 0.3);
    for (int n : {1, 64}) {
        Rng rng(static_cast<std::uint64_t>(n));
        const auto actions = sample_random_actions(x, kSquare, n, rng);
        ASSERT_EQ(static_cast<int>(actions.size()), n);
        for (const PushAction& a : actions) {
            EXPECT_NO_THROW(a.validate());
            EXPECT_TRUE(ray_hits(a, x, kSquare));
            EXPECT_FALSE(detect_contact(a.approach_point, kSquare, x.object_pose).contact);
        }
    }
}

TEST(SampleRandomActions, DeterministicGivenSeed)
{
    const WorldState x = at(0.4, 0.6, 0.3);
    Rng r1(5);
    Rng r2(5);
    const auto a = sample_random_actions(x, kSquare, 10, r1);
    const auto b = sample_random_actions(x, kSquare, 10, r2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].approach_point, b[i].approach_point);
        EXPECT_EQ(a[i].direction, b[i].direction);
    }
}

TEST(SampleRandomActions, ApproachAnglesCoverTheCircle)
{
    const WorldState x = at(0.0, 0.0, 0.0);
    Rng rng(13);
    const auto actions = sample_random_actions(x, kSquare, 1000, rng);
    std::vector<int> sectors(12, 0);
    for (const PushAction& a : actions) {
        const double angle = std::atan2(a.approach_point.y(), a.approach_point.x()) + std::numbers::pi;
        sectors[static_cast<std::size_t>(std::min(11.0, std::floor(angle / (std::numbers::pi / 6))))]++;
    }
    for (int count : sectors) {
        EXPECT_GT(count, 0);
    }
}

TEST(GreedyRollout, TowardTargetDecreasesMonotonically)
{
    const WorldState x = at(0.0, 0.0, 0.0);
    const Pose target = Pose::planar(0.3, 0.0, 0.0);
    const PoseCost cost = metric_cost(MetricWeights());
    const RolloutResult r = greedy_rollout(x, through_com(0.2), target, kSquare, cost);
    EXPECT_FALSE(r.discarded);
    EXPECT_GT(r.steps_used, 0);
    EXPECT_LT(r.cost, cost(x.object_pose, target));
    // Without overshoot the whole travel is used.
    EXPECT_EQ(r.steps_used, through_com(0.2).step_count());
}

TEST(GreedyRollout, AwayFromTargetIsDiscarded)
{
    const WorldState x = at(0.0, 0.0, 0.0);
    const Pose target = Pose::planar(-0.3, 0.0, 0.0);
    const RolloutResult r = greedy_rollout(x, through_com(0.2), target, kSquare, metric_cost(MetricWeights()));
    EXPECT_TRUE(r.discarded);
}

TEST(GreedyRollout, StopsAtScanOracleMinimum)
{
    const WorldState x = at(0.0, 0.0, 0.0);
    const Pose target = Pose::planar(0.2, 0.0, 0.0);
    const MetricWeights w;
    const PushAction a = through_com(0.3);
    const RolloutResult r = greedy_rollout(x, a, target, kSquare, metric_cost(w));

    // Exhaustive scan of the full push trace.
    const PushResult full = simulate_push(x, kSquare, a);
    std::size_t best = 0;
    double best_cost = pose_metric(full.trace[0].object_pose, target, w);
    for (std::size_t i = 1; i < full.trace.size(); ++i) {
        const double c = pose_metric(full.trace[i].object_pose, target, w);
        if (c < best_cost) {
            best_cost = c;
            best = i;
        }
    }
    const int best_steps = static_cast<int>(best) + 1;
    EXPECT_LE(std::abs(r.steps_used - best_steps), 1);
    EXPECT_LE(std::abs(a.arc_length(r.steps_used) - a.arc_length(best_steps)), a.step_forward + 1e-12);
    EXPECT_NEAR(r.cost, best_cost, 1e-9 + a.step_forward);
    // The truncated action reproduces the returned state.
    const WorldState replayed = simulate_push(x, kSquare, r.action).state;
    EXPECT_EQ(replayed.object_pose.to_array(), r.state.object_pose.to_array());
}

TEST(GreedyRollout, NeverWorseThanInput)
{
    Rng rng(21);
    const PoseCost cost = metric_cost(MetricWeights());
    for (int trial = 0; trial < 20; ++trial) {
        const WorldState x = at(0.5, 0.5, 0.1 * trial);
        const Pose target = sample_pose_uniform(PoseBounds(Vec3(0.2, 0.2, -3), Vec3(0.8, 0.8, 3)), rng);
        for (const PushAction& a : sample_random_actions(x, kSquare, 16, rng)) {
            const RolloutResult r = greedy_rollout(x, a, target, kSquare, cost);
            if (!r.discarded) {
                EXPECT_LE(r.cost, cost(x.object_pose, target));
            }
        }
    }
}

TEST(SelectControlPolicy, AlreadyAtTarget)
{
    const WorldState x = at(0.5, 0.5, 0.0);
    Rng rng(1);
    const PolicySegment seg =
        select_control_policy(x, Pose::planar(0.505, 0.5, 0.0), 10, 0.02, kSquare, MetricWeights(), rng);
    EXPECT_TRUE(seg.empty());
    EXPECT_EQ(seg.terminated_by, Termination::CostBelowEpsilon);
}

TEST(SelectControlPolicy, BlockedByWorkspace)
{
    const WorldState x = at(0.5, 0.5, 0.0);
    ControllerParams params;
    // Walls hug the object: any push moves the COM out.
    params.workspace = PoseBounds(Vec3(0.5 - 1e-4, 0.5 - 1e-4, -4), Vec3(0.5 + 1e-4, 0.5 + 1e-4, 4));
    Rng rng(2);
    const PolicySegment seg = select_control_policy(x, Pose::planar(0.8, 0.5, 0.0), 10, 0.02, kSquare,
                                                    MetricWeights(), rng, params);
    EXPECT_TRUE(seg.empty());
    EXPECT_EQ(seg.terminated_by, Termination::NoImprovement);
}

TEST(SelectControlPolicy, ReachesNearbyTranslationTarget)
{
    const WorldState x = at(0.4, 0.5, 0.0);
    const Pose target = Pose::planar(0.55, 0.5, 0.0);
    const MetricWeights w;
    Rng rng(3);
    int rounds = 0;
    const PolicySegment seg = select_control_policy(
        x, target, 10, 0.02, kSquare, w, rng, {},
        [&](const RoundStats& s, const SegmentStep*) { rounds = s.round; });
    ASSERT_FALSE(seg.empty());
    EXPECT_LT(seg.steps.back().cost, 0.02);
    EXPECT_EQ(seg.terminated_by, Termination::CostBelowEpsilon);
    EXPECT_LE(rounds, 10);
    EXPECT_LE(static_cast<int>(seg.steps.size()), 10);
    EXPECT_TRUE(seg.strictly_decreasing());

    // Replaying the segment from x reproduces every step.
    WorldState s = x;
    for (const SegmentStep& step : seg.steps) {
        s = simulate_push(s, kSquare, step.action).state;
        EXPECT_LT((s.object_pose.xy() - step.state.object_pose.xy()).norm(), 1e-9);
        EXPECT_LT(std::abs(wrap_angle(s.object_pose.yaw() - step.state.object_pose.yaw())), 1e-9);
    }
}

TEST(SelectControlPolicy, ArgminInvariantUnderCostScaling)
{
    const WorldState x = at(0.3, 0.3, 0.2);
    const Pose target = Pose::planar(0.6, 0.5, 1.0);
    const PoseCost base = metric_cost(MetricWeights(0.4, 0.6));
    const PoseCost scaled = [&](const Pose& a, const Pose& b) { return 7.5 * base(a, b); };
    Rng r1(8);
    Rng r2(8);
    const PolicySegment s1 = select_control_policy(x, target, 5, 0.02, kSquare, base, r1);
    const PolicySegment s2 = select_control_policy(x, target, 5, 0.02 * 7.5, kSquare, scaled, r2);
    ASSERT_EQ(s1.steps.size(), s2.steps.size());
    for (std::size_t i = 0; i < s1.steps.size(); ++i) {
        EXPECT_EQ(s1.steps[i].action.approach_point, s2.steps[i].action.approach_point);
        EXPECT_EQ(s1.steps[i].action.travel, s2.steps[i].action.travel);
        EXPECT_NEAR(s2.steps[i].cost, 7.5 * s1.steps[i].cost, 1e-12);
    }
}

namespace {

// Half the particles at x = near, half 15 mm further along +x.
ParticleBelief two_clusters(double near)
{
    std::vector<WorldState> particles;
    for (int i = 0; i < 200; ++i) {
        particles.push_back(at(i < 100 ? near : near + 0.015, 0.5, 0.0));
    }
    return ParticleBelief(particles, {}, 3);
}

} // namespace

TEST(SwitchingPolicy, SinglePolicy)
{
    const std::vector<LocalPolicy> one{make_goal_policy(kSquare)};
    EXPECT_EQ(switching_policy_index(one, two_clusters(0.3), Pose::planar(0.8, 0.5, 0)), 0u);
}

TEST(SwitchingPolicy, PointMassPrefersGoal)
{
    const ParticleBelief b({at(0.3, 0.5, 0.0)}, {}, 1);
    const Pose target = Pose::planar(0.8, 0.5, 0.0);
    EntropyPolicyParams ep;
    ep.entropy_floor = -1.0; // keep the entropy policy eligible
    const std::vector<LocalPolicy> policies{make_entropy_policy(kSquare, PoseObservationModel{}, ep),
                                            make_goal_policy(kSquare)};
    const double entropy_score = policies[0].expected_cost(b, target);
    const double goal_score = policies[1].expected_cost(b, target);
    EXPECT_NEAR(entropy_score, 0.0, 1e-12);
    // A 5 cm push straight at the target lowers the translation term by beta * 0.05.
    EXPECT_NEAR(goal_score, -0.5 * 0.05, 2e-3);
    EXPECT_EQ(switching_policy(policies, b, target).name, "goal");
}

TEST(SwitchingPolicy, InformativeTouchPrefersEntropy)
{
    const ParticleBelief b = two_clusters(0.3);
    const Pose target = Pose::planar(0.8, 0.5, 0.0);
    PoseObservationModel obs;
    EntropyPolicyParams ep;
    ep.bits_weight = 0.1;
    ep.entropy_floor = 0.5;
    const std::vector<LocalPolicy> policies{make_entropy_policy(kSquare, obs, ep), make_goal_policy(kSquare)};
    EXPECT_NEAR(entropy(b), 1.0, 1e-12);

    // The probe touches the near cluster only; a contact reading (or its
    // absence) leaves a 0.95 / 0.05 split.
    const double h = -(0.95 * std::log2(0.95) + 0.05 * std::log2(0.05));
    EXPECT_NEAR(policies[0].expected_cost(b, target), ep.bits_weight * (h - 1.0), 1e-9);
    EXPECT_EQ(switching_policy(policies, b, target).name, "entropy");

    // Once the belief is below the entropy floor the entropy policy is terminated.
    const ParticleBelief settled({at(0.3, 0.5, 0.0)}, {}, 1);
    EXPECT_TRUE(policies[0].terminated(settled, target));
    EXPECT_EQ(switching_policy(policies, settled, target).name, "goal");
}
