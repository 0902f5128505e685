#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "porrt/belief.hpp"
#include "porrt/dynamics.hpp"
#include "porrt/geometry.hpp"

namespace porrt {

/// Cost of reaching `to` from `from`; the pose metric by default.
using PoseCost = std::function<double(const Pose& from, const Pose& to)>;

PoseCost metric_cost(const MetricWeights& weights);

enum class Termination { CostBelowEpsilon, BudgetExhausted, NoImprovement };

const char* to_string(Termination t);

struct SegmentStep {
    PushAction action; ///< truncated to the steps actually executed
    WorldState state;
    double cost = 0.0;
};

/// Self-stopping sequence of pushes with strictly decreasing cost.
struct PolicySegment {
    std::vector<SegmentStep> steps;
    Termination terminated_by = Termination::NoImprovement;
    Pose target; ///< pose the step costs are measured against

    bool empty() const { return steps.empty(); }
    bool strictly_decreasing() const;
};

struct ControllerParams {
    int candidates = 32;     ///< pushes sampled per round
    double clearance = 0.05; ///< approach ring distance outside the circumcircle [m]
    double max_push = 0.25;  ///< finger travel allowed past first contact [m]
    /// Aim points are drawn from the footprint scaled by this factor about the COM.
    double aim_spread = 0.3;
    PushParams push;
    /// Rollouts stop before the object COM leaves these bounds.
    std::optional<PoseBounds> workspace;
};

/// `n` pushes whose approach points lie on a ring around the posed footprint
/// and whose rays aim at uniformly sampled footprint points.
std::vector<PushAction> sample_random_actions(const WorldState& x, const ObjectModel& object, int n,
                                              Rng& rng, const ControllerParams& params = {});

struct RolloutResult {
    WorldState state;
    double cost = 0.0;
    int steps_used = 0;
    bool discarded = false;
    /// The input action cut to `steps_used` (unchanged when steps_used is 0).
    PushAction action;
};

/// Executes `action` step by step, tracking cost to `target`. The push is
/// discarded if the first step that moves the object raises the cost;
/// otherwise it runs until the cost rises (the state before the rise is
/// returned), travel is exhausted, or the object would leave `workspace`.
RolloutResult greedy_rollout(const WorldState& x, const PushAction& action, const Pose& target,
                             const ObjectModel& object, const PoseCost& cost,
                             const std::optional<PoseBounds>& workspace = {});

struct RoundStats {
    int round = 0;
    int candidates = 0;
    int discarded = 0;
    double best_cost = 0.0;
    bool accepted = false;
};

using RoundObserver = std::function<void(const RoundStats&, const SegmentStep* accepted)>;

/// Adaptive local controller: up to `budget` rounds of sample, roll out,
/// keep the cheapest improving candidate (lowest index on ties). Stops when
/// the cost drops below `epsilon` or no candidate improves.
PolicySegment select_control_policy(const WorldState& near_state, const Pose& target, int budget,
                                    double epsilon, const ObjectModel& object, const PoseCost& cost,
                                    Rng& rng, const ControllerParams& params = {},
                                    const RoundObserver& observer = {});

PolicySegment select_control_policy(const WorldState& near_state, const Pose& target, int budget,
                                    double epsilon, const ObjectModel& object,
                                    const MetricWeights& weights, Rng& rng,
                                    const ControllerParams& params = {},
                                    const RoundObserver& observer = {});

/// One self-stopping local behaviour for the belief-space switching policy.
struct LocalPolicy {
    std::string name;
    /// Expected change of the policy's own objective after one stage.
    std::function<double(const ParticleBelief&, const Pose& target)> expected_cost;
    std::function<bool(const ParticleBelief&, const Pose& target)> terminated;
    std::function<PushAction(const ParticleBelief&, const Pose& target)> action;
};

/// Returns the index of the policy with the lowest expected cost among those
/// not terminated (all policies when every one is terminated). Ties go to
/// the earlier policy.
std::size_t switching_policy_index(std::span<const LocalPolicy> policies, const ParticleBelief& b,
                                   const Pose& target);

const LocalPolicy& switching_policy(std::span<const LocalPolicy> policies, const ParticleBelief& b,
                                    const Pose& target);

struct EntropyPolicyParams {
    double bits_weight = 0.01;     ///< cost units per bit of entropy
    int observation_samples = 8;   ///< simulated outcomes per evaluation
    double probe_depth = 0.005;    ///< touch travel past the expected contact [m]
    double entropy_floor = 1.0;    ///< terminate below this many bits
    PushParams push;
};

struct GoalPolicyParams {
    double max_push = 0.05; ///< travel past expected contact per stage [m]
    double epsilon = 0.02;
    MetricWeights weights;
    PushParams push;
};

/// Touch probe toward the target from the belief mean. The expected cost is
/// bits_weight * (E[H(b')] - H(b)), with E taken over the contact readings
/// predicted by `observation_samples` particles picked systematically by weight.
LocalPolicy make_entropy_policy(const ObjectModel& object, const PoseObservationModel& obs,
                                const EntropyPolicyParams& params = {});

/// Short straight push toward the target from the belief mean. The expected
/// cost is the change of the weighted mean pose cost over all particles.
LocalPolicy make_goal_policy(const ObjectModel& object, const GoalPolicyParams& params = {});

} // namespace porrt
