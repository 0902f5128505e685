#include "porrt/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "porrt/errors.hpp"

namespace porrt {

namespace {

// Finger travel below this is rounding noise, not a push.
constexpr double kMinPushed = 1e-12;

double cross2(const Vec2& a, const Vec2& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

Vec2 sample_inside(const PosedFootprint& posed, Rng& rng)
{
    const std::size_t n = posed.vertices.size();
    std::vector<double> cumulative(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += 0.5 * std::abs(cross2(posed.vertices[i] - posed.com,
                                       posed.vertices[(i + 1) % n] - posed.com));
        cumulative[i] = total;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double pick = unit(rng) * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t tri = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), n - 1);
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    const Vec2& a = posed.com;
    const Vec2& b = posed.vertices[tri];
    const Vec2& c = posed.vertices[(tri + 1) % n];
    return (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c;
}

double expected_cost(const ParticleBelief& b, const Pose& target, const PoseCost& cost,
                     const std::vector<WorldState>& states)
{
    double total = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        total += b.weights()[i] * cost(states[i].object_pose, target);
    }
    return total;
}

// Straight push from behind the belief mean toward the target, limited to
// `past_contact` beyond the expected first contact.
PushAction probe_from_mean(const ObjectModel& object, const ParticleBelief& b, const Pose& target,
                           const PushParams& push, double past_contact)
{
    const WorldState mean = mean_state(b);
    PushAction action;
    try {
        action = finger_line_action(mean, object, target, push);
    } catch (const DegenerateDirectionError&) {
        action = finger_line_action(mean, object,
                                    Pose::planar(target.translation().x() + 1.0,
                                                 target.translation().y(), target.yaw()),
                                    push);
    }
    const Vec2 com = posed_com(object, mean.object_pose);
    const Vec2 reach = com - action.approach_point;
    const PosedFootprint posed(object, mean.object_pose);
    const auto entry = posed.segment_entry(action.approach_point, reach);
    const double contact_at = entry ? entry->first * reach.norm() : push.step_back;
    action.travel = std::min(action.travel, contact_at + past_contact);
    return action;
}

// Propagates every particle; a particle whose footprint swallows the
// approach point is left where it is.
std::vector<WorldState> propagate_all(const ParticleBelief& b, const ObjectModel& object,
                                      const PushAction& action)
{
    std::vector<WorldState> out;
    out.reserve(b.size());
    for (const WorldState& s : b.particles()) {
        try {
            out.push_back(simulate_push(s, object, action).state);
        } catch (const ValidationError&) {
            WorldState same = s;
            same.in_contact = true;
            out.push_back(same);
        }
    }
    return out;
}

// Entropy of the current particles reweighted by `weights`, merged the same
// way as entropy(ParticleBelief).
double reweighted_entropy(const ParticleBelief& b, std::vector<double> weights, double total)
{
    for (double& w : weights) {
        w /= total;
    }
    return entropy(ParticleBelief(b.particles(), std::move(weights), b.rng_seed()));
}

} // namespace

PoseCost metric_cost(const MetricWeights& weights)
{
    return [weights](const Pose& from, const Pose& to) { return pose_metric(from, to, weights); };
}

const char* to_string(Termination t)
{
    switch (t) {
    case Termination::CostBelowEpsilon:
        return "cost-below-epsilon";
    case Termination::BudgetExhausted:
        return "budget-exhausted";
    case Termination::NoImprovement:
        return "no-improvement";
    }
    return "unknown";
}

bool PolicySegment::strictly_decreasing() const
{
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (!(steps[i].cost < steps[i - 1].cost)) {
            return false;
        }
    }
    return true;
}

std::vector<PushAction> sample_random_actions(const WorldState& x, const ObjectModel& object, int n,
                                              Rng& rng, const ControllerParams& params)
{
    if (n < 1) {
        throw ValidationError("sample_random_actions needs n >= 1");
    }
    const PosedFootprint posed(object, x.object_pose);
    const double radius = object.circumradius() + params.clearance;
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<PushAction> actions;
    actions.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double phi = angle(rng);
        const Vec2 approach = posed.com + radius * Vec2(std::cos(phi), std::sin(phi));
        const Vec2 aim = posed.com + params.aim_spread * (sample_inside(posed, rng) - posed.com);
        const Vec2 ray = aim - approach;
        const auto entry = posed.segment_entry(approach, ray);
        const double gap = entry ? entry->first * ray.norm() : ray.norm();

        PushAction a;
        a.approach_point = approach;
        a.direction = ray.normalized();
        a.travel = gap + params.max_push;
        a.step_forward = params.push.step_forward;
        a.step_back = params.push.step_back;
        a.contact_threshold = params.push.contact_threshold;
        actions.push_back(a);
    }
    return actions;
}

RolloutResult greedy_rollout(const WorldState& x, const PushAction& action, const Pose& target,
                             const ObjectModel& object, const PoseCost& cost,
                             const std::optional<PoseBounds>& workspace)
{
    const double start_cost = cost(x.object_pose, target);
    PushStepper stepper(x, object, action);

    RolloutResult best{x, start_cost, 0, false, action};
    double previous = start_cost;
    bool touched = false;
    while (!stepper.done()) {
        const ContactRecord rec = stepper.step();
        if (workspace && !workspace->contains_xy(posed_com(object, rec.object_pose))) {
            break;
        }
        const double c = cost(rec.object_pose, target);
        if (rec.pushed > kMinPushed) {
            if (!touched) {
                touched = true;
                if (c > start_cost) {
                    best.discarded = true;
                    return best;
                }
            }
            if (c > previous) {
                break;
            }
        }
        previous = c;
        if (touched && c <= best.cost) {
            best.state = stepper.state();
            best.cost = c;
            best.steps_used = stepper.steps_taken();
        }
    }
    if (best.steps_used > 0) {
        best.action = action.truncated(best.steps_used);
    }
    return best;
}

PolicySegment select_control_policy(const WorldState& near_state, const Pose& target, int budget,
                                    double epsilon, const ObjectModel& object, const PoseCost& cost,
                                    Rng& rng, const ControllerParams& params,
                                    const RoundObserver& observer)
{
    if (budget < 1) {
        throw ValidationError("controller budget must be at least 1");
    }
    PolicySegment segment;
    segment.target = target;
    WorldState x = near_state;
    double current = cost(x.object_pose, target);
    if (current < epsilon) {
        segment.terminated_by = Termination::CostBelowEpsilon;
        return segment;
    }
    for (int round = 1; round <= budget; ++round) {
        const auto candidates = sample_random_actions(x, object, params.candidates, rng, params);
        std::optional<RolloutResult> best;
        int discarded = 0;
        for (const PushAction& u : candidates) {
            RolloutResult r = greedy_rollout(x, u, target, object, cost, params.workspace);
            if (r.discarded || r.steps_used == 0 || !(r.cost < current)) {
                ++discarded;
                continue;
            }
            if (!best || r.cost < best->cost) {
                best = std::move(r);
            }
        }
        RoundStats stats{round, static_cast<int>(candidates.size()), discarded,
                         best ? best->cost : current, best.has_value()};
        if (!best) {
            if (observer) {
                observer(stats, nullptr);
            }
            segment.terminated_by = Termination::NoImprovement;
            return segment;
        }
        segment.steps.push_back({best->action, best->state, best->cost});
        if (observer) {
            observer(stats, &segment.steps.back());
        }
        x = best->state;
        current = best->cost;
        if (current < epsilon) {
            segment.terminated_by = Termination::CostBelowEpsilon;
            return segment;
        }
    }
    segment.terminated_by = Termination::BudgetExhausted;
    return segment;
}

PolicySegment select_control_policy(const WorldState& near_state, const Pose& target, int budget,
                                    double epsilon, const ObjectModel& object,
                                    const MetricWeights& weights, Rng& rng,
                                    const ControllerParams& params, const RoundObserver& observer)
{
    return select_control_policy(near_state, target, budget, epsilon, object, metric_cost(weights), rng,
                                 params, observer);
}

std::size_t switching_policy_index(std::span<const LocalPolicy> policies, const ParticleBelief& b,
                                   const Pose& target)
{
    if (policies.empty()) {
        throw ValidationError("switching policy needs at least one local policy");
    }
    if (policies.size() == 1) {
        return 0;
    }
    std::vector<bool> eligible(policies.size(), true);
    bool any = false;
    for (std::size_t i = 0; i < policies.size(); ++i) {
        eligible[i] = !(policies[i].terminated && policies[i].terminated(b, target));
        any = any || eligible[i];
    }
    if (!any) {
        eligible.assign(policies.size(), true);
    }
    std::size_t best = policies.size();
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (!eligible[i]) {
            continue;
        }
        const double c = policies[i].expected_cost(b, target);
        if (best == policies.size() || c < best_cost) {
            best = i;
            best_cost = c;
        }
    }
    return best;
}

const LocalPolicy& switching_policy(std::span<const LocalPolicy> policies, const ParticleBelief& b,
                                    const Pose& target)
{
    return policies[switching_policy_index(policies, b, target)];
}

LocalPolicy make_entropy_policy(const ObjectModel& object, const PoseObservationModel& obs,
                                const EntropyPolicyParams& params)
{
    LocalPolicy policy;
    policy.name = "entropy";
    policy.action = [object, params](const ParticleBelief& b, const Pose& target) {
        return probe_from_mean(object, b, target, params.push, params.probe_depth);
    };
    policy.expected_cost = [object, obs, params, action = policy.action](const ParticleBelief& b,
                                                                         const Pose& target) {
        const PushAction touch = action(b, target);
        const auto next = propagate_all(b, object, touch);
        const int samples = std::max(1, params.observation_samples);
        double expected = 0.0;
        double cumulative = b.weights()[0];
        std::size_t j = 0;
        for (int k = 0; k < samples; ++k) {
            const double pointer = (k + 0.5) / samples;
            while (pointer > cumulative && j + 1 < b.size()) {
                ++j;
                cumulative += b.weights()[j];
            }
            const PoseObservation y{std::nullopt, next[j].in_contact};
            std::vector<double> w(b.size());
            double total = 0.0;
            for (std::size_t i = 0; i < b.size(); ++i) {
                w[i] = b.weights()[i] * obs.likelihood(y, next[i]);
                total += w[i];
            }
            expected += reweighted_entropy(b, std::move(w), total);
        }
        expected /= samples;
        return params.bits_weight * (expected - entropy(b));
    };
    policy.terminated = [params](const ParticleBelief& b, const Pose&) {
        return entropy(b) < params.entropy_floor;
    };
    return policy;
}

LocalPolicy make_goal_policy(const ObjectModel& object, const GoalPolicyParams& params)
{
    LocalPolicy policy;
    policy.name = "goal";
    const PoseCost cost = metric_cost(params.weights);
    policy.action = [object, params](const ParticleBelief& b, const Pose& target) {
        return probe_from_mean(object, b, target, params.push, params.max_push);
    };
    policy.expected_cost = [object, cost, action = policy.action](const ParticleBelief& b,
                                                                  const Pose& target) {
        const auto next = propagate_all(b, object, action(b, target));
        return expected_cost(b, target, cost, next) - expected_cost(b, target, cost, b.particles());
    };
    policy.terminated = [object, cost, params](const ParticleBelief& b, const Pose& target) {
        return cost(mean_state(b).object_pose, target) < params.epsilon;
    };
    return policy;
}

} // namespace porrt
