#include "porrt/rrt.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "porrt/errors.hpp"

namespace porrt {

namespace {

ControllerParams controller_params(const PlannerParams& params, const PlanningWorld& world)
{
    ControllerParams c;
    c.candidates = params.actions_per_extend;
    c.clearance = world.clearance;
    c.max_push = world.max_push;
    c.push = world.push;
    c.workspace = world.workspace;
    return c;
}

Pose draw_target(const PlannerParams& params, const PlanningWorld& world, const Pose& goal, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (params.goal_bias > 0.0 && unit(rng) < params.goal_bias) {
        return goal;
    }
    return sample_pose_uniform(world.workspace, rng);
}

// Shared RRT skeleton; `extend` grows a segment from the nearest node.
template <typename Extend>
PlanResult grow(const WorldState& init, const PlannerParams& params, const PlanningWorld& world,
                const Pose& goal, Extend&& extend)
{
    params.validate();
    PlanResult result{Tree(init), false, -1, 0, 0.0, 0, {}};
    result.best_cost = pose_metric(init.object_pose, goal, world.weights);
    if (result.best_cost < params.goal_tolerance) {
        result.success = true;
        result.goal_node = 0;
        return result;
    }
    Rng rng(params.rng_seed);
    for (int k = 1; k <= params.max_iters; ++k) {
        result.iterations = k;
        const Pose target = draw_target(params, world, goal, rng);
        const int near = nearest_neighbour(result.tree, target, world.weights);
        const WorldState& near_state = result.tree.node(near).state;
        PolicySegment segment = extend(k, near_state, target, rng);
        if (segment.empty()) {
            continue;
        }
        const WorldState& new_state = segment.steps.back().state;
        if (pose_metric(new_state.object_pose, near_state.object_pose, world.weights) <= params.min_progress) {
            continue;
        }
        const int id = result.tree.add(near, std::move(segment));
        const double to_goal = pose_metric(result.tree.node(id).state.object_pose, goal, world.weights);
        if (to_goal < result.best_cost) {
            result.best_cost = to_goal;
            result.best_node = id;
        }
        if (to_goal < params.goal_tolerance) {
            result.success = true;
            result.goal_node = id;
            result.plan = extract_plan(result.tree, id);
            return result;
        }
    }
    return result;
}

} // namespace

void PlannerParams::validate() const
{
    if (max_iters < 0) {
        throw ValidationError("planner max_iters must be non-negative");
    }
    if (!(goal_tolerance > 0.0)) {
        throw ValidationError("planner goal_tolerance must be positive");
    }
    if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) {
        throw ValidationError("planner goal_bias must lie in [0, 1]");
    }
    if (actions_per_extend < 1 || controller_rounds < 1) {
        throw ValidationError("planner actions_per_extend and controller_rounds must be >= 1");
    }
}

Tree::Tree(const WorldState& root)
{
    nodes_.push_back({0, -1, root, std::nullopt});
}

const TreeNode& Tree::node(int id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw LookupError("unknown tree node " + std::to_string(id));
    }
    return nodes_[static_cast<std::size_t>(id)];
}

const TreeEdge& Tree::edge_to(int child) const
{
    if (child <= 0 || static_cast<std::size_t>(child) >= nodes_.size()) {
        throw LookupError("no edge leads to node " + std::to_string(child));
    }
    return edges_[static_cast<std::size_t>(child - 1)];
}

int Tree::add(int parent, PolicySegment segment)
{
    node(parent);
    if (segment.empty()) {
        throw ValidationError("tree edges need at least one action");
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({id, parent, segment.steps.back().state, std::nullopt});
    edges_.push_back({parent, id, std::move(segment)});
    return id;
}

int nearest_neighbour(const Tree& tree, const Pose& x, const MetricWeights& weights)
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const TreeNode& n : tree.nodes()) {
        const double d = pose_metric(n.state.object_pose, x, weights);
        if (d < best_d) {
            best_d = d;
            best = n.id;
        }
    }
    return best;
}

PlanResult build_rrt(const WorldState& init, const PlannerParams& params, const PlanningWorld& world,
                     const Pose& goal, const PlannerObserver& observer)
{
    return grow(init, params, world, goal,
                [&](int k, const WorldState& near_state, const Pose& target, Rng&) {
                    PolicySegment segment;
                    segment.target = target;
                    PushAction action;
                    try {
                        action = finger_line_action(near_state, world.object, target, world.push);
                    } catch (const DegenerateDirectionError&) {
                        return segment;
                    }
                    const double distance = (posed_com(world.object, target) -
                                             posed_com(world.object, near_state.object_pose))
                                                .norm();
                    action.travel -= std::max(0.0, distance - world.max_push);
                    const PushResult pushed = simulate_push(near_state, world.object, action);
                    const bool inside =
                        world.workspace.contains_xy(posed_com(world.object, pushed.state.object_pose));
                    const double c = pose_metric(pushed.state.object_pose, target, world.weights);
                    if (inside) {
                        segment.steps.push_back({action, pushed.state, c});
                        segment.terminated_by = Termination::BudgetExhausted;
                    }
                    if (observer) {
                        const RoundStats stats{1, 1, inside ? 0 : 1, c, inside};
                        observer(k, stats, inside ? &segment.steps.back() : nullptr);
                    }
                    return segment;
                });
}

PlanResult build_porrt(const WorldState& init, const PlannerParams& params,
                       const PlanningWorld& world, const Pose& goal, const PlannerObserver& observer)
{
    const ControllerParams controller = controller_params(params, world);
    const PoseCost cost = metric_cost(world.weights);
    return grow(init, params, world, goal,
                [&](int k, const WorldState& near_state, const Pose& target, Rng& rng) {
                    RoundObserver round_observer;
                    if (observer) {
                        round_observer = [&](const RoundStats& s, const SegmentStep* step) {
                            observer(k, s, step);
                        };
                    }
                    return select_control_policy(near_state, target, params.controller_rounds,
                                                 params.goal_tolerance, world.object, cost, rng,
                                                 controller, round_observer);
                });
}

std::vector<PushAction> extract_plan(const Tree& tree, int node)
{
    tree.node(node);
    std::vector<const TreeEdge*> path;
    for (int id = node; id != tree.root(); id = tree.node(id).parent) {
        path.push_back(&tree.edge_to(id));
    }
    std::vector<PushAction> plan;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        for (const SegmentStep& step : (*it)->segment.steps) {
            plan.push_back(step.action);
        }
    }
    return plan;
}

WorldState replay_plan(const WorldState& start, const ObjectModel& object,
                       const std::vector<PushAction>& plan)
{
    WorldState s = start;
    for (const PushAction& a : plan) {
        s = simulate_push(s, object, a).state;
    }
    return s;
}

} // namespace porrt
