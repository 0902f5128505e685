#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "porrt/belief.hpp"
#include "porrt/controller.hpp"
#include "porrt/dynamics.hpp"
#include "porrt/geometry.hpp"

namespace porrt {

struct PlannerParams {
    int max_iters = 3000;
    double goal_tolerance = 0.02;
    double goal_bias = 0.1;
    int actions_per_extend = 32;
    int controller_rounds = 10;
    std::uint64_t rng_seed = 0;
    /// Extensions closer than this to their parent are not added.
    double min_progress = 1e-6;

    /// Throws ValidationError unless K >= 0, epsilon > 0, bias in [0, 1],
    /// actions_per_extend >= 1 and controller_rounds >= 1.
    void validate() const;
};

/// Everything about the world the planners need besides the start state.
struct PlanningWorld {
    ObjectModel object;
    PoseBounds workspace;
    MetricWeights weights;
    PushParams push;
    double clearance = 0.05;
    double max_push = 0.25;
};

struct TreeNode {
    int id = 0;
    int parent = -1;
    WorldState state;
    std::optional<BeliefSummary> belief;
};

struct TreeEdge {
    int parent = 0;
    int child = 0;
    PolicySegment segment;
};

/// Rooted tree over world states. Edge i leads to node i + 1.
class Tree {
public:
    explicit Tree(const WorldState& root);

    int root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const std::vector<TreeEdge>& edges() const { return edges_; }
    /// Throws LookupError for unknown ids.
    const TreeNode& node(int id) const;
    /// Edge ending at `child`. Throws LookupError for the root or unknown ids.
    const TreeEdge& edge_to(int child) const;

    /// Requires a non-empty segment whose last state becomes the new node.
    int add(int parent, PolicySegment segment);

private:
    std::vector<TreeNode> nodes_;
    std::vector<TreeEdge> edges_;
};

struct PlanResult {
    Tree tree;
    bool success = false;
    int goal_node = -1;
    int best_node = 0;     ///< node closest to the goal
    double best_cost = 0.0;
    int iterations = 0;
    std::vector<PushAction> plan; ///< root-to-goal actions on success
};

/// Called once per controller round: (iteration, round stats, accepted step or null).
using PlannerObserver = std::function<void(int, const RoundStats&, const SegmentStep*)>;

/// Closest node under the pose metric; lowest id on ties.
int nearest_neighbour(const Tree& tree, const Pose& x, const MetricWeights& weights);

/// Classic RRT: each extension is one straight-line push toward the sample.
PlanResult build_rrt(const WorldState& init, const PlannerParams& params, const PlanningWorld& world,
                     const Pose& goal, const PlannerObserver& observer = {});

/// RRT whose extensions are policy segments from the adaptive controller.
PlanResult build_porrt(const WorldState& init, const PlannerParams& params,
                       const PlanningWorld& world, const Pose& goal,
                       const PlannerObserver& observer = {});

/// Actions along the path root -> node. Throws LookupError for unknown ids.
std::vector<PushAction> extract_plan(const Tree& tree, int node);

/// Final state after executing `plan` from `start` with the forward model.
WorldState replay_plan(const WorldState& start, const ObjectModel& object,
                       const std::vector<PushAction>& plan);

} // namespace porrt
