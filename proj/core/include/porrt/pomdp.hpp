#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "porrt/belief.hpp"

namespace porrt {

/// Finite POMDP <S, U, Y, tau, rho, psi> with discount gamma.
class PomdpModel {
public:
    /// reward(s, u). Throws ModelError on shape mismatch, ValidationError on
    /// rows that are not distributions or a discount outside [0, 1).
    PomdpModel(std::vector<std::string> states, std::vector<std::string> actions,
               std::vector<std::string> observations, TransitionTable trans,
               ObservationTable obs, Eigen::MatrixXd reward, double discount);

    /// Declarative JSON file with explicit tables; format described in the README.
    static PomdpModel load(const std::filesystem::path& path);
    static PomdpModel parse(const std::string& text);

    std::size_t num_states() const { return states_.size(); }
    std::size_t num_actions() const { return actions_.size(); }
    std::size_t num_observations() const { return observations_.size(); }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::string>& actions() const { return actions_; }
    const std::vector<std::string>& observations() const { return observations_; }
    const TransitionTable& transitions() const { return trans_; }
    const ObservationTable& observation_table() const { return obs_; }
    const Eigen::MatrixXd& rewards() const { return reward_; }
    double discount() const { return discount_; }

    /// R(b, u) = sum_s b(s) rho(s, u).
    double expected_reward(const DiscreteBelief& b, std::size_t action) const;
    /// Pr(y | b, u) for every observation y.
    std::vector<double> observation_distribution(const DiscreteBelief& b, std::size_t action) const;
    DiscreteBelief update(const DiscreteBelief& b, std::size_t action, std::size_t observation) const;

    std::size_t action_index(const std::string& name) const;
    std::size_t observation_index(const std::string& name) const;

private:
    void require_belief(const DiscreteBelief& b) const;

    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    std::vector<std::string> observations_;
    TransitionTable trans_;
    ObservationTable obs_;
    Eigen::MatrixXd reward_;
    double discount_;
};

/// Deterministic conditional plan: one action per node, one child per
/// observation below every internal node. Subtrees may be shared.
class PolicyTree {
public:
    struct Node {
        std::size_t action = 0;
        std::vector<int> children; ///< indexed by observation; empty at the last stage
    };

    PolicyTree() = default;
    PolicyTree(int horizon, int root, std::vector<Node> nodes);

    int horizon() const { return horizon_; }
    bool empty() const { return horizon_ == 0; }
    int root() const { return root_; }
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    std::size_t root_action() const { return node(root_).action; }
    std::size_t node_count() const { return nodes_.size(); }

    /// Checks that every root-to-leaf path has exactly `horizon` nodes and
    /// every internal node has `num_observations` children.
    bool well_formed(std::size_t num_observations) const;

private:
    int horizon_ = 0;
    int root_ = -1;
    std::vector<Node> nodes_;
};

/// pi(b, stage) -> probability of each action.
using StochasticPolicy = std::function<std::vector<double>(const DiscreteBelief&, int stage)>;

/// V^pi(b) by exact recursion over the tree. Throws ModelError on mismatched spaces.
double belief_value(const PomdpModel& model, const DiscreteBelief& b, const PolicyTree& policy);
/// V^pi(b) for a stochastic policy over `horizon` stages.
double belief_value(const PomdpModel& model, const DiscreteBelief& b, int horizon,
                    const StochasticPolicy& policy);

struct OptimalPolicy {
    PolicyTree tree;
    double value = 0.0;
};

inline constexpr std::size_t kDefaultNodeBudget = 1'000'000;

/// Exact finite-horizon argmax by enumeration with memoization on beliefs
/// rounded to 1e-12. Ties go to the lowest action index. Throws
/// CapacityError once more than `node_budget` belief nodes are expanded.
OptimalPolicy optimal_policy(const PomdpModel& model, const DiscreteBelief& b0, int horizon,
                             std::size_t node_budget = kDefaultNodeBudget);

/// Q*(b, u) = R(b, u) + gamma sum_y Pr(y | b, u) V*_{T-1}(tau_y(b, u)). Requires horizon >= 1.
double q_value(const PomdpModel& model, const DiscreteBelief& b, std::size_t action, int horizon,
               std::size_t node_budget = kDefaultNodeBudget);

struct BattleshipConfig {
    int cols = 3;
    int rows = 2;
    int ship_len = 2;
    double hit_reward = 1.0;
    double miss_reward = -0.1;
    double discount = 0.95;
};

/// Single-ship, one-sided Battleship. States are (placement, set of ship
/// cells already hit); actions are cells A1, B1, ... in row-major order;
/// observations are {hit, miss}. Shooting a cell observes whether the ship
/// covers it. Only a first hit on a ship cell earns `hit_reward`.
struct Battleship {
    BattleshipConfig config;
    std::vector<std::vector<std::size_t>> placements; ///< cell indices of each placement
    PomdpModel model;

    std::size_t num_cells() const { return static_cast<std::size_t>(config.cols * config.rows); }
    std::string cell_name(std::size_t cell) const;
    std::size_t cell_index(const std::string& name) const;
    std::string placement_name(std::size_t placement) const;

    /// Uniform over placements, nothing hit yet.
    DiscreteBelief initial_belief() const;
    /// Probability of each placement ("A2-B2" -> p), summed over hit sets.
    std::map<std::string, double> placement_marginal(const DiscreteBelief& b) const;

    static constexpr std::size_t kHit = 0;
    static constexpr std::size_t kMiss = 1;
};

/// Throws ValidationError if the ship does not fit the board.
Battleship make_battleship(const BattleshipConfig& config = {});
PomdpModel battleship_model(const BattleshipConfig& config = {});

} // namespace porrt
