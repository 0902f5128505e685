#include "porrt/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "porrt/errors.hpp"

namespace porrt {

namespace {

constexpr double kRowTolerance = 1e-9;
constexpr double kTieTolerance = 1e-12;
constexpr double kMemoResolution = 1e12;

void require_rows_sum_to_one(const Eigen::MatrixXd& m, const std::string& what)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if ((m.row(r).array() < 0.0).any()) {
            throw ValidationError(what + " has a negative probability");
        }
        if (std::abs(m.row(r).sum() - 1.0) > kRowTolerance) {
            throw ValidationError(what + " row " + std::to_string(r) + " does not sum to 1");
        }
    }
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name,
                     const char* what)
{
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw LookupError(std::string("unknown ") + what + " '" + name + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& what)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw FormatError(what + ": expected " + std::to_string(rows) + " rows");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw FormatError(what + ": row " + std::to_string(r) + " needs " +
                              std::to_string(cols) + " entries");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

// Exact enumeration over (belief, remaining stages) with memoization.
class ExactSolver {
public:
    ExactSolver(const PomdpModel& model, std::size_t budget) : model_(model), budget_(budget) {}

    struct Result {
        double value;
        int node;
    };

    Result solve(const DiscreteBelief& b, int stages)
    {
        Key key{quantize(b), stages};
        if (const auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        if (++expanded_ > budget_) {
            throw CapacityError("exact POMDP solver exceeded its node budget of " +
                                std::to_string(budget_));
        }
        double best = -std::numeric_limits<double>::infinity();
        PolicyTree::Node best_node;
        for (std::size_t u = 0; u < model_.num_actions(); ++u) {
            PolicyTree::Node node;
            node.action = u;
            double q = model_.expected_reward(b, u);
            if (stages > 1) {
                const auto py = model_.observation_distribution(b, u);
                double future = 0.0;
                node.children.resize(py.size());
                for (std::size_t y = 0; y < py.size(); ++y) {
                    if (py[y] > 0.0) {
                        const Result child = solve(model_.update(b, u, y), stages - 1);
                        future += py[y] * child.value;
                        node.children[y] = child.node;
                    } else {
                        node.children[y] = filler(stages - 1);
                    }
                }
                q += model_.discount() * future;
            }
            if (q > best + kTieTolerance * std::max(1.0, std::abs(best)) || u == 0) {
                best = q;
                best_node = std::move(node);
            }
        }
        const int id = add(std::move(best_node));
        const Result result{best, id};
        memo_.emplace(std::move(key), result);
        return result;
    }

    PolicyTree tree(int horizon, int root) { return {horizon, root, std::move(nodes_)}; }

private:
    struct Key {
        std::vector<long long> belief;
        int stages;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const
        {
            std::size_t h = std::hash<int>{}(k.stages);
            for (long long v : k.belief) {
                h ^= std::hash<long long>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            }
            return h;
        }
    };

    static std::vector<long long> quantize(const DiscreteBelief& b)
    {
        std::vector<long long> q(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) {
            q[i] = std::llround(b[i] * kMemoResolution);
        }
        return q;
    }

    int add(PolicyTree::Node node)
    {
        nodes_.push_back(std::move(node));
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Placeholder subtree under observations that cannot occur.
    int filler(int stages)
    {
        if (const auto it = fillers_.find(stages); it != fillers_.end()) {
            return it->second;
        }
        PolicyTree::Node node;
        if (stages > 1) {
            node.children.assign(model_.num_observations(), filler(stages - 1));
        }
        const int id = add(std::move(node));
        fillers_.emplace(stages, id);
        return id;
    }

    const PomdpModel& model_;
    std::size_t budget_;
    std::size_t expanded_ = 0;
    std::vector<PolicyTree::Node> nodes_;
    std::unordered_map<Key, Result, KeyHash> memo_;
    std::unordered_map<int, int> fillers_;
};

double tree_value(const PomdpModel& model, const DiscreteBelief& b, const PolicyTree& tree, int id,
                  int stages)
{
    if (stages == 0) {
        return 0.0;
    }
    const auto& node = tree.node(id);
    if (node.action >= model.num_actions()) {
        throw ModelError("policy action outside the model's action set");
    }
    double v = model.expected_reward(b, node.action);
    if (stages > 1) {
        if (node.children.size() != model.num_observations()) {
            throw ModelError("policy node has the wrong number of observation branches");
        }
        const auto py = model.observation_distribution(b, node.action);
        double future = 0.0;
        for (std::size_t y = 0; y < py.size(); ++y) {
            if (py[y] > 0.0) {
                future += py[y] * tree_value(model, model.update(b, node.action, y), tree,
                                             node.children[y], stages - 1);
            }
        }
        v += model.discount() * future;
    }
    return v;
}

double stochastic_value(const PomdpModel& model, const DiscreteBelief& b, int stage, int horizon,
                        const StochasticPolicy& policy)
{
    if (stage >= horizon) {
        return 0.0;
    }
    const auto pu = policy(b, stage);
    if (pu.size() != model.num_actions()) {
        throw ModelError("stochastic policy returned the wrong number of action probabilities");
    }
    double v = 0.0;
    for (std::size_t u = 0; u < pu.size(); ++u) {
        if (pu[u] <= 0.0) {
            continue;
        }
        double q = model.expected_reward(b, u);
        if (stage + 1 < horizon) {
            const auto py = model.observation_distribution(b, u);
            double future = 0.0;
            for (std::size_t y = 0; y < py.size(); ++y) {
                if (py[y] > 0.0) {
                    future += py[y] * stochastic_value(model, model.update(b, u, y), stage + 1,
                                                       horizon, policy);
                }
            }
            q += model.discount() * future;
        }
        v += pu[u] * q;
    }
    return v;
}

} // namespace

PomdpModel::PomdpModel(std::vector<std::string> states, std::vector<std::string> actions,
                       std::vector<std::string> observations, TransitionTable trans,
                       ObservationTable obs, Eigen::MatrixXd reward, double discount)
    : states_(std::move(states)), actions_(std::move(actions)),
      observations_(std::move(observations)), trans_(std::move(trans)), obs_(std::move(obs)),
      reward_(std::move(reward)), discount_(discount)
{
    const auto ns = static_cast<Eigen::Index>(states_.size());
    const auto ny = static_cast<Eigen::Index>(observations_.size());
    if (states_.empty() || actions_.empty() || observations_.empty()) {
        throw ModelError("POMDP needs non-empty state, action and observation sets");
    }
    if (trans_.size() != actions_.size() || obs_.size() != actions_.size()) {
        throw ModelError("POMDP needs one transition and one observation table per action");
    }
    for (std::size_t u = 0; u < actions_.size(); ++u) {
        if (trans_[u].rows() != ns || trans_[u].cols() != ns) {
            throw ModelError("transition table for '" + actions_[u] + "' is not |S| x |S|");
        }
        if (obs_[u].rows() != ns || obs_[u].cols() != ny) {
            throw ModelError("observation table for '" + actions_[u] + "' is not |S| x |Y|");
        }
        require_rows_sum_to_one(trans_[u], "transition table for '" + actions_[u] + "'");
        require_rows_sum_to_one(obs_[u], "observation table for '" + actions_[u] + "'");
    }
    if (reward_.rows() != ns || reward_.cols() != static_cast<Eigen::Index>(actions_.size())) {
        throw ModelError("reward table is not |S| x |U|");
    }
    if (!(discount_ >= 0.0 && discount_ < 1.0)) {
        throw ValidationError("discount must lie in [0, 1)");
    }
}

PomdpModel PomdpModel::parse(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("POMDP file is not valid JSON: ") + e.what());
    }
    try {
        auto states = j.at("states").get<std::vector<std::string>>();
        auto actions = j.at("actions").get<std::vector<std::string>>();
        auto observations = j.at("observations").get<std::vector<std::string>>();
        const auto ns = static_cast<Eigen::Index>(states.size());
        const auto ny = static_cast<Eigen::Index>(observations.size());
        TransitionTable trans;
        ObservationTable obs;
        for (const auto& a : actions) {
            trans.push_back(matrix_from_json(j.at("transition").at(a), ns, ns, "transition." + a));
            obs.push_back(matrix_from_json(j.at("observation").at(a), ns, ny, "observation." + a));
        }
        Eigen::MatrixXd reward = matrix_from_json(j.at("reward"), ns,
                                                  static_cast<Eigen::Index>(actions.size()), "reward");
        return {std::move(states), std::move(actions), std::move(observations), std::move(trans),
                std::move(obs), std::move(reward), j.at("discount").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("POMDP file: ") + e.what());
    }
}

PomdpModel PomdpModel::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open POMDP file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void PomdpModel::require_belief(const DiscreteBelief& b) const
{
    if (b.size() != states_.size()) {
        throw ModelError("belief size does not match the POMDP state space");
    }
}

double PomdpModel::expected_reward(const DiscreteBelief& b, std::size_t action) const
{
    require_belief(b);
    double r = 0.0;
    for (std::size_t s = 0; s < b.size(); ++s) {
        r += b[s] * reward_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(action));
    }
    return r;
}

std::vector<double> PomdpModel::observation_distribution(const DiscreteBelief& b,
                                                         std::size_t action) const
{
    require_belief(b);
    const auto& t = trans_.at(action);
    const auto& o = obs_.at(action);
    const auto ns = static_cast<Eigen::Index>(states_.size());
    std::vector<double> py(observations_.size(), 0.0);
    for (Eigen::Index next = 0; next < ns; ++next) {
        double predicted = 0.0;
        for (Eigen::Index s = 0; s < ns; ++s) {
            predicted += t(s, next) * b[static_cast<std::size_t>(s)];
        }
        if (predicted == 0.0) {
            continue;
        }
        for (std::size_t y = 0; y < py.size(); ++y) {
            py[y] += o(next, static_cast<Eigen::Index>(y)) * predicted;
        }
    }
    return py;
}

DiscreteBelief PomdpModel::update(const DiscreteBelief& b, std::size_t action,
                                  std::size_t observation) const
{
    require_belief(b);
    return bayes_update(b, action, observation, trans_, obs_);
}

std::size_t PomdpModel::action_index(const std::string& name) const
{
    return index_of(actions_, name, "action");
}

std::size_t PomdpModel::observation_index(const std::string& name) const
{
    return index_of(observations_, name, "observation");
}

PolicyTree::PolicyTree(int horizon, int root, std::vector<Node> nodes)
    : horizon_(horizon), root_(root), nodes_(std::move(nodes))
{
}

bool PolicyTree::well_formed(std::size_t num_observations) const
{
    if (horizon_ == 0) {
        return true;
    }
    const std::function<bool(int, int)> check = [&](int id, int stages) {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
            return false;
        }
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (stages == 1) {
            return n.children.empty();
        }
        if (n.children.size() != num_observations) {
            return false;
        }
        return std::all_of(n.children.begin(), n.children.end(),
                           [&](int c) { return check(c, stages - 1); });
    };
    return check(root_, horizon_);
}

double belief_value(const PomdpModel& model, const DiscreteBelief& b, const PolicyTree& policy)
{
    if (b.size() != model.num_states()) {
        throw ModelError("belief size does not match the POMDP state space");
    }
    if (policy.empty()) {
        return 0.0;
    }
    return tree_value(model, b, policy, policy.root(), policy.horizon());
}

double belief_value(const PomdpModel& model, const DiscreteBelief& b, int horizon,
                    const StochasticPolicy& policy)
{
    if (b.size() != model.num_states()) {
        throw ModelError("belief size does not match the POMDP state space");
    }
    return stochastic_value(model, b, 0, horizon, policy);
}

OptimalPolicy optimal_policy(const PomdpModel& model, const DiscreteBelief& b0, int horizon,
                             std::size_t node_budget)
{
    if (b0.size() != model.num_states()) {
        throw ModelError("belief size does not match the POMDP state space");
    }
    if (horizon <= 0) {
        return {};
    }
    ExactSolver solver(model, node_budget);
    const auto result = solver.solve(b0, horizon);
    return {solver.tree(horizon, result.node), result.value};
}

double q_value(const PomdpModel& model, const DiscreteBelief& b, std::size_t action, int horizon,
               std::size_t node_budget)
{
    if (horizon < 1) {
        throw ValidationError("q_value needs a horizon of at least 1");
    }
    if (action >= model.num_actions()) {
        throw ModelError("action outside the model's action set");
    }
    double q = model.expected_reward(b, action);
    if (horizon > 1) {
        ExactSolver solver(model, node_budget);
        const auto py = model.observation_distribution(b, action);
        double future = 0.0;
        for (std::size_t y = 0; y < py.size(); ++y) {
            if (py[y] > 0.0) {
                future += py[y] * solver.solve(model.update(b, action, y), horizon - 1).value;
            }
        }
        q += model.discount() * future;
    }
    return q;
}

std::string Battleship::cell_name(std::size_t cell) const
{
    const auto cols = static_cast<std::size_t>(config.cols);
    std::string name(1, static_cast<char>('A' + cell % cols));
    name += std::to_string(cell / cols + 1);
    return name;
}

std::size_t Battleship::cell_index(const std::string& name) const
{
    for (std::size_t c = 0; c < num_cells(); ++c) {
        if (cell_name(c) == name) {
            return c;
        }
    }
    throw LookupError("unknown battleship cell '" + name + "'");
}

std::string Battleship::placement_name(std::size_t placement) const
{
    std::string name;
    for (std::size_t cell : placements.at(placement)) {
        if (!name.empty()) {
            name += '-';
        }
        name += cell_name(cell);
    }
    return name;
}

DiscreteBelief Battleship::initial_belief() const
{
    const std::size_t masks = std::size_t{1} << config.ship_len;
    std::vector<double> ps(placements.size() * masks, 0.0);
    for (std::size_t p = 0; p < placements.size(); ++p) {
        ps[p * masks] = 1.0 / static_cast<double>(placements.size());
    }
    return DiscreteBelief(std::move(ps));
}

std::map<std::string, double> Battleship::placement_marginal(const DiscreteBelief& b) const
{
    const std::size_t masks = std::size_t{1} << config.ship_len;
    std::map<std::string, double> marginal;
    for (std::size_t p = 0; p < placements.size(); ++p) {
        double mass = 0.0;
        for (std::size_t m = 0; m < masks; ++m) {
            mass += b[p * masks + m];
        }
        if (mass > 0.0) {
            marginal[placement_name(p)] = mass;
        }
    }
    return marginal;
}

Battleship make_battleship(const BattleshipConfig& config)
{
    if (config.cols <= 0 || config.rows <= 0 || config.ship_len <= 0 ||
        (config.ship_len > config.cols && config.ship_len > config.rows)) {
        throw ValidationError("battleship ship does not fit on the board");
    }
    if (config.ship_len > 16) {
        throw ValidationError("battleship ship length above 16 is not supported");
    }
    const auto cols = static_cast<std::size_t>(config.cols);
    const auto rows = static_cast<std::size_t>(config.rows);
    const auto len = static_cast<std::size_t>(config.ship_len);

    std::vector<std::vector<std::size_t>> placements;
    if (len <= cols) {
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c + len <= cols; ++c) {
                std::vector<std::size_t> cells;
                for (std::size_t k = 0; k < len; ++k) {
                    cells.push_back(r * cols + c + k);
                }
                placements.push_back(std::move(cells));
            }
        }
    }
    if (len <= rows && len > 1) {
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t r = 0; r + len <= rows; ++r) {
                std::vector<std::size_t> cells;
                for (std::size_t k = 0; k < len; ++k) {
                    cells.push_back((r + k) * cols + c);
                }
                placements.push_back(std::move(cells));
            }
        }
    }

    const std::size_t masks = std::size_t{1} << len;
    const std::size_t ns = placements.size() * masks;
    const std::size_t nu = cols * rows;

    Battleship game{config, placements,
                    PomdpModel({"s"}, {"u"}, {"hit", "miss"}, {Eigen::MatrixXd::Ones(1, 1)},
                               {Eigen::MatrixXd::Constant(1, 2, 0.5)}, Eigen::MatrixXd::Zero(1, 1),
                               0.0)};

    std::vector<std::string> state_names;
    for (std::size_t p = 0; p < placements.size(); ++p) {
        for (std::size_t m = 0; m < masks; ++m) {
            std::string name = game.placement_name(p) + "|";
            for (std::size_t k = 0; k < len; ++k) {
                if (m & (std::size_t{1} << k)) {
                    name += game.cell_name(placements[p][k]);
                }
            }
            state_names.push_back(std::move(name));
        }
    }
    std::vector<std::string> action_names;
    for (std::size_t c = 0; c < nu; ++c) {
        action_names.push_back(game.cell_name(c));
    }

    TransitionTable trans(nu, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns),
                                                    static_cast<Eigen::Index>(ns)));
    ObservationTable obs(nu, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), 2));
    Eigen::MatrixXd reward(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nu));
    for (std::size_t p = 0; p < placements.size(); ++p) {
        const auto& cells = placements[p];
        for (std::size_t m = 0; m < masks; ++m) {
            const auto s = static_cast<Eigen::Index>(p * masks + m);
            for (std::size_t u = 0; u < nu; ++u) {
                const auto it = std::find(cells.begin(), cells.end(), u);
                const bool on_ship = it != cells.end();
                const std::size_t bit =
                    on_ship ? std::size_t{1} << static_cast<std::size_t>(it - cells.begin()) : 0;
                const auto next = static_cast<Eigen::Index>(p * masks + (m | bit));
                const auto ui = static_cast<Eigen::Index>(u);
                trans[u](s, next) = 1.0;
                obs[u](s, on_ship ? Battleship::kHit : Battleship::kMiss) = 1.0;
                reward(s, ui) = (on_ship && !(m & bit)) ? config.hit_reward : config.miss_reward;
            }
        }
    }
    game.model = PomdpModel(std::move(state_names), std::move(action_names), {"hit", "miss"},
                            std::move(trans), std::move(obs), std::move(reward), config.discount);
    return game;
}

PomdpModel battleship_model(const BattleshipConfig& config)
{
    return make_battleship(config).model;
}

} // namespace porrt
