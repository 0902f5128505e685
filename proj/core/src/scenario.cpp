#include "porrt/scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "porrt/errors.hpp"

namespace porrt {

namespace {

using nlohmann::json;

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const
    {
        throw ConfigurationError(source_ + ": field '" + field + "' " + what);
    }

    const json& require(const json& obj, const std::string& key, const std::string& path) const
    {
        if (!obj.is_object() || !obj.contains(key)) {
            fail(path, "is missing");
        }
        return obj.at(key);
    }

    double number(const json& obj, const std::string& key, const std::string& path,
                  double fallback) const
    {
        if (!obj.is_object() || !obj.contains(key)) {
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(path, "must be a number");
        }
        return v.get<double>();
    }

    int integer(const json& obj, const std::string& key, const std::string& path,
                int fallback) const
    {
        if (!obj.is_object() || !obj.contains(key)) {
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(path, "must be an integer");
        }
        return v.get<int>();
    }

    std::vector<double> numbers(const json& v, const std::string& path, std::size_t count) const
    {
        if (!v.is_array() || v.size() != count) {
            fail(path, "must be an array of " + std::to_string(count) + " numbers");
        }
        std::vector<double> out;
        for (const json& x : v) {
            if (!x.is_number()) {
                fail(path, "must contain only numbers");
            }
            out.push_back(x.get<double>());
        }
        return out;
    }

    Pose pose(const json& v, const std::string& path) const
    {
        const auto values = numbers(v, path, 7);
        try {
            return Pose::from_array(values);
        } catch (const ValidationError& e) {
            fail(path, e.what());
        }
    }

    Vec2 vec2(const json& v, const std::string& path) const
    {
        const auto values = numbers(v, path, 2);
        return {values[0], values[1]};
    }

    Vec3 vec3(const json& v, const std::string& path) const
    {
        const auto values = numbers(v, path, 3);
        return {values[0], values[1], values[2]};
    }

private:
    std::string source_;
};

const json& section(const json& root, const char* key)
{
    static const json empty = json::object();
    return root.contains(key) ? root.at(key) : empty;
}

} // namespace

const char* to_string(RunMode mode)
{
    return mode == RunMode::Noisy ? "noisy" : "observable";
}

RunMode parse_run_mode(const std::string& text)
{
    if (text == "observable") {
        return RunMode::Observable;
    }
    if (text == "noisy") {
        return RunMode::Noisy;
    }
    throw ConfigurationError("mode must be 'observable' or 'noisy', got '" + text + "'");
}

PlanningWorld Scenario::world() const
{
    return {object, workspace, weights, push, clearance, max_push};
}

WorldState Scenario::initial_state() const
{
    WorldState s;
    s.object_pose = initial_pose;
    s.finger_pos = posed_com(object, initial_pose) -
                   (object.circumradius() + clearance) * Vec2::UnitX();
    s.in_contact = false;
    return s;
}

Scenario parse_scenario(const std::string& text, const std::string& source)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(source + ": malformed JSON: " + e.what());
    }
    const Reader r(source);
    if (!root.is_object()) {
        r.fail("<root>", "must be a JSON object");
    }
    if (r.integer(root, "schema", "schema", -1) != 1) {
        if (!root.contains("schema")) {
            r.fail("schema", "is missing");
        }
        r.fail("schema", "must be 1");
    }

    const json& obj = r.require(root, "object", "object");
    const json& fp = r.require(obj, "footprint", "object.footprint");
    if (!fp.is_array() || fp.size() < 3) {
        r.fail("object.footprint", "must list at least 3 [x, y] vertices");
    }
    std::vector<Vec2> footprint;
    for (std::size_t i = 0; i < fp.size(); ++i) {
        footprint.push_back(r.vec2(fp[i], "object.footprint[" + std::to_string(i) + "]"));
    }
    const Vec2 com = obj.contains("com") ? r.vec2(obj.at("com"), "object.com") : Vec2::Zero();
    std::optional<ObjectModel> object;
    try {
        object.emplace(std::move(footprint), com, r.number(obj, "friction_mu", "object.friction_mu", 0.5),
                       r.number(obj, "contact_mu", "object.contact_mu", 0.3));
    } catch (const ValidationError& e) {
        r.fail("object", e.what());
    }

    const Pose initial = r.pose(r.require(root, "initial_pose", "initial_pose"), "initial_pose");
    const Pose goal = r.pose(r.require(root, "goal_pose", "goal_pose"), "goal_pose");

    const json& ws = r.require(root, "workspace", "workspace");
    std::optional<PoseBounds> workspace;
    try {
        workspace.emplace(r.vec3(r.require(ws, "lower", "workspace.lower"), "workspace.lower"),
                          r.vec3(r.require(ws, "upper", "workspace.upper"), "workspace.upper"),
                          r.number(ws, "z", "workspace.z", 0.0));
    } catch (const ValidationError& e) {
        r.fail("workspace", e.what());
    }
    if (!workspace->contains(initial)) {
        r.fail("initial_pose", "lies outside the workspace bounds");
    }
    if (!workspace->contains(goal)) {
        r.fail("goal_pose", "lies outside the workspace bounds");
    }

    const json& metric = section(root, "metric");
    std::optional<MetricWeights> weights;
    try {
        const double alpha = r.number(metric, "alpha", "metric.alpha", 0.5);
        weights.emplace(alpha, r.number(metric, "beta", "metric.beta", 1.0 - alpha));
    } catch (const ValidationError& e) {
        r.fail("metric", e.what());
    }

    Scenario s{r.require(root, "id", "id").is_string() ? root.at("id").get<std::string>() : "",
               std::move(*object),
               initial,
               goal,
               *workspace,
               *weights,
               {},
               {},
               0.05,
               0.25,
               RunMode::Observable,
               {}};
    if (s.id.empty()) {
        r.fail("id", "must be a non-empty string");
    }

    const json& planner = section(root, "planner");
    s.planner.max_iters = r.integer(planner, "max_iters", "planner.max_iters", 3000);
    s.planner.goal_tolerance = r.number(planner, "goal_tolerance", "planner.goal_tolerance", 0.02);
    s.planner.goal_bias = r.number(planner, "goal_bias", "planner.goal_bias", 0.1);
    s.planner.actions_per_extend =
        r.integer(planner, "actions_per_extend", "planner.actions_per_extend", 32);
    s.planner.controller_rounds =
        r.integer(planner, "controller_rounds", "planner.controller_rounds", 10);
    try {
        s.planner.validate();
    } catch (const ValidationError& e) {
        r.fail("planner", e.what());
    }

    const json& push = section(root, "push");
    s.push.step_forward = r.number(push, "step_forward", "push.step_forward", 0.002);
    s.push.step_back = r.number(push, "step_back", "push.step_back", 0.05);
    s.push.contact_threshold = r.number(push, "contact_threshold", "push.contact_threshold", 0.001);
    s.clearance = r.number(push, "clearance", "push.clearance", 0.05);
    s.max_push = r.number(push, "max_push", "push.max_push", 0.25);
    if (!(s.push.step_forward > 0.0) || !(s.push.step_back > 0.0) ||
        !(s.push.contact_threshold > 0.0) || !(s.clearance > 0.0) || !(s.max_push > 0.0)) {
        r.fail("push", "lengths must be positive");
    }
    if (s.push.step_forward >= s.object.min_edge_length()) {
        r.fail("push.step_forward", "must be smaller than the shortest footprint edge");
    }

    if (root.contains("mode")) {
        if (!root.at("mode").is_string()) {
            r.fail("mode", "must be a string");
        }
        try {
            s.mode = parse_run_mode(root.at("mode").get<std::string>());
        } catch (const ConfigurationError& e) {
            r.fail("mode", e.what());
        }
    }

    const json& observation = section(root, "observation");
    s.noisy.observation.sigma_t = r.number(observation, "sigma_t", "observation.sigma_t", 0.005);
    s.noisy.observation.sigma_r = r.number(observation, "sigma_r", "observation.sigma_r", 0.02);
    s.noisy.observation.contact_error =
        r.number(observation, "contact_error", "observation.contact_error", 0.05);
    try {
        s.noisy.observation.validate();
    } catch (const ValidationError& e) {
        r.fail("observation", e.what());
    }
    const int particles = r.integer(root, "particles", "particles", 500);
    if (particles < 1) {
        r.fail("particles", "must be at least 1");
    }
    s.noisy.particles = static_cast<std::size_t>(particles);

    const json& noisy = section(root, "noisy");
    s.noisy.max_stages = r.integer(noisy, "max_stages", "noisy.max_stages", 40);
    s.noisy.replan_iters = r.integer(noisy, "replan_iters", "noisy.replan_iters", 300);
    s.noisy.entropy.bits_weight = r.number(noisy, "bits_weight", "noisy.bits_weight", 0.01);
    s.noisy.entropy.entropy_floor = r.number(noisy, "entropy_floor", "noisy.entropy_floor", 1.0);
    s.noisy.goal.max_push = r.number(noisy, "stage_push", "noisy.stage_push", 0.05);
    s.noisy.entropy.push = s.push;
    s.noisy.goal.push = s.push;
    s.noisy.goal.weights = s.weights;
    s.noisy.goal.epsilon = s.planner.goal_tolerance;
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigurationError("cannot read scenario file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

} // namespace porrt
