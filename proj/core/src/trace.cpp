#include "porrt/trace.hpp"

#include <fstream>
#include <ostream>

#include "json_io.hpp"
#include "porrt/errors.hpp"

namespace porrt {

namespace {

using nlohmann::json;
using detail::to_json;

json scene_json(const Scenario& s)
{
    json footprint = json::array();
    for (const Vec2& v : s.object.footprint()) {
        footprint.push_back(to_json(v));
    }
    return {{"object", {{"footprint", footprint}, {"com", to_json(s.object.com())}}},
            {"start", to_json(s.initial_pose)},
            {"goal", to_json(s.goal_pose)},
            {"workspace",
             {{"lower", {s.workspace.lower().x(), s.workspace.lower().y(), s.workspace.lower().z()}},
              {"upper", {s.workspace.upper().x(), s.workspace.upper().y(), s.workspace.upper().z()}}}},
            {"epsilon", s.planner.goal_tolerance}};
}

json belief_json(const BeliefSummary& b)
{
    return {{"mean", to_json(b.mean)},
            {"variance", {b.variance.x(), b.variance.y(), b.variance.z()}},
            {"entropy", b.entropy}};
}

} // namespace

void TraceWriter::header(const Scenario& scenario, std::uint64_t seed, const std::string& planner)
{
    json j = scene_json(scenario);
    j["type"] = "header";
    j["schema"] = 1;
    j["scenario"] = scenario.id;
    j["seed"] = seed;
    j["planner"] = planner;
    j["mode"] = to_string(scenario.mode);
    *out_ << j.dump() << '\n';
}

void TraceWriter::controller_round(int iter, const RoundStats& stats, const SegmentStep* accepted,
                                   const Pose& goal, const MetricWeights& weights)
{
    json j{{"type", "step"},
           {"iter", iter},
           {"round", stats.round},
           {"candidates", stats.candidates},
           {"discarded", stats.discarded},
           {"best_distance", stats.best_cost},
           {"accepted", accepted != nullptr}};
    if (accepted) {
        j["action"] = to_json(accepted->action);
        j["object_pose"] = to_json(accepted->state.object_pose);
        j["distance"] = pose_metric(accepted->state.object_pose, goal, weights);
    } else {
        j["action"] = nullptr;
        j["object_pose"] = nullptr;
        j["distance"] = nullptr;
    }
    *out_ << j.dump() << '\n';
}

void TraceWriter::stage(int stage, const std::string& policy, const PushAction& action,
                        const Pose& object_pose, double distance, const BeliefSummary& belief)
{
    const json j{{"type", "stage"},
                 {"stage", stage},
                 {"policy", policy},
                 {"action", to_json(action)},
                 {"object_pose", to_json(object_pose)},
                 {"distance", distance},
                 {"belief", belief_json(belief)}};
    *out_ << j.dump() << '\n';
}

void TraceWriter::result(bool success, double final_distance, int iterations, const Pose& final_pose,
                         const std::vector<PushAction>& plan)
{
    json actions = json::array();
    for (const PushAction& a : plan) {
        actions.push_back(to_json(a));
    }
    const json j{{"type", "result"},
                 {"success", success},
                 {"final_distance", final_distance},
                 {"iterations", iterations},
                 {"plan_length", plan.size()},
                 {"final_pose", to_json(final_pose)},
                 {"plan", actions}};
    *out_ << j.dump() << '\n';
}

std::string tree_to_json(const Tree& tree, const Scenario& scenario, int plan_node)
{
    json j = scene_json(scenario);
    j["schema"] = 1;
    j["type"] = "tree";
    j["scenario"] = scenario.id;
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes()) {
        json node{{"id", n.id},
                  {"parent", n.parent},
                  {"pose", to_json(n.state.object_pose)},
                  {"finger", to_json(n.state.finger_pos)}};
        if (n.belief) {
            node["belief"] = belief_json(*n.belief);
        }
        nodes.push_back(std::move(node));
    }
    json edges = json::array();
    for (const TreeEdge& e : tree.edges()) {
        json steps = json::array();
        for (const SegmentStep& s : e.segment.steps) {
            steps.push_back({{"action", to_json(s.action)},
                             {"pose", to_json(s.state.object_pose)},
                             {"cost", s.cost}});
        }
        edges.push_back({{"parent", e.parent},
                         {"child", e.child},
                         {"terminated_by", to_string(e.segment.terminated_by)},
                         {"target", to_json(e.segment.target)},
                         {"steps", steps}});
    }
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    j["plan_node"] = plan_node;
    return j.dump(1);
}

TraceResult read_trace_result(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot read trace file " + path.string());
    }
    TraceResult result;
    bool have_header = false;
    bool have_result = false;
    std::string line;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const json j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                result.start = detail::pose_from_json(j.at("start"));
                have_header = true;
            } else if (type == "result") {
                result.success = j.at("success").get<bool>();
                result.final_distance = j.at("final_distance").get<double>();
                result.final_pose = detail::pose_from_json(j.at("final_pose"));
                result.plan.clear();
                for (const json& a : j.at("plan")) {
                    result.plan.push_back(detail::action_from_json(a));
                }
                have_result = true;
            }
        }
    } catch (const json::exception& e) {
        throw FormatError("malformed trace " + path.string() + ": " + e.what());
    }
    if (!have_header || !have_result) {
        throw FormatError("trace " + path.string() + " lacks a header or result record");
    }
    return result;
}

} // namespace porrt
