#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "porrt/belief.hpp"
#include "porrt/controller.hpp"
#include "porrt/rrt.hpp"
#include "porrt/scenario.hpp"

namespace porrt {

/// JSON Lines trace: a header record, one record per controller round (or
/// belief-space stage), and a closing result record carrying the executed
/// plan. Output depends only on its inputs, so identical runs give
/// byte-identical files.
class TraceWriter {
public:
    explicit TraceWriter(std::ostream& out) : out_(&out) {}

    void header(const Scenario& scenario, std::uint64_t seed, const std::string& planner);
    void controller_round(int iter, const RoundStats& stats, const SegmentStep* accepted,
                          const Pose& goal, const MetricWeights& weights);
    void stage(int stage, const std::string& policy, const PushAction& action,
               const Pose& object_pose, double distance, const BeliefSummary& belief);
    void result(bool success, double final_distance, int iterations, const Pose& final_pose,
                const std::vector<PushAction>& plan);

private:
    std::ostream* out_;
};

/// Whole tree plus the scene needed to draw it.
std::string tree_to_json(const Tree& tree, const Scenario& scenario, int plan_node);

/// Plan and final pose stored in a trace's result record.
struct TraceResult {
    Pose start;
    Pose final_pose;
    bool success = false;
    double final_distance = 0.0;
    std::vector<PushAction> plan;
};

/// Throws FormatError on unreadable input or a missing result record.
TraceResult read_trace_result(const std::filesystem::path& path);

} // namespace porrt
