#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "porrt/belief.hpp"
#include "porrt/controller.hpp"
#include "porrt/rrt.hpp"

namespace porrt {

enum class RunMode { Observable, Noisy };

const char* to_string(RunMode mode);
/// Throws ConfigurationError for anything but "observable" / "noisy".
RunMode parse_run_mode(const std::string& text);

/// Settings of the closed-loop belief-space execution used in noisy mode.
struct NoisySettings {
    int max_stages = 40;
    int replan_iters = 300;
    std::size_t particles = 500;
    PoseObservationModel observation;
    ParticleFilterConfig filter{0.5, 0.001, 0.005};
    EntropyPolicyParams entropy;
    GoalPolicyParams goal;
};

/// A planning problem loaded from a scenario file (JSON, `schema: 1`).
struct Scenario {
    std::string id;
    ObjectModel object;
    Pose initial_pose;
    Pose goal_pose;
    PoseBounds workspace;
    MetricWeights weights;
    PlannerParams planner;
    PushParams push;
    double clearance = 0.05;
    double max_push = 0.25;
    RunMode mode = RunMode::Observable;
    NoisySettings noisy;

    PlanningWorld world() const;
    WorldState initial_state() const;
};

/// Throws ConfigurationError naming the offending line or field.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

} // namespace porrt
