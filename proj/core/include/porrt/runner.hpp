#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "porrt/scenario.hpp"

namespace porrt {

struct RunOverrides {
    bool baseline = false; ///< plain RRT instead of the controller-driven planner
    std::optional<RunMode> mode;
    std::optional<int> max_iters;
};

struct RunRecord {
    std::string scenario_id;
    std::uint64_t seed = 0;
    bool success = false;
    double final_distance = 0.0;
    int iterations = 0;
    double wall_time = 0.0; ///< seconds
    std::size_t plan_length = 0;
    std::filesystem::path trace_path;
    std::filesystem::path tree_path;
    std::string error; ///< set when the run could not be executed
};

/// PORRT_OUT_DIR if set, else "porrt_out".
std::filesystem::path default_output_dir();

/// Per-run output directory `<out_dir>/<id>_seed<seed>`.
std::filesystem::path run_directory(const std::filesystem::path& out_dir, const std::string& id,
                                    std::uint64_t seed);

/// Plans (observable) or executes closed-loop (noisy) and writes trace.jsonl,
/// tree.json and record.json into the run directory. Throws
/// ConfigurationError for unreadable or malformed scenarios.
RunRecord run_scenario(const Scenario& scenario, std::uint64_t seed, const RunOverrides& overrides,
                       const std::filesystem::path& out_dir);
RunRecord run_scenario(const std::filesystem::path& path, std::uint64_t seed,
                       const RunOverrides& overrides, const std::filesystem::path& out_dir);

struct ScenarioSummary {
    std::string scenario_id;
    int runs = 0;
    int successes = 0;
    int failed_to_run = 0;
    double success_rate = 0.0;
    double mean_final_distance = 0.0;
    double mean_iterations = 0.0;
};

struct BatchResult {
    std::vector<RunRecord> records; ///< ordered by scenario, then seed
    std::vector<ScenarioSummary> summaries;
};

/// Every scenario x seed, `jobs` runs at a time. A run that throws is
/// recorded with its error and the batch continues. Writes summary.json and
/// summary.txt into `out_dir`.
BatchResult run_batch(const std::vector<std::filesystem::path>& scenarios,
                      const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                      const RunOverrides& overrides = {}, unsigned jobs = 1);

/// `*.scenario` files in `dir`, sorted by name.
std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir);

std::string format_summary_table(const BatchResult& batch);

struct BattleshipDemo {
    std::map<std::string, double> posterior; ///< placements with non-zero mass
    std::vector<std::string> best_actions;   ///< sorted by cell name
    std::map<std::string, double> q_values;
    double value = 0.0;
};

/// Replays shots C2 (miss) and B2 (hit) on the 3 x 2 board, prints the
/// posterior and the set of optimal next shots for `horizon` stages.
BattleshipDemo battleship_demo(int horizon, std::ostream& out);

} // namespace porrt
