// porrt: plan, batch-evaluate and render pushing scenarios.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "porrt/errors.hpp"
#include "porrt/runner.hpp"
#include "porrt/svg.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPlanningFailure = 2;

std::vector<std::uint64_t> parse_seeds(const std::string& text)
{
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            return {std::stoull(text)};
        }
        const std::uint64_t a = std::stoull(text.substr(0, dots));
        const std::uint64_t b = std::stoull(text.substr(dots + 2));
        if (b < a) {
            throw porrt::ConfigurationError("seed range '" + text + "' is empty");
        }
        std::vector<std::uint64_t> out;
        for (std::uint64_t s = a; s <= b; ++s) {
            out.push_back(s);
        }
        return out;
    } catch (const std::logic_error&) {
        throw porrt::ConfigurationError("seeds must look like N or A..B, got '" + text + "'");
    }
}

porrt::RunOverrides overrides_from(bool baseline, const std::string& mode)
{
    porrt::RunOverrides o;
    o.baseline = baseline;
    if (!mode.empty()) {
        o.mode = porrt::parse_run_mode(mode);
    }
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pushing-manipulation planner (RRT / PORRT)"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::uint64_t seed = 0;
    bool baseline = false;
    std::string mode;
    std::string out_dir;
    std::optional<int> max_iters;
    auto* plan = app.add_subcommand("plan", "Plan one scenario and write trace/tree files");
    plan->add_option("scenario", scenario_path, "Scenario file")->required();
    plan->add_option("--seed", seed, "Random seed");
    plan->add_flag("--baseline", baseline, "Use plain RRT instead of PORRT");
    plan->add_option("--mode", mode, "observable or noisy")->check(CLI::IsMember({"observable", "noisy"}));
    plan->add_option("--out", out_dir, "Output directory (default $PORRT_OUT_DIR or porrt_out)");
    plan->add_option("--max-iters", max_iters, "Override the planner iteration budget");

    std::string batch_dir;
    std::string seeds = "0..19";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* batch = app.add_subcommand("batch", "Run every *.scenario in a directory over a seed range");
    batch->add_option("dir", batch_dir, "Scenario directory")->required();
    batch->add_option("--seeds", seeds, "Seed or inclusive range A..B");
    batch->add_flag("--baseline", baseline, "Use plain RRT instead of PORRT");
    batch->add_option("--mode", mode, "observable or noisy")->check(CLI::IsMember({"observable", "noisy"}));
    batch->add_option("--out", out_dir, "Output directory (default $PORRT_OUT_DIR or porrt_out)");
    batch->add_option("--jobs", jobs, "Parallel runs");
    batch->add_option("--max-iters", max_iters, "Override the planner iteration budget");

    std::string render_input;
    std::string render_output;
    auto* render = app.add_subcommand("render", "Render a tree or trace file as SVG");
    render->add_option("file", render_input, "tree.json or trace.jsonl")->required();
    render->add_option("--out", render_output, "Output SVG path")->required();

    int horizon = 1;
    auto* battleship = app.add_subcommand("battleship", "Replay the 3x2 Battleship example");
    battleship->add_option("--horizon", horizon, "Planning horizon")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        const std::filesystem::path out = out_dir.empty() ? porrt::default_output_dir()
                                                          : std::filesystem::path(out_dir);
        if (*plan) {
            porrt::RunOverrides o = overrides_from(baseline, mode);
            o.max_iters = max_iters;
            const porrt::RunRecord r = porrt::run_scenario(scenario_path, seed, o, out);
            std::cout << r.scenario_id << " seed " << r.seed << ": "
                      << (r.success ? "success" : "failure") << ", final distance " << r.final_distance
                      << ", " << r.iterations << " iterations, " << r.plan_length << " pushes, "
                      << r.wall_time << " s\n"
                      << "trace " << r.trace_path.string() << "\ntree " << r.tree_path.string()
                      << '\n';
            return r.success ? kOk : kPlanningFailure;
        }
        if (*batch) {
            porrt::RunOverrides o = overrides_from(baseline, mode);
            o.max_iters = max_iters;
            const auto result =
                porrt::run_batch(porrt::list_scenarios(batch_dir), parse_seeds(seeds), out, o, jobs);
            std::cout << porrt::format_summary_table(result);
            for (const auto& r : result.records) {
                if (!r.error.empty()) {
                    std::cerr << r.scenario_id << " seed " << r.seed << ": " << r.error << '\n';
                }
            }
            std::cout << "summary " << (out / "summary.json").string() << '\n';
            return kOk;
        }
        if (*render) {
            porrt::render_svg(render_input, render_output);
            return kOk;
        }
        if (*battleship) {
            porrt::battleship_demo(horizon, std::cout);
            return kOk;
        }
    } catch (const porrt::ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const porrt::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kOk;
}
