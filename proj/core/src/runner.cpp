#include "porrt/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "porrt/errors.hpp"
#include "porrt/pomdp.hpp"
#include "porrt/trace.hpp"

namespace porrt {

namespace {

using nlohmann::json;

// An approach point inside the object means the finger already touches it:
// the push is skipped and the contact sensor fires.
WorldState execute(const WorldState& s, const ObjectModel& object, const PushAction& action)
{
    try {
        return simulate_push(s, object, action).state;
    } catch (const ValidationError&) {
        WorldState same = s;
        same.in_contact = true;
        return same;
    }
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write " + path.string());
    }
    out << text;
}

json record_json(const RunRecord& r)
{
    json j{{"scenario", r.scenario_id},
           {"seed", r.seed},
           {"success", r.success},
           {"final_distance", r.final_distance},
           {"iterations", r.iterations},
           {"wall_time", r.wall_time},
           {"plan_length", r.plan_length},
           {"trace", r.trace_path.string()},
           {"tree", r.tree_path.string()}};
    if (!r.error.empty()) {
        j["error"] = r.error;
    }
    return j;
}

struct Outcome {
    Tree tree;
    int plan_node = -1;
    int iterations = 0;
    Pose final_pose;
    std::vector<PushAction> plan;
};

Outcome plan_observable(const Scenario& scenario, std::uint64_t seed, bool baseline,
                        TraceWriter& trace)
{
    PlannerParams params = scenario.planner;
    params.rng_seed = seed;
    const PlanningWorld world = scenario.world();
    const WorldState start = scenario.initial_state();
    const PlannerObserver observer = [&](int iter, const RoundStats& stats, const SegmentStep* step) {
        trace.controller_round(iter, stats, step, scenario.goal_pose, scenario.weights);
    };
    PlanResult result = baseline ? build_rrt(start, params, world, scenario.goal_pose, observer)
                                 : build_porrt(start, params, world, scenario.goal_pose, observer);
    const int node = result.success ? result.goal_node : result.best_node;
    std::vector<PushAction> plan = extract_plan(result.tree, node);
    const Pose final_pose = replay_plan(start, scenario.object, plan).object_pose;
    return {std::move(result.tree), node, result.iterations, final_pose, std::move(plan)};
}

Outcome execute_noisy(const Scenario& scenario, std::uint64_t seed, bool baseline, TraceWriter& trace)
{
    const NoisySettings& cfg = scenario.noisy;
    const PlanningWorld world = scenario.world();
    const ObjectModel& object = scenario.object;
    Rng noise(seed);
    WorldState truth = scenario.initial_state();

    const PoseObservation first = cfg.observation.sample(truth, noise);
    WorldState guess = truth;
    guess.object_pose = first.pose.value_or(truth.object_pose);
    ParticleBelief belief = ParticleBelief::gaussian(guess, cfg.observation.sigma_t,
                                                     cfg.observation.sigma_r, cfg.particles, noise());
    const ForwardModel sim = [&object](const WorldState& s, const PushAction& a) {
        return execute(s, object, a);
    };
    const std::vector<LocalPolicy> policies{make_entropy_policy(object, cfg.observation, cfg.entropy),
                                            make_goal_policy(object, cfg.goal)};

    Outcome out{Tree(truth), 0, 0, truth.object_pose, {}};
    for (int stage = 1; stage <= cfg.max_stages; ++stage) {
        const WorldState mean = mean_state(belief);
        if (pose_metric(mean.object_pose, scenario.goal_pose, scenario.weights) <
            scenario.planner.goal_tolerance) {
            break;
        }
        out.iterations = stage;
        const std::size_t chosen = switching_policy_index(policies, belief, scenario.goal_pose);
        PushAction action = policies[chosen].action(belief, scenario.goal_pose);
        if (policies[chosen].name == "goal") {
            // Replan from the belief mean and commit to the first push only.
            PlannerParams params = scenario.planner;
            params.max_iters = cfg.replan_iters;
            params.rng_seed = seed * 1000003u + static_cast<std::uint64_t>(stage);
            const PlanResult replan = baseline
                                          ? build_rrt(mean, params, world, scenario.goal_pose)
                                          : build_porrt(mean, params, world, scenario.goal_pose);
            const int node = replan.success ? replan.goal_node : replan.best_node;
            const auto plan = extract_plan(replan.tree, node);
            if (!plan.empty()) {
                action = plan.front();
            }
        }
        const WorldState next = execute(truth, object, action);
        const PoseObservation y = cfg.observation.sample(next, noise);
        try {
            belief = particle_update(belief, action, y, sim, cfg.observation, cfg.filter);
        } catch (const DegenerateFilterError&) {
            WorldState reset = next;
            reset.object_pose = y.pose.value_or(next.object_pose);
            belief = ParticleBelief::gaussian(reset, cfg.observation.sigma_t, cfg.observation.sigma_r,
                                              cfg.particles, noise());
        }
        PolicySegment segment;
        segment.target = scenario.goal_pose;
        segment.steps.push_back(
            {action, next, pose_metric(next.object_pose, scenario.goal_pose, scenario.weights)});
        segment.terminated_by = Termination::BudgetExhausted;
        out.plan_node = out.tree.add(out.plan_node, std::move(segment));
        out.plan.push_back(action);
        truth = next;
        trace.stage(stage, policies[chosen].name, action, truth.object_pose,
                    pose_metric(truth.object_pose, scenario.goal_pose, scenario.weights),
                    summarize(belief));
    }
    out.final_pose = truth.object_pose;
    return out;
}

} // namespace

std::filesystem::path default_output_dir()
{
    if (const char* env = std::getenv("PORRT_OUT_DIR"); env && *env) {
        return env;
    }
    return "porrt_out";
}

std::filesystem::path run_directory(const std::filesystem::path& out_dir, const std::string& id,
                                    std::uint64_t seed)
{
    return out_dir / (id + "_seed" + std::to_string(seed));
}

RunRecord run_scenario(const Scenario& input, std::uint64_t seed, const RunOverrides& overrides,
                       const std::filesystem::path& out_dir)
{
    Scenario scenario = input;
    if (overrides.mode) {
        scenario.mode = *overrides.mode;
    }
    if (overrides.max_iters) {
        scenario.planner.max_iters = *overrides.max_iters;
        scenario.planner.validate();
    }
    const auto started = std::chrono::steady_clock::now();
    const std::filesystem::path dir = run_directory(out_dir, scenario.id, seed);
    std::filesystem::create_directories(dir);

    RunRecord record;
    record.scenario_id = scenario.id;
    record.seed = seed;
    record.trace_path = dir / "trace.jsonl";
    record.tree_path = dir / "tree.json";

    std::ostringstream trace_text;
    TraceWriter trace(trace_text);
    const char* planner = overrides.baseline ? "rrt" : "porrt";
    trace.header(scenario, seed, planner);
    const Outcome outcome = scenario.mode == RunMode::Noisy
                                ? execute_noisy(scenario, seed, overrides.baseline, trace)
                                : plan_observable(scenario, seed, overrides.baseline, trace);
    record.final_distance = pose_metric(outcome.final_pose, scenario.goal_pose, scenario.weights);
    record.success = record.final_distance < scenario.planner.goal_tolerance;
    record.iterations = outcome.iterations;
    record.plan_length = outcome.plan.size();
    trace.result(record.success, record.final_distance, record.iterations, outcome.final_pose,
                 outcome.plan);

    write_file(record.trace_path, trace_text.str());
    write_file(record.tree_path, tree_to_json(outcome.tree, scenario, outcome.plan_node) + "\n");
    record.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file(dir / "record.json", record_json(record).dump(1) + "\n");
    return record;
}

RunRecord run_scenario(const std::filesystem::path& path, std::uint64_t seed,
                       const RunOverrides& overrides, const std::filesystem::path& out_dir)
{
    return run_scenario(load_scenario(path), seed, overrides, out_dir);
}

std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigurationError("scenario directory " + dir.string() + " does not exist");
    }
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".scenario") {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string format_summary_table(const BatchResult& batch)
{
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %5s %5s %7s %12s %10s\n", "scenario", "runs", "ok",
                  "rate", "mean_dist", "mean_iter");
    out << line;
    for (const ScenarioSummary& s : batch.summaries) {
        std::snprintf(line, sizeof line, "%-28s %5d %5d %7.3f %12.6f %10.1f\n", s.scenario_id.c_str(),
                      s.runs, s.successes, s.success_rate, s.mean_final_distance, s.mean_iterations);
        out << line;
    }
    return out.str();
}

BatchResult run_batch(const std::vector<std::filesystem::path>& scenarios,
                      const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                      const RunOverrides& overrides, unsigned jobs)
{
    if (scenarios.empty()) {
        throw ConfigurationError("batch needs at least one scenario");
    }
    if (seeds.empty()) {
        throw ConfigurationError("batch needs at least one seed");
    }
    std::filesystem::create_directories(out_dir);

    // Load once up front; a malformed file fails all of its runs.
    std::vector<std::optional<Scenario>> loaded;
    std::vector<std::string> load_errors;
    for (const auto& path : scenarios) {
        try {
            loaded.emplace_back(load_scenario(path));
            load_errors.emplace_back();
        } catch (const Error& e) {
            loaded.emplace_back();
            load_errors.emplace_back(e.what());
        }
    }

    const std::size_t total = scenarios.size() * seeds.size();
    BatchResult batch;
    batch.records.resize(total);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const std::size_t si = i / seeds.size();
            const std::uint64_t seed = seeds[i % seeds.size()];
            RunRecord& r = batch.records[i];
            if (!loaded[si]) {
                r.scenario_id = scenarios[si].stem().string();
                r.seed = seed;
                r.error = load_errors[si];
                continue;
            }
            try {
                r = run_scenario(*loaded[si], seed, overrides, out_dir);
            } catch (const std::exception& e) {
                r.scenario_id = loaded[si]->id;
                r.seed = seed;
                r.success = false;
                r.error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        ScenarioSummary s;
        s.scenario_id = batch.records[si * seeds.size()].scenario_id;
        double distance = 0.0;
        double iters = 0.0;
        int executed = 0;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const RunRecord& r = batch.records[si * seeds.size() + k];
            ++s.runs;
            if (!r.error.empty()) {
                ++s.failed_to_run;
                continue;
            }
            ++executed;
            s.successes += r.success ? 1 : 0;
            distance += r.final_distance;
            iters += r.iterations;
        }
        s.success_rate = static_cast<double>(s.successes) / s.runs;
        s.mean_final_distance = executed ? distance / executed : std::nan("");
        s.mean_iterations = executed ? iters / executed : std::nan("");
        batch.summaries.push_back(s);
    }

    json rows = json::array();
    for (const RunRecord& r : batch.records) {
        rows.push_back(record_json(r));
    }
    json summaries = json::array();
    for (const ScenarioSummary& s : batch.summaries) {
        summaries.push_back({{"scenario", s.scenario_id},
                             {"runs", s.runs},
                             {"successes", s.successes},
                             {"failed_to_run", s.failed_to_run},
                             {"success_rate", s.success_rate},
                             {"mean_final_distance", s.mean_final_distance},
                             {"mean_iterations", s.mean_iterations}});
    }
    write_file(out_dir / "summary.json",
               json{{"runs", rows}, {"scenarios", summaries}}.dump(1) + "\n");
    write_file(out_dir / "summary.txt", format_summary_table(batch));
    return batch;
}

BattleshipDemo battleship_demo(int horizon, std::ostream& out)
{
    if (horizon < 1) {
        throw ValidationError("battleship horizon must be at least 1");
    }
    const Battleship game = make_battleship();
    DiscreteBelief b = game.initial_belief();
    const auto print = [&](const char* label) {
        out << label << ':';
        for (const auto& [name, p] : game.placement_marginal(b)) {
            if (p > 0.0) {
                out << ' ' << name << '=' << p;
            }
        }
        out << '\n';
    };
    print("prior");
    b = game.model.update(b, game.cell_index("C2"), Battleship::kMiss);
    print("after C2 miss");
    b = game.model.update(b, game.cell_index("B2"), Battleship::kHit);
    print("after B2 hit");

    BattleshipDemo demo;
    std::string names;
    std::string probs;
    for (const auto& [name, p] : game.placement_marginal(b)) {
        if (p > 0.0) {
            demo.posterior[name] = p;
            names += (names.empty() ? "" : " / ") + name;
            std::ostringstream v;
            v << p;
            probs += (probs.empty() ? "" : " / ") + v.str();
        }
    }
    out << "posterior " << names << '\n' << probs << '\n';

    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < game.model.num_actions(); ++u) {
        const double q = q_value(game.model, b, u, horizon);
        demo.q_values[game.model.actions()[u]] = q;
        best = std::max(best, q);
    }
    for (const auto& [name, q] : demo.q_values) {
        if (q >= best - 1e-12) {
            demo.best_actions.push_back(name);
        }
    }
    demo.value = best;
    out << "optimal next shots (horizon " << horizon << "): {";
    for (std::size_t i = 0; i < demo.best_actions.size(); ++i) {
        out << (i ? ", " : "") << demo.best_actions[i];
    }
    out << "} value " << best << '\n';
    return demo;
}

} // namespace porrt
