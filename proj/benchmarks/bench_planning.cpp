#include <benchmark/benchmark.h>

#include "porrt/controller.hpp"
#include "porrt/rrt.hpp"

namespace {

using namespace porrt;

WorldState at(double x, double y)
{
    WorldState s;
    s.object_pose = Pose::planar(x, y, 0.0);
    s.finger_pos = Vec2(x - 0.12, y);
    return s;
}

void BM_SelectControlPolicy(benchmark::State& state)
{
    const ObjectModel square = ObjectModel::box(0.1, 0.1);
    const WorldState x = at(0.4, 0.5);
    const Pose target = Pose::planar(0.55, 0.55, 0.5);
    ControllerParams params;
    params.candidates = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Rng rng(seed++);
        benchmark::DoNotOptimize(
            select_control_policy(x, target, 10, 0.02, square, MetricWeights(), rng, params));
    }
}
BENCHMARK(BM_SelectControlPolicy)->Arg(8)->Arg(32);

void BM_NearestNeighbour(benchmark::State& state)
{
    Tree tree(at(0.5, 0.5));
    Rng rng(1);
    const PoseBounds bounds(Vec3(0, 0, -3.14), Vec3(1, 1, 3.14));
    for (long i = 0; i < state.range(0); ++i) {
        PolicySegment seg;
        WorldState s;
        s.object_pose = sample_pose_uniform(bounds, rng);
        seg.steps.push_back({PushAction{}, s, 0.0});
        tree.add(static_cast<int>(i), std::move(seg));
    }
    const Pose query = sample_pose_uniform(bounds, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nearest_neighbour(tree, query, MetricWeights()));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NearestNeighbour)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oN);

void BM_BuildPorrt(benchmark::State& state)
{
    const PlanningWorld world{ObjectModel::box(0.1, 0.1),
                              PoseBounds(Vec3(0, 0, -3.14159), Vec3(1, 1, 3.14159)),
                              MetricWeights(),
                              PushParams{},
                              0.05,
                              0.25};
    const WorldState init = at(0.35, 0.45);
    const Pose goal = Pose::planar(0.65, 0.55, 0.0);
    PlannerParams params;
    for (auto _ : state) {
        params.rng_seed = static_cast<std::uint64_t>(state.iterations());
        benchmark::DoNotOptimize(build_porrt(init, params, world, goal));
    }
}
BENCHMARK(BM_BuildPorrt)->Unit(benchmark::kMillisecond);

} // namespace
