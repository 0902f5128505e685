#include <benchmark/benchmark.h>

#include "porrt/dynamics.hpp"

namespace {

using namespace porrt;

WorldState start()
{
    WorldState s;
    s.object_pose = Pose::planar(0.5, 0.5, 0.3);
    s.finger_pos = Vec2(0.3, 0.5);
    return s;
}

void BM_SimulatePush(benchmark::State& state)
{
    const ObjectModel square = ObjectModel::box(0.1, 0.1);
    const WorldState s = start();
    PushAction a;
    a.approach_point = Vec2(0.35, 0.51);
    a.direction = Vec2(1, 0);
    a.travel = static_cast<double>(state.range(0)) / 1000.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_push(s, square, a));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(a.travel / a.step_forward));
}
BENCHMARK(BM_SimulatePush)->Arg(100)->Arg(300);

void BM_FingerLineAction(benchmark::State& state)
{
    const ObjectModel square = ObjectModel::box(0.1, 0.1);
    const WorldState s = start();
    const Pose target = Pose::planar(0.8, 0.6, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(finger_line_action(s, square, target, PushParams{}));
    }
}
BENCHMARK(BM_FingerLineAction);

} // namespace
