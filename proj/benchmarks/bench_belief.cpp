#include <benchmark/benchmark.h>

#include <random>

#include "porrt/belief.hpp"
#include "porrt/pomdp.hpp"

namespace {

using namespace porrt;

Eigen::MatrixXd random_rows(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::uniform_real_distribution<double> u(0.1, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = u(rng);
        }
        m.row(r) /= m.row(r).sum();
    }
    return m;
}

void BM_BayesUpdate(benchmark::State& state)
{
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(3);
    const TransitionTable trans{random_rows(rng, n, n)};
    const ObservationTable obs{random_rows(rng, n, 4)};
    const DiscreteBelief b(std::vector<double>(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bayes_update(b, 0, 1, trans, obs));
    }
}
BENCHMARK(BM_BayesUpdate)->Arg(16)->Arg(256);

void BM_BattleshipOptimalPolicy(benchmark::State& state)
{
    const Battleship game = make_battleship();
    const DiscreteBelief b0 = game.initial_belief();
    const int horizon = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimal_policy(game.model, b0, horizon));
    }
}
BENCHMARK(BM_BattleshipOptimalPolicy)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

void BM_ParticleUpdate(benchmark::State& state)
{
    const ObjectModel square = ObjectModel::box(0.1, 0.1);
    WorldState truth;
    truth.object_pose = Pose::planar(0.5, 0.5, 0.0);
    truth.finger_pos = Vec2(0.3, 0.5);
    std::vector<WorldState> particles(static_cast<std::size_t>(state.range(0)), truth);
    const ParticleBelief belief(particles, std::vector<double>(particles.size(), 1.0 / static_cast<double>(particles.size())), 7);
    const PoseObservationModel model;
    const ForwardModel forward = push_forward_model(square);
    PoseObservation y;
    y.pose = truth.object_pose;
    for (auto _ : state) {
        benchmark::DoNotOptimize(particle_update(belief, std::nullopt, y, forward, model));
    }
}
BENCHMARK(BM_ParticleUpdate)->Arg(100)->Arg(500);

} // namespace
