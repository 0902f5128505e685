#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "porrt/belief.hpp"
#include "porrt/errors.hpp"
#include "porrt/pomdp.hpp"

using namespace porrt;

namespace {

WorldState state_at(double x, double y, double yaw, bool contact = false)
{
    WorldState s;
    s.object_pose = Pose::planar(x, y, yaw);
    s.in_contact = contact;
    return s;
}

} // namespace

TEST(DiscreteBelief, Validation)
{
    EXPECT_THROW(DiscreteBelief({0.5, 0.6}), ValidationError);
    EXPECT_THROW(DiscreteBelief({-0.1, 1.1}), ValidationError);
    EXPECT_THROW(DiscreteBelief({0.5, 0.5}, {0, 1, 2}), ValidationError);
    EXPECT_NO_THROW(DiscreteBelief({0.25, 0.75}));
}

TEST(BayesUpdate, BattleshipPosterior)
{
    const Battleship game = make_battleship();
    DiscreteBelief b = game.initial_belief();
    b = bayes_update(b, game.cell_index("C2"), Battleship::kMiss, game.model.transitions(),
                     game.model.observation_table());
    b = bayes_update(b, game.cell_index("B2"), Battleship::kHit, game.model.transitions(),
                     game.model.observation_table());
    const auto marginal = game.placement_marginal(b);
    for (const auto& [name, p] : marginal) {
        if (name == "A2-B2" || name == "B1-B2") {
            EXPECT_NEAR(p, 0.5, 1e-12) << name;
        } else {
            EXPECT_NEAR(p, 0.0, 1e-12) << name;
        }
    }
}

TEST(BayesUpdate, FlatLikelihoodKeepsPrior)
{
    const TransitionTable trans{Eigen::MatrixXd::Identity(3, 3)};
    const ObservationTable obs{Eigen::MatrixXd::Constant(3, 2, 0.5)};
    const DiscreteBelief prior({0.2, 0.3, 0.5});
    const DiscreteBelief post = bayes_update(prior, 0, 1, trans, obs);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(post[i], prior[i], 1e-15);
    }
}

TEST(BayesUpdate, DeterministicTransitionGivesPointMass)
{
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(3, 3);
    t.col(2).setOnes();
    const ObservationTable obs{Eigen::MatrixXd::Identity(3, 3)};
    const DiscreteBelief post = bayes_update(DiscreteBelief::uniform(3), 0, 2, {t}, obs);
    EXPECT_DOUBLE_EQ(post[2], 1.0);
    EXPECT_THROW(bayes_update(DiscreteBelief::uniform(3), 0, 0, {t}, obs), InconsistentObservationError);
    EXPECT_THROW(bayes_update(DiscreteBelief::uniform(2), 0, 0, {t}, obs), ModelError);
}

TEST(BayesUpdate, ChainedUpdatesMatchJointEnumeration)
{
    std::mt19937_64 rng(21);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 6;
        const int nu = 2;
        const int ny = 3;
        oracle::Tables trans;
        oracle::Tables obs;
        for (int u = 0; u < nu; ++u) {
            trans.push_back(oracle::random_stochastic(rng, n, n, 0.3));
            obs.push_back(oracle::random_stochastic(rng, n, ny, 0.3));
        }
        const auto b0 = oracle::random_distribution(rng, n);
        History h{DiscreteBelief(b0), {}};
        std::vector<std::pair<int, int>> hist;
        for (int t = 0; t < 4; ++t) {
            const int u = static_cast<int>(rng() % nu);
            const int y = static_cast<int>(rng() % ny);
            hist.emplace_back(u, y);
            h.steps.emplace_back(u, y);
        }
        const auto expected = oracle::joint_posterior(b0, trans, obs, hist);
        if (expected.empty()) {
            EXPECT_THROW(filter_history(h, trans, obs), InconsistentObservationError);
            continue;
        }
        const DiscreteBelief got = filter_history(h, trans, obs);
        for (int s = 0; s < n; ++s) {
            EXPECT_NEAR(got[static_cast<std::size_t>(s)], expected[static_cast<std::size_t>(s)], 1e-12);
        }
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Entropy, Examples)
{
    EXPECT_DOUBLE_EQ(entropy(DiscreteBelief::point_mass(4, 2)), 0.0);
    EXPECT_NEAR(entropy(DiscreteBelief::uniform(6)), std::log2(6.0), 1e-12);
    EXPECT_NEAR(entropy(DiscreteBelief({0.5, 0.5})), 1.0, 1e-15);
}

TEST(Entropy, BoundedByLogSupport)
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
        const int n = 1 + static_cast<int>(rng() % 9);
        const DiscreteBelief b(oracle::random_distribution(rng, n));
        const double h = entropy(b);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, std::log2(static_cast<double>(n)) + 1e-12);
    }
}

TEST(Kl, ExamplesAndErrors)
{
    const DiscreteBelief a({1.0, 0.0});
    const DiscreteBelief b({0.5, 0.5});
    EXPECT_NEAR(kl_divergence(a, b), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(kl_divergence(b, b), 0.0);
    EXPECT_THROW(kl_divergence(b, a), OutOfSupportError);
    EXPECT_THROW(kl_divergence(b, DiscreteBelief::uniform(3)), ValidationError);
}

TEST(Kl, MatchesResummationAndIsNonNegative)
{
    std::mt19937_64 rng(8);
    for (int i = 0; i < 500; ++i) {
        const auto p = oracle::random_distribution(rng, 4);
        const auto q = oracle::random_distribution(rng, 4);
        const double d = kl_divergence(DiscreteBelief(p), DiscreteBelief(q));
        EXPECT_NEAR(d, oracle::kl_bits(p, q), 1e-12);
        EXPECT_GE(d, 0.0);
    }
}

TEST(ParticleFilter, ExactParticleTakesAllWeight)
{
    std::vector<WorldState> particles;
    for (int i = 0; i < 20; ++i) {
        particles.push_back(state_at(0.01 * i, 0.0, 0.0));
    }
    const ParticleBelief b(particles, {}, 1);
    PoseObservationModel obs;
    obs.sigma_t = 1e-5;
    obs.sigma_r = 1e-5;
    const PoseObservation y{Pose::planar(0.07, 0.0, 0.0), std::nullopt};
    ParticleFilterConfig no_resample;
    no_resample.resample_fraction = 0.0;
    const ParticleBelief post = particle_update(b, std::nullopt, y, {}, obs, no_resample);
    EXPECT_NEAR(post.weights()[7], 1.0, 1e-12);
    EXPECT_EQ(post.size(), b.size());
    const ParticleBelief resampled = particle_update(b, std::nullopt, y, {}, obs);
    EXPECT_EQ(resampled.size(), b.size());
    EXPECT_NEAR(entropy(resampled), 0.0, 1e-12);
}

TEST(ParticleFilter, SymmetricCloudKeepsMean)
{
    const WorldState mean = state_at(0.3, 0.4, 0.2);
    const ParticleBelief b = ParticleBelief::gaussian(mean, 0.01, 0.05, 4000, 17);
    const BeliefSummary before = summarize(b);
    const PoseObservation y{before.mean, std::nullopt};
    const ParticleBelief post = particle_update(b, std::nullopt, y, {}, PoseObservationModel{});
    const BeliefSummary after = summarize(post);
    EXPECT_NEAR(after.mean.xy().x(), before.mean.xy().x(), 1e-3);
    EXPECT_NEAR(after.mean.xy().y(), before.mean.xy().y(), 1e-3);
    EXPECT_NEAR(after.mean.yaw(), before.mean.yaw(), 5e-3);
    double sum = 0.0;
    for (double w : post.weights()) {
        EXPECT_GE(w, 0.0);
        sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(ParticleFilter, ConvergesToDiscretePosterior)
{
    // Particles sit on five discrete positions; with no motion the exact
    // posterior is prior times Gaussian likelihood.
    const std::vector<double> xs{0.0, 0.004, 0.008, 0.012, 0.016};
    const std::vector<double> prior{0.1, 0.2, 0.4, 0.2, 0.1};
    std::mt19937_64 rng(5);
    std::discrete_distribution<int> pick(prior.begin(), prior.end());
    std::vector<WorldState> particles;
    for (int i = 0; i < 10000; ++i) {
        particles.push_back(state_at(xs[static_cast<std::size_t>(pick(rng))], 0.0, 0.0));
    }
    PoseObservationModel obs;
    const PoseObservation y{Pose::planar(0.011, 0.0, 0.0), std::nullopt};
    ParticleFilterConfig always;
    always.resample_fraction = 1.01;
    const ParticleBelief post = particle_update(ParticleBelief(particles, {}, 3), std::nullopt, y, {}, obs, always);

    std::vector<double> exact(xs.size());
    double z = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double d = (xs[k] - 0.011) / obs.sigma_t;
        exact[k] = prior[k] * std::exp(-0.5 * d * d);
        z += exact[k];
    }
    std::vector<double> empirical(xs.size(), 0.0);
    for (std::size_t i = 0; i < post.size(); ++i) {
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (post.particles()[i].object_pose.xy().x() == xs[k]) {
                empirical[k] += post.weights()[i];
            }
        }
    }
    double tv = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        tv += 0.5 * std::abs(empirical[k] - exact[k] / z);
    }
    EXPECT_LT(tv, 0.05);
}

TEST(ParticleFilter, TracksPushedObject)
{
    const ObjectModel square = ObjectModel::box(0.1, 0.1);
    const ForwardModel sim = push_forward_model(square);
    WorldState truth = state_at(0.3, 0.5, 0.0);
    Rng noise(99);
    PoseObservationModel obs;
    ParticleBelief b = ParticleBelief::gaussian(truth, obs.sigma_t, obs.sigma_r, 500, 7);
    const ParticleFilterConfig cfg{0.5, 0.001, 0.005};
    double sq = 0.0;
    for (int step = 0; step < 10; ++step) {
        PushAction a;
        a.approach_point = truth.object_pose.xy() - Vec2(0.1, 0.01 * (step % 3 - 1));
        a.direction = Vec2::UnitX();
        a.travel = 0.07;
        truth = sim(truth, a);
        const PoseObservation y = obs.sample(truth, noise);
        b = particle_update(b, a, y, sim, obs, cfg);
        const Vec2 err = summarize(b).mean.xy() - truth.object_pose.xy();
        sq += err.squaredNorm();
        EXPECT_EQ(b.size(), 500u);
    }
    EXPECT_LT(std::sqrt(sq / 10), 3 * obs.sigma_t);
}

TEST(ParticleFilter, AllZeroLikelihoodIsDegenerate)
{
    const ParticleBelief b({state_at(0, 0, 0, false), state_at(0.01, 0, 0, false)}, {}, 1);
    PoseObservationModel obs;
    obs.contact_error = 0.0;
    const PoseObservation y{std::nullopt, true};
    EXPECT_THROW(particle_update(b, std::nullopt, y, {}, obs), DegenerateFilterError);
}

TEST(ParticleFilter, DeterministicGivenSeed)
{
    const ParticleBelief b = ParticleBelief::gaussian(state_at(0.2, 0.2, 0.0), 0.01, 0.05, 300, 4);
    const PoseObservation y{Pose::planar(0.205, 0.2, 0.01), false};
    const ParticleBelief p1 = particle_update(b, std::nullopt, y, {}, PoseObservationModel{});
    const ParticleBelief p2 = particle_update(b, std::nullopt, y, {}, PoseObservationModel{});
    EXPECT_EQ(p1.weights(), p2.weights());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        EXPECT_EQ(p1.particles()[i].object_pose.to_array(), p2.particles()[i].object_pose.to_array());
    }
    EXPECT_EQ(p1.rng_seed(), p2.rng_seed());
}

TEST(ParticleFilter, EntropyMergesDuplicates)
{
    const WorldState a = state_at(0, 0, 0);
    const WorldState c = state_at(0.1, 0, 0);
    EXPECT_NEAR(entropy(ParticleBelief({a, a, c, c}, {}, 0)), 1.0, 1e-12);
    EXPECT_NEAR(entropy(ParticleBelief({a, a, a}, {}, 0)), 0.0, 1e-12);
}
