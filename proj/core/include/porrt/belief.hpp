#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "porrt/dynamics.hpp"
#include "porrt/geometry.hpp"

namespace porrt {

/// Probability distribution over an ordered, finite set of state ids.
class DiscreteBelief {
public:
    /// Support defaults to 0..n-1. Throws ValidationError unless probabilities
    /// are non-negative and sum to 1 within 1e-9.
    explicit DiscreteBelief(std::vector<double> probs, std::vector<std::size_t> support = {});

    static DiscreteBelief uniform(std::size_t n);
    static DiscreteBelief point_mass(std::size_t n, std::size_t index);

    std::size_t size() const { return probs_.size(); }
    const std::vector<double>& probs() const { return probs_; }
    const std::vector<std::size_t>& support() const { return support_; }
    double operator[](std::size_t i) const { return probs_[i]; }

private:
    std::vector<double> probs_;
    std::vector<std::size_t> support_;
};

/// trans[u](s, s') = Pr(s' | s, u).
using TransitionTable = std::vector<Eigen::MatrixXd>;
/// obs[u](s', y) = Pr(y | s', u).
using ObservationTable = std::vector<Eigen::MatrixXd>;

/// b'(s') proportional to Pr(y | s', u) * sum_s Pr(s' | s, u) b(s).
/// Throws InconsistentObservationError if the posterior has zero mass,
/// ModelError on table shape mismatches.
DiscreteBelief bayes_update(const DiscreteBelief& belief, std::size_t action,
                            std::size_t observation, const TransitionTable& trans,
                            const ObservationTable& obs);

/// Initial belief and the (action, observation) pairs that followed it.
struct History {
    DiscreteBelief initial;
    std::vector<std::pair<std::size_t, std::size_t>> steps;
};

/// Belief after the whole history, by chained bayes_update.
DiscreteBelief filter_history(const History& history, const TransitionTable& trans,
                              const ObservationTable& obs);

/// Sensor reading in the pushing domain. Either channel may be absent.
struct PoseObservation {
    std::optional<Pose> pose;
    std::optional<bool> contact;
};

/// Gaussian pose noise plus a binary contact sensor with symmetric error rate.
struct PoseObservationModel {
    double sigma_t = 0.005; ///< translation std-dev [m]
    double sigma_r = 0.02;  ///< yaw std-dev [rad]
    double contact_error = 0.05;

    void validate() const;
    /// Unnormalized likelihood of `y` given the true state.
    double likelihood(const PoseObservation& y, const WorldState& state) const;
    /// Noisy reading of `state` (both channels).
    PoseObservation sample(const WorldState& state, Rng& rng) const;
};

struct ParticleFilterConfig {
    double resample_fraction = 0.5; ///< resample when ESS < fraction * N
    double process_sigma_t = 0.0;   ///< post-propagation jitter on x, y [m]
    double process_sigma_r = 0.0;   ///< post-propagation jitter on yaw [rad]
};

class ParticleBelief {
public:
    /// Equal weights when `weights` is empty. Throws ValidationError on an
    /// empty particle set or unnormalized weights.
    ParticleBelief(std::vector<WorldState> particles, std::vector<double> weights,
                   std::uint64_t rng_seed);

    /// N particles drawn around `mean` with independent Gaussian x, y, yaw noise.
    static ParticleBelief gaussian(const WorldState& mean, double sigma_t, double sigma_r,
                                   std::size_t count, std::uint64_t rng_seed);

    std::size_t size() const { return particles_.size(); }
    const std::vector<WorldState>& particles() const { return particles_; }
    const std::vector<double>& weights() const { return weights_; }
    std::uint64_t rng_seed() const { return rng_seed_; }

    double effective_sample_size() const;

private:
    std::vector<WorldState> particles_;
    std::vector<double> weights_;
    std::uint64_t rng_seed_;
};

using ForwardModel = std::function<WorldState(const WorldState&, const PushAction&)>;

/// simulate_push bound to `object`.
ForwardModel push_forward_model(const ObjectModel& object);

/// Propagate, reweight by the observation likelihood, and systematically
/// resample when the effective sample size drops below the configured
/// fraction. Deterministic given the belief's seed. Throws
/// DegenerateFilterError if every likelihood is zero.
ParticleBelief particle_update(const ParticleBelief& belief, const std::optional<PushAction>& action,
                               const PoseObservation& y, const ForwardModel& sim,
                               const PoseObservationModel& obs,
                               const ParticleFilterConfig& config = {});

/// Shannon entropy in bits with 0 log 0 = 0.
double entropy(const DiscreteBelief& belief);
/// Entropy of the normalized weights after merging particles whose object
/// poses are identical (resampling duplicates).
double entropy(const ParticleBelief& belief);

/// KL(b_i || b_j) in bits. Throws ValidationError on mismatched supports and
/// OutOfSupportError where b_i > 0 but b_j = 0.
double kl_divergence(const DiscreteBelief& b_i, const DiscreteBelief& b_j);

struct BeliefSummary {
    Pose mean;
    Vec3 variance = Vec3::Zero(); ///< x, y, yaw
    double entropy = 0.0;
};

/// Weighted mean (circular for yaw), diagonal covariance and entropy.
BeliefSummary summarize(const ParticleBelief& belief);

WorldState mean_state(const ParticleBelief& belief);

} // namespace porrt
