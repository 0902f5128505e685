#include "porrt/belief.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "porrt/errors.hpp"

namespace porrt {

namespace {

constexpr double kNormTolerance = 1e-9;

void require_normalized(const std::vector<double>& ps, const char* what)
{
    double total = 0.0;
    for (double p : ps) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError(std::string(what) + " must be non-negative and finite");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTolerance) {
        throw ValidationError(std::string(what) + " must sum to 1");
    }
}

void normalize_in_place(std::vector<double>& ps, double total)
{
    for (double& p : ps) {
        p /= total;
    }
}

double entropy_bits(const std::vector<double>& ps)
{
    double h = 0.0;
    for (double p : ps) {
        if (p > 0.0) {
            h -= p * std::log2(p);
        }
    }
    return std::max(0.0, h);
}

} // namespace

DiscreteBelief::DiscreteBelief(std::vector<double> probs, std::vector<std::size_t> support)
    : probs_(std::move(probs)), support_(std::move(support))
{
    if (probs_.empty()) {
        throw ValidationError("belief support is empty");
    }
    require_normalized(probs_, "belief probabilities");
    if (support_.empty()) {
        support_.resize(probs_.size());
        std::iota(support_.begin(), support_.end(), std::size_t{0});
    } else if (support_.size() != probs_.size()) {
        throw ValidationError("belief support and probabilities differ in length");
    }
}

DiscreteBelief DiscreteBelief::uniform(std::size_t n)
{
    return DiscreteBelief(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteBelief DiscreteBelief::point_mass(std::size_t n, std::size_t index)
{
    std::vector<double> ps(n, 0.0);
    ps.at(index) = 1.0;
    return DiscreteBelief(std::move(ps));
}

DiscreteBelief bayes_update(const DiscreteBelief& belief, std::size_t action,
                            std::size_t observation, const TransitionTable& trans,
                            const ObservationTable& obs)
{
    const auto n = static_cast<Eigen::Index>(belief.size());
    if (action >= trans.size() || action >= obs.size()) {
        throw ModelError("action index outside the model tables");
    }
    const Eigen::MatrixXd& t = trans[action];
    const Eigen::MatrixXd& o = obs[action];
    if (t.rows() != n || t.cols() != n || o.rows() != n) {
        throw ModelError("belief size does not match the model tables");
    }
    if (static_cast<Eigen::Index>(observation) >= o.cols()) {
        throw ModelError("observation index outside the observation table");
    }

    std::vector<double> posterior(belief.size(), 0.0);
    double total = 0.0;
    for (Eigen::Index next = 0; next < n; ++next) {
        double predicted = 0.0;
        for (Eigen::Index s = 0; s < n; ++s) {
            predicted += t(s, next) * belief[static_cast<std::size_t>(s)];
        }
        const double mass = o(next, static_cast<Eigen::Index>(observation)) * predicted;
        posterior[static_cast<std::size_t>(next)] = mass;
        total += mass;
    }
    if (!(total > 0.0)) {
        throw InconsistentObservationError("observation has zero probability under the belief");
    }
    normalize_in_place(posterior, total);
    return DiscreteBelief(std::move(posterior), belief.support());
}

DiscreteBelief filter_history(const History& history, const TransitionTable& trans,
                              const ObservationTable& obs)
{
    DiscreteBelief b = history.initial;
    for (const auto& [u, y] : history.steps) {
        b = bayes_update(b, u, y, trans, obs);
    }
    return b;
}

void PoseObservationModel::validate() const
{
    if (!(sigma_t > 0.0) || !(sigma_r > 0.0)) {
        throw ValidationError("observation noise standard deviations must be positive");
    }
    if (!(contact_error >= 0.0 && contact_error < 0.5)) {
        throw ValidationError("contact error rate must lie in [0, 0.5)");
    }
}

double PoseObservationModel::likelihood(const PoseObservation& y, const WorldState& state) const
{
    double l = 1.0;
    if (y.pose) {
        const Vec2 dxy = y.pose->xy() - state.object_pose.xy();
        const double dyaw = wrap_angle(y.pose->yaw() - state.object_pose.yaw());
        const double q = dxy.squaredNorm() / (sigma_t * sigma_t) + dyaw * dyaw / (sigma_r * sigma_r);
        l *= std::exp(-0.5 * q);
    }
    if (y.contact) {
        l *= (*y.contact == state.in_contact) ? 1.0 - contact_error : contact_error;
    }
    return l;
}

PoseObservation PoseObservationModel::sample(const WorldState& state, Rng& rng) const
{
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Pose& p = state.object_pose;
    const double x = p.translation().x() + sigma_t * noise(rng);
    const double y = p.translation().y() + sigma_t * noise(rng);
    const double yaw = wrap_angle(p.yaw() + sigma_r * noise(rng));
    const bool flip = unit(rng) < contact_error;
    return {Pose::planar(x, y, yaw, p.translation().z()), flip != state.in_contact};
}

ParticleBelief::ParticleBelief(std::vector<WorldState> particles, std::vector<double> weights,
                               std::uint64_t rng_seed)
    : particles_(std::move(particles)), weights_(std::move(weights)), rng_seed_(rng_seed)
{
    if (particles_.empty()) {
        throw ValidationError("particle belief needs at least one particle");
    }
    if (weights_.empty()) {
        weights_.assign(particles_.size(), 1.0 / static_cast<double>(particles_.size()));
    }
    if (weights_.size() != particles_.size()) {
        throw ValidationError("particle and weight counts differ");
    }
    require_normalized(weights_, "particle weights");
}

ParticleBelief ParticleBelief::gaussian(const WorldState& mean, double sigma_t, double sigma_r,
                                        std::size_t count, std::uint64_t rng_seed)
{
    Rng rng(rng_seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<WorldState> particles;
    particles.reserve(count);
    const Pose& p = mean.object_pose;
    for (std::size_t i = 0; i < count; ++i) {
        WorldState s = mean;
        const double x = p.translation().x() + sigma_t * noise(rng);
        const double y = p.translation().y() + sigma_t * noise(rng);
        const double yaw = wrap_angle(p.yaw() + sigma_r * noise(rng));
        s.object_pose = Pose::planar(x, y, yaw, p.translation().z());
        particles.push_back(s);
    }
    return {std::move(particles), {}, rng()};
}

double ParticleBelief::effective_sample_size() const
{
    double sq = 0.0;
    for (double w : weights_) {
        sq += w * w;
    }
    return 1.0 / sq;
}

ForwardModel push_forward_model(const ObjectModel& object)
{
    return [object](const WorldState& state, const PushAction& action) {
        return simulate_push(state, object, action).state;
    };
}

ParticleBelief particle_update(const ParticleBelief& belief, const std::optional<PushAction>& action,
                               const PoseObservation& y, const ForwardModel& sim,
                               const PoseObservationModel& obs, const ParticleFilterConfig& config)
{
    obs.validate();
    Rng rng(belief.rng_seed());
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = belief.size();

    std::vector<WorldState> particles;
    particles.reserve(n);
    std::vector<double> weights(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        WorldState s = action ? sim(belief.particles()[i], *action) : belief.particles()[i];
        if (config.process_sigma_t > 0.0 || config.process_sigma_r > 0.0) {
            const Pose& p = s.object_pose;
            const double x = p.translation().x() + config.process_sigma_t * noise(rng);
            const double yv = p.translation().y() + config.process_sigma_t * noise(rng);
            const double yaw = wrap_angle(p.yaw() + config.process_sigma_r * noise(rng));
            s.object_pose = Pose::planar(x, yv, yaw, p.translation().z());
        }
        weights[i] = belief.weights()[i] * obs.likelihood(y, s);
        total += weights[i];
        particles.push_back(std::move(s));
    }
    if (!(total > 0.0)) {
        throw DegenerateFilterError("every particle has zero observation likelihood");
    }
    normalize_in_place(weights, total);

    double sq = 0.0;
    for (double w : weights) {
        sq += w * w;
    }
    const double ess = 1.0 / sq;
    if (ess < config.resample_fraction * static_cast<double>(n)) {
        // Systematic resampling: one uniform offset, N evenly spaced pointers.
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double step = 1.0 / static_cast<double>(n);
        double pointer = unit(rng) * step;
        double cumulative = weights[0];
        std::size_t j = 0;
        std::vector<WorldState> resampled;
        resampled.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            while (pointer > cumulative && j + 1 < n) {
                ++j;
                cumulative += weights[j];
            }
            resampled.push_back(particles[j]);
            pointer += step;
        }
        particles = std::move(resampled);
        weights.assign(n, step);
    }
    return {std::move(particles), std::move(weights), rng()};
}

double entropy(const DiscreteBelief& belief)
{
    return entropy_bits(belief.probs());
}

double entropy(const ParticleBelief& belief)
{
    using Key = std::array<double, 7>;
    std::vector<std::pair<Key, double>> entries;
    entries.reserve(belief.size());
    for (std::size_t i = 0; i < belief.size(); ++i) {
        entries.emplace_back(belief.particles()[i].object_pose.to_array(), belief.weights()[i]);
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> merged;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i].first == entries[i - 1].first) {
            merged.back() += entries[i].second;
        } else {
            merged.push_back(entries[i].second);
        }
    }
    return entropy_bits(merged);
}

double kl_divergence(const DiscreteBelief& b_i, const DiscreteBelief& b_j)
{
    if (b_i.support() != b_j.support()) {
        throw ValidationError("KL divergence needs identical support ordering");
    }
    double kl = 0.0;
    for (std::size_t s = 0; s < b_i.size(); ++s) {
        const double p = b_i[s];
        if (p <= 0.0) {
            continue;
        }
        const double q = b_j[s];
        if (q <= 0.0) {
            throw OutOfSupportError("KL divergence is infinite: b_j has no mass where b_i does");
        }
        kl += p * std::log2(p / q);
    }
    return std::max(0.0, kl);
}

BeliefSummary summarize(const ParticleBelief& belief)
{
    double mx = 0.0;
    double my = 0.0;
    double mz = 0.0;
    double sin_sum = 0.0;
    double cos_sum = 0.0;
    for (std::size_t i = 0; i < belief.size(); ++i) {
        const double w = belief.weights()[i];
        const Pose& p = belief.particles()[i].object_pose;
        mx += w * p.translation().x();
        my += w * p.translation().y();
        mz += w * p.translation().z();
        sin_sum += w * std::sin(p.yaw());
        cos_sum += w * std::cos(p.yaw());
    }
    const double mean_yaw = std::atan2(sin_sum, cos_sum);
    Vec3 var = Vec3::Zero();
    for (std::size_t i = 0; i < belief.size(); ++i) {
        const double w = belief.weights()[i];
        const Pose& p = belief.particles()[i].object_pose;
        const double dx = p.translation().x() - mx;
        const double dy = p.translation().y() - my;
        const double dyaw = wrap_angle(p.yaw() - mean_yaw);
        var += w * Vec3(dx * dx, dy * dy, dyaw * dyaw);
    }
    return {Pose::planar(mx, my, mean_yaw, mz), var, entropy(belief)};
}

WorldState mean_state(const ParticleBelief& belief)
{
    WorldState s = belief.particles().front();
    s.object_pose = summarize(belief).mean;
    double contact = 0.0;
    for (std::size_t i = 0; i < belief.size(); ++i) {
        contact += belief.particles()[i].in_contact ? belief.weights()[i] : 0.0;
    }
    s.in_contact = contact > 0.5;
    return s;
}

} // namespace porrt
