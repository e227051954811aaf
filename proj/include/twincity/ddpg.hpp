#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "twincity/scheduler.hpp"

namespace twincity::ddpg {

enum class OutputKind { Linear, Sigmoid };

/// Small dense network with rectifier hidden units and a single flat
/// parameter vector (per layer: row-major weights, then biases). Forward
/// and backward passes are written out by hand; the backward pass also
/// returns the input gradient so the critic can be chained into the actor.
class Mlp {
public:
    Mlp(std::vector<int> dims, OutputKind output, std::uint64_t seed);

    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }
    const std::vector<int>& dims() const { return dims_; }
    OutputKind output_kind() const { return output_; }

    std::vector<double> forward(std::span<const double> x) const;

    struct Tape {
        std::vector<double> input;
        std::vector<std::vector<double>> pre;   // z per layer
        std::vector<std::vector<double>> post;  // activation per layer
    };
    std::vector<double> forward(std::span<const double> x, Tape& tape) const;

    struct Gradient {
        std::vector<double> params;  // same layout as params()
        std::vector<double> input;
    };
    Gradient backward(const Tape& tape, std::span<const double> dy) const;

    std::span<const double> params() const { return params_; }
    std::span<double> params() { return params_; }
    std::size_t param_count() const { return params_.size(); }

private:
    std::vector<int> dims_;
    OutputKind output_;
    std::vector<double> params_;
    std::vector<std::size_t> w_offset_;  // per layer
    std::vector<std::size_t> b_offset_;
};

/// target <- tau * online + (1 - tau) * target, elementwise. tau in (0, 1].
void soft_update(const Mlp& online, Mlp& target, double tau);

/// Classical momentum SGD: v <- mu*v - lr*g; w <- w + v.
class SgdMomentum {
public:
    explicit SgdMomentum(std::size_t param_count) : velocity_(param_count, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad, double lr, double mu);

    std::span<const double> velocity() const { return velocity_; }
    std::span<double> velocity() { return velocity_; }

private:
    std::vector<double> velocity_;
};

/// Fixed-capacity ring of transitions; wraparound overwrites oldest first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(sched::Transition t);
    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t cursor() const { return cursor_; }
    std::uint64_t total_pushed() const { return total_pushed_; }
    const sched::Transition& at(std::size_t i) const { return storage_.at(i); }

    /// Uniform sample of b indices; requires size() >= b.
    std::vector<std::size_t> sample_indices(std::size_t b, std::mt19937_64& rng) const;

    void restore(std::vector<sched::Transition> storage, std::size_t cursor,
                 std::uint64_t total_pushed);

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::uint64_t total_pushed_ = 0;
    std::vector<sched::Transition> storage_;
};

enum class ExplorationMode { EpsilonGreedy, GaussianNoise };

struct Hyperparams {
    double learning_rate = 0.01;        // critic, within [0.001, 0.2]
    double actor_learning_rate = 0.01;  // within [0.001, 0.2]
    double momentum = 0.9;              // sgdm
    double gamma = 0.8;
    int batch_size = 256;
    double tau = 0.01;
    std::size_t buffer_capacity = 100'000;
    double epsilon_start = 0.9;
    double epsilon_final = 0.05;
    double epsilon_decay_fraction = 0.6;  // of total episodes
    double reward_scale = 100.0;          // critic targets use r / reward_scale
    int updates_per_step = 1;
    std::vector<int> hidden{64, 64};
    ExplorationMode exploration = ExplorationMode::EpsilonGreedy;
    double gaussian_sigma_minutes = 30.0;

    void validate() const;
};

/// Linear decay from epsilon_start to epsilon_final over the first
/// epsilon_decay_fraction of the run, flat afterwards.
double epsilon_at(int episode, int total_episodes, const Hyperparams& hp);

/// Actor/critic pair with target networks, optimizers, exploration and the
/// replay buffer. Single-threaded; fully deterministic for a fixed seed.
class DdpgAgent {
public:
    DdpgAgent(int n_devices, Hyperparams hp, std::uint64_t seed);

    int n_devices() const { return n_devices_; }
    const Hyperparams& hp() const { return hp_; }

    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    Mlp& actor_target() { return actor_target_; }
    Mlp& critic_target() { return critic_target_; }
    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    SgdMomentum& actor_opt() { return actor_opt_; }
    SgdMomentum& critic_opt() { return critic_opt_; }
    ReplayBuffer& buffer() { return buffer_; }
    std::mt19937_64& rng() { return rng_; }

    /// Deterministic policy action in [0, 1440] minutes.
    sched::ActionVector policy_action(const sched::StateVector& s) const;

    /// epsilon-greedy: with probability epsilon a uniform random vector in
    /// [0, 1440]^N, otherwise the actor output. (Gaussian mode adds noise
    /// to the actor output instead.)
    sched::ActionVector select_action(const sched::StateVector& s, double epsilon);

    /// One sgdm step on the critic against y = r/scale + gamma * Q_target
    /// (terminal transitions use y = r/scale). Returns the MSE loss.
    double critic_update(std::span<const std::size_t> batch);

    /// One ascent step on mean Q(s, actor(s)); critic parameters untouched.
    /// Returns the mean Q objective.
    double actor_update(std::span<const std::size_t> batch);

    void soft_update_targets(double tau);

    void save(std::ostream& out) const;
    static DdpgAgent load(std::istream& in);

private:
    std::vector<double> critic_input(const sched::StateVector& s,
                                     std::span<const double> action_minutes) const;

    int n_devices_;
    Hyperparams hp_;
    Mlp actor_;
    Mlp critic_;
    Mlp actor_target_;
    Mlp critic_target_;
    SgdMomentum actor_opt_;
    SgdMomentum critic_opt_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
};

struct EpisodeRecord {
    int episode = 0;
    double r_total = 0.0;
    double r_energy = 0.0;
    double r_timeliness = 0.0;
    double r_consecutive = 0.0;
    double epsilon = 0.0;
    double critic_loss = 0.0;
    double p95_ms = 0.0;
    double consumed_pct = 0.0;
};

struct TrainOptions {
    int episodes = 300;
    int start_episode = 0;  // resume point
    /// Initial state per episode; defaults to what-if coverage by caller.
    std::function<sched::StateVector(int episode)> initial_state;
    /// Optional per-episode minimum-interval schedule (dt_min annealing).
    std::function<double(int episode)> dt_min_schedule;
    std::function<void(const EpisodeRecord&)> on_episode;
};

/// The training loop: observe, act (epsilon-greedy), step one day, store
/// the transition, and once the buffer holds a batch run critic, actor and
/// soft target updates. Returns the per-episode learning curve.
std::vector<EpisodeRecord> train(sched::ScheduleEnv& env, DdpgAgent& agent,
                                 const TrainOptions& options);

}  // namespace twincity::ddpg
