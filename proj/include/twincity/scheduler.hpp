#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "twincity/core.hpp"
#include "twincity/netsim.hpp"
#include "twincity/simnet.hpp"

namespace twincity::sched {

/// RL state: per-device battery percent and last transmission minute of day.
struct StateVector {
    std::vector<double> batteries;    // in [0, 100]
    std::vector<double> last_tx_min;  // in [0, 1440)

    std::size_t size() const { return batteries.size(); }

    /// Network input layout: batteries/100 then last_tx/1440, length 2N.
    std::vector<double> flatten_normalized() const;
};

/// Continuous per-device transmission minute within the day, in [0, 1440].
struct ActionVector {
    std::vector<double> minutes;

    std::size_t size() const { return minutes.size(); }
};

/// Minimum spacing between consecutive transmissions of one device.
struct ScheduleConstraint {
    double dt_min_minutes = 30.0;

    void validate() const;  // requires 0 <= dt_min < 1440
};

/// Reward components for one simulated day.
struct RewardBreakdown {
    double r_energy = 0.0;
    double r_timeliness = 0.0;   // <= 0
    double r_consecutive = 0.0;  // <= 0
    double r_total = 0.0;        // always the exact sum of the three
    double d_threshold_ms = 180.0;
    double lambda = 0.3;
};

/// One experience tuple for the replay buffer.
struct Transition {
    StateVector s;
    ActionVector a;
    double r = 0.0;
    StateVector s_next;
    bool terminal = true;  // day boundaries do not bootstrap
};

/// Per-device a_i' = max(a_i + dt_min, last_tx_i).
ActionVector enforce_min_interval(const ActionVector& a, std::span<const double> last_tx_min,
                                  const ScheduleConstraint& constraint);

/// Sum of post-transmission battery levels.
double reward_energy(std::span<const double> batteries_after);

/// -sum(max(0, D_i - threshold)); zero iff every delay is within threshold.
double reward_timeliness(std::span<const double> delays_ms, double d_threshold_ms);

/// -lambda * sum(max(0, dt_min - (a_i' - a_i))).
double reward_consecutive(const ActionVector& a, const ActionVector& a_prime,
                          const ScheduleConstraint& constraint, double lambda);

/// Assembles the breakdown; r_total is the exact sum of the components.
RewardBreakdown reward_total(double r_energy, double r_timeliness, double r_consecutive,
                             double d_threshold_ms, double lambda);

/// Value ranges for what-if state generation.
struct WhatIfRanges {
    double battery_lo = 0.0;
    double battery_hi = 100.0;
    double last_tx_lo = 0.0;
    double last_tx_hi = 1440.0;

    void validate() const;
};

/// Seeded Latin-hypercube-style coverage of the state space: every
/// dimension is stratified into n_states bins (one sample at each bin
/// center) and the bin order is shuffled per dimension by the seed.
std::vector<StateVector> whatif_generate(std::uint64_t seed, int n_states, int n_devices,
                                         const WhatIfRanges& ranges = {});

struct EnvConfig {
    double d_threshold_ms = 180.0;
    double lambda = 0.3;
    double dt_min_minutes = 30.0;
};

struct StepResult {
    StateVector next;
    RewardBreakdown reward;
    ActionVector applied;  // after clamping and the min-interval constraint
    /// Per-device worst-subscriber delay for the day; nullopt when the
    /// device delivered nothing (dead battery or rolled past day end).
    std::vector<std::optional<double>> delay_ms;
    /// Latency samples recorded during the day, both phases.
    std::vector<netsim::LatencySample> samples;
};

/// The RL environment: one step simulates one 24-hour day on the twin
/// network. reset() rebuilds a fresh network (optionally injecting a
/// what-if state); repeated step() calls run consecutive days.
class ScheduleEnv {
public:
    using NetworkBuilder = std::function<std::unique_ptr<sim::SimNetwork>()>;

    ScheduleEnv(NetworkBuilder builder, EnvConfig config);

    int n_devices() const { return n_devices_; }
    const EnvConfig& config() const { return config_; }
    void set_dt_min(double minutes);

    /// Fresh network at day 0. Returns the initial state.
    StateVector reset(const std::optional<StateVector>& inject = std::nullopt);

    /// Runs one day under the given action vector. Requires reset() first.
    StepResult step(const ActionVector& action);

    /// Runs one day with every device Active and transmitting hourly
    /// (always-on baseline mechanism; bypasses the daily action).
    StepResult run_always_active_day();

    StateVector observe() const;
    sim::SimNetwork& net();
    int day_index() const { return day_index_; }

private:
    StepResult run_day(const std::vector<std::pair<int, SimTime>>& wake_schedule,
                       const ActionVector& clamped, const ActionVector& applied);

    NetworkBuilder builder_;
    EnvConfig config_;
    std::unique_ptr<sim::SimNetwork> net_;
    int n_devices_ = 0;
    int day_index_ = 0;
};

}  // namespace twincity::sched
