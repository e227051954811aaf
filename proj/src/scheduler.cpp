#include "twincity/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace twincity::sched {

std::vector<double> StateVector::flatten_normalized() const {
    std::vector<double> out;
    out.reserve(batteries.size() + last_tx_min.size());
    for (double b : batteries) {
        out.push_back(b / 100.0);
    }
    for (double t : last_tx_min) {
        out.push_back(t / kMinutesPerDay);
    }
    return out;
}

void ScheduleConstraint::validate() const {
    if (!(dt_min_minutes >= 0.0 && dt_min_minutes < kMinutesPerDay)) {
        throw std::invalid_argument("ScheduleConstraint: dt_min must lie in [0, 1440)");
    }
}

ActionVector enforce_min_interval(const ActionVector& a, std::span<const double> last_tx_min,
                                  const ScheduleConstraint& constraint) {
    constraint.validate();
    if (a.minutes.size() != last_tx_min.size()) {
        throw std::invalid_argument("enforce_min_interval: vector lengths differ");
    }
    ActionVector out;
    out.minutes.reserve(a.minutes.size());
    for (std::size_t i = 0; i < a.minutes.size(); ++i) {
        out.minutes.push_back(std::max(a.minutes[i] + constraint.dt_min_minutes,
                                       last_tx_min[i]));
    }
    return out;
}

double reward_energy(std::span<const double> batteries_after) {
    return std::accumulate(batteries_after.begin(), batteries_after.end(), 0.0);
}

double reward_timeliness(std::span<const double> delays_ms, double d_threshold_ms) {
    double penalty = 0.0;
    for (double d : delays_ms) {
        penalty += std::max(0.0, d - d_threshold_ms);
    }
    return -penalty;
}

double reward_consecutive(const ActionVector& a, const ActionVector& a_prime,
                          const ScheduleConstraint& constraint, double lambda) {
    if (lambda < 0.0) {
        throw std::invalid_argument("reward_consecutive: lambda must be >= 0");
    }
    if (a.minutes.size() != a_prime.minutes.size()) {
        throw std::invalid_argument("reward_consecutive: vector lengths differ");
    }
    double penalty = 0.0;
    for (std::size_t i = 0; i < a.minutes.size(); ++i) {
        penalty += std::max(0.0, constraint.dt_min_minutes -
                                     (a_prime.minutes[i] - a.minutes[i]));
    }
    return -lambda * penalty;
}

RewardBreakdown reward_total(double r_energy, double r_timeliness, double r_consecutive,
                             double d_threshold_ms, double lambda) {
    RewardBreakdown b;
    b.r_energy = r_energy;
    b.r_timeliness = r_timeliness;
    b.r_consecutive = r_consecutive;
    b.r_total = r_energy + r_timeliness + r_consecutive;
    b.d_threshold_ms = d_threshold_ms;
    b.lambda = lambda;
    return b;
}

void WhatIfRanges::validate() const {
    if (!(0.0 <= battery_lo && battery_lo <= battery_hi && battery_hi <= 100.0)) {
        throw std::invalid_argument("WhatIfRanges: battery range invalid");
    }
    if (!(0.0 <= last_tx_lo && last_tx_lo <= last_tx_hi && last_tx_hi <= kMinutesPerDay)) {
        throw std::invalid_argument("WhatIfRanges: last_tx range invalid");
    }
}

std::vector<StateVector> whatif_generate(std::uint64_t seed, int n_states, int n_devices,
                                         const WhatIfRanges& ranges) {
    if (n_states < 1 || n_devices < 1) {
        throw std::invalid_argument("whatif_generate: n_states and n_devices must be >= 1");
    }
    ranges.validate();
    std::mt19937_64 rng(seed);

    // One shuffled bin-center column per dimension.
    const auto column = [&](double lo, double hi) {
        std::vector<double> vals(static_cast<std::size_t>(n_states));
        const double width = (hi - lo) / static_cast<double>(n_states);
        for (int j = 0; j < n_states; ++j) {
            vals[static_cast<std::size_t>(j)] = lo + (static_cast<double>(j) + 0.5) * width;
        }
        std::shuffle(vals.begin(), vals.end(), rng);
        return vals;
    };

    std::vector<std::vector<double>> battery_cols;
    std::vector<std::vector<double>> tx_cols;
    for (int d = 0; d < n_devices; ++d) {
        battery_cols.push_back(column(ranges.battery_lo, ranges.battery_hi));
        tx_cols.push_back(column(ranges.last_tx_lo, ranges.last_tx_hi));
    }

    std::vector<StateVector> states(static_cast<std::size_t>(n_states));
    for (int j = 0; j < n_states; ++j) {
        auto& s = states[static_cast<std::size_t>(j)];
        for (int d = 0; d < n_devices; ++d) {
            s.batteries.push_back(battery_cols[static_cast<std::size_t>(d)]
                                              [static_cast<std::size_t>(j)]);
            s.last_tx_min.push_back(tx_cols[static_cast<std::size_t>(d)]
                                           [static_cast<std::size_t>(j)]);
        }
    }
    return states;
}

ScheduleEnv::ScheduleEnv(NetworkBuilder builder, EnvConfig config)
    : builder_(std::move(builder)), config_(config) {
    if (!builder_) {
        throw std::invalid_argument("ScheduleEnv: network builder required");
    }
    ScheduleConstraint{config_.dt_min_minutes}.validate();
}

void ScheduleEnv::set_dt_min(double minutes) {
    ScheduleConstraint{minutes}.validate();
    config_.dt_min_minutes = minutes;
}

StateVector ScheduleEnv::reset(const std::optional<StateVector>& inject) {
    net_ = builder_();
    if (!net_) {
        throw std::runtime_error("ScheduleEnv: builder produced no network");
    }
    n_devices_ = static_cast<int>(net_->devices().size());
    day_index_ = 0;
    if (inject) {
        if (static_cast<int>(inject->size()) != n_devices_ ||
            inject->last_tx_min.size() != inject->batteries.size()) {
            throw std::invalid_argument("reset: injected state has wrong dimension");
        }
        for (int i = 0; i < n_devices_; ++i) {
            Device& dev = net_->device(i);
            dev.battery_pct = inject->batteries[static_cast<std::size_t>(i)];
            net_->ledger().track(i, dev.battery_pct);
            if (dev.battery_pct <= 0.0) {
                dev.battery_pct = 0.0;
                dev.state = DeviceState::Sleep;
            }
            // Modeled prior history: the minute of day of yesterday's send.
            dev.last_tx =
                minutes_to_simtime(inject->last_tx_min[static_cast<std::size_t>(i)]);
        }
    }
    net_->start();
    return observe();
}

StateVector ScheduleEnv::observe() const {
    if (!net_) {
        throw std::runtime_error("ScheduleEnv: reset() required before observe()");
    }
    StateVector s;
    for (const Device& dev : net_->devices()) {
        s.batteries.push_back(dev.battery_pct);
        s.last_tx_min.push_back(
            static_cast<double>(dev.last_tx % kMsPerDay) / static_cast<double>(kMsPerMinute));
    }
    return s;
}

sim::SimNetwork& ScheduleEnv::net() {
    if (!net_) {
        throw std::runtime_error("ScheduleEnv: reset() required before net()");
    }
    return *net_;
}

StepResult ScheduleEnv::step(const ActionVector& action) {
    if (!net_) {
        throw std::runtime_error("ScheduleEnv: reset() required before step()");
    }
    if (static_cast<int>(action.size()) != n_devices_) {
        throw std::invalid_argument("step: action dimension mismatch");
    }
    // Actor outputs may overshoot; the environment boundary clamps.
    ActionVector clamped;
    clamped.minutes.reserve(action.minutes.size());
    for (double m : action.minutes) {
        clamped.minutes.push_back(std::clamp(m, 0.0, kMinutesPerDay));
    }
    const StateVector cur = observe();
    const ScheduleConstraint constraint{config_.dt_min_minutes};
    const ActionVector applied = enforce_min_interval(clamped, cur.last_tx_min, constraint);

    const SimTime day_start = static_cast<SimTime>(day_index_) * kMsPerDay;
    std::vector<std::pair<int, SimTime>> wake_schedule;
    for (int i = 0; i < n_devices_; ++i) {
        wake_schedule.emplace_back(
            i, day_start + minutes_to_simtime(applied.minutes[static_cast<std::size_t>(i)]));
    }
    return run_day(wake_schedule, clamped, applied);
}

StepResult ScheduleEnv::run_always_active_day() {
    if (!net_) {
        throw std::runtime_error("ScheduleEnv: reset() required before stepping");
    }
    net_->set_rest_state(DeviceState::Active);
    const SimTime day_start = static_cast<SimTime>(day_index_) * kMsPerDay;
    std::vector<std::pair<int, SimTime>> wake_schedule;
    for (int i = 0; i < n_devices_; ++i) {
        for (int hour = 0; hour < 24; ++hour) {
            wake_schedule.emplace_back(i, day_start + hour * 60 * kMsPerMinute);
        }
    }
    ActionVector anchor;
    anchor.minutes.assign(static_cast<std::size_t>(n_devices_), 0.0);
    return run_day(wake_schedule, anchor, anchor);
}

StepResult ScheduleEnv::run_day(const std::vector<std::pair<int, SimTime>>& wake_schedule,
                                const ActionVector& clamped, const ActionVector& applied) {
    auto& engine = net_->engine();
    const SimTime day_start = static_cast<SimTime>(day_index_) * kMsPerDay;
    const SimTime day_end = day_start + kMsPerDay;
    const std::size_t sample_mark = engine.stats().samples.size();

    // Battery level right after each device's (first) transmission today.
    // Shared with the wake events: a transmission adjusted past day end
    // stays queued and fires on a later day, after this frame is gone.
    auto battery_after = std::make_shared<std::vector<std::optional<double>>>(
        static_cast<std::size_t>(n_devices_));
    for (const auto& [device_id, at] : wake_schedule) {
        engine.schedule(at, netsim::EventKind::DeviceWake,
                        [this, id = device_id, battery_after](SimTime) {
                            const bool ok = net_->publish_reading(id);
                            auto& slot = (*battery_after)[static_cast<std::size_t>(id)];
                            if (!slot) {
                                slot = ok ? net_->device(id).battery_pct : 0.0;
                            }
                        });
    }
    engine.schedule(day_end, netsim::EventKind::EpisodeEnd,
                    [this](SimTime t) { net_->advance_devices_to(t); });
    engine.run_until(day_end);

    StepResult result;
    result.applied = applied;
    result.samples.assign(engine.stats().samples.begin() +
                              static_cast<std::ptrdiff_t>(sample_mark),
                          engine.stats().samples.end());

    // Worst-subscriber delay per device over today's data-exchange samples.
    result.delay_ms.assign(static_cast<std::size_t>(n_devices_), std::nullopt);
    for (const auto& s : result.samples) {
        if (s.phase != netsim::Phase::DataExchange || s.flow_id < 0 ||
            s.flow_id >= n_devices_) {
            continue;
        }
        auto& slot = result.delay_ms[static_cast<std::size_t>(s.flow_id)];
        slot = slot ? std::max(*slot, s.d_ms) : s.d_ms;
    }

    double energy_sum = 0.0;
    for (int i = 0; i < n_devices_; ++i) {
        const auto& after = (*battery_after)[static_cast<std::size_t>(i)];
        // Devices that never transmitted today contribute their end-of-day
        // level (dead devices contribute zero).
        energy_sum += after ? *after : net_->device(i).battery_pct;
    }
    std::vector<double> delays;
    for (const auto& d : result.delay_ms) {
        if (d) {
            delays.push_back(*d);
        }
    }
    const double r_time = reward_timeliness(delays, config_.d_threshold_ms);
    const double r_consec = reward_consecutive(clamped, applied,
                                               ScheduleConstraint{config_.dt_min_minutes},
                                               config_.lambda);
    result.reward = reward_total(energy_sum, r_time, r_consec, config_.d_threshold_ms,
                                 config_.lambda);
    ++day_index_;
    result.next = observe();
    return result;
}

}  // namespace twincity::sched
