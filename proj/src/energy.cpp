#include "twincity/energy.hpp"

#include <algorithm>
#include <sstream>

namespace twincity::energy {

double BatteryModel::drain_rate(DeviceState state) const {
    switch (state) {
        case DeviceState::Idle: return idle_drain_pct_per_min;
        case DeviceState::Active: return active_drain_pct_per_min;
        case DeviceState::Sleep: return sleep_drain_pct_per_min;
    }
    return 0.0;
}

void BatteryModel::validate() const {
    if (sleep_drain_pct_per_min < 0 || idle_drain_pct_per_min < 0 ||
        active_drain_pct_per_min < 0 || wake_cost_pct < 0 || tx_cost_pct_per_kb < 0) {
        throw std::invalid_argument("BatteryModel: rates must be >= 0");
    }
    if (!(sleep_drain_pct_per_min <= idle_drain_pct_per_min &&
          idle_drain_pct_per_min <= active_drain_pct_per_min)) {
        throw std::invalid_argument("BatteryModel: requires sleep <= idle <= active drain");
    }
}

void EnergyLedger::track(int device_id, double initial_pct) {
    entries_[device_id] = Entry{initial_pct, 0.0, 0};
}

double EnergyLedger::initial_pct(int device_id) const {
    return entries_.at(device_id).initial_pct;
}

double EnergyLedger::consumed_pct(int device_id) const {
    return entries_.at(device_id).consumed_pct;
}

double EnergyLedger::total_consumption() const {
    double total = 0.0;
    for (const auto& [id, e] : entries_) {
        total += e.consumed_pct;
    }
    return total;
}

double EnergyLedger::consume(int device_id, double amount) {
    Entry& e = entries_.at(device_id);
    e.consumed_pct += amount;
    return e.initial_pct - e.consumed_pct;
}

void EnergyLedger::flag_skipped_tx(int device_id) {
    ++entries_.at(device_id).skipped_tx;
}

int EnergyLedger::skipped_tx(int device_id) const {
    return entries_.at(device_id).skipped_tx;
}

std::vector<int> EnergyLedger::device_ids() const {
    std::vector<int> ids;
    for (const auto& [id, e] : entries_) {
        ids.push_back(id);
    }
    return ids;
}

std::string EnergyLedger::report() const {
    std::ostringstream out;
    out << "device_id initial_pct consumed_pct skipped_tx\n";
    for (const auto& [id, e] : entries_) {
        out << id << ' ' << e.initial_pct << ' ' << e.consumed_pct << ' ' << e.skipped_tx
            << '\n';
    }
    out << "total_consumed_pct=" << total_consumption() << '\n';
    return out.str();
}

namespace {

constexpr double kDeadEps = 1e-12;

// All battery movement funnels through here so battery and ledger cannot
// drift apart: battery is recomputed from the ledger after each charge.
double charge(Device& device, double amount, EnergyLedger& ledger) {
    const double actual = std::min(amount, device.battery_pct);
    device.battery_pct = std::max(0.0, ledger.consume(device.id, actual));
    if (device.battery_pct <= kDeadEps) {
        device.battery_pct = 0.0;
        device.state = DeviceState::Sleep;  // dead devices stay asleep
    }
    return actual;
}

}  // namespace

void advance(Device& device, SimTime dt_ms, const BatteryModel& model, EnergyLedger& ledger) {
    if (dt_ms < 0) {
        throw std::invalid_argument("advance: dt_ms must be >= 0");
    }
    if (dt_ms == 0 || device.battery_pct <= 0.0) {
        return;
    }
    const double minutes = static_cast<double>(dt_ms) / static_cast<double>(kMsPerMinute);
    charge(device, model.drain_rate(device.state) * minutes, ledger);
}

TransmitResult wake_and_transmit(Device& device, const BatteryModel& model,
                                 std::int64_t payload_bytes, SimTime now, EnergyLedger& ledger,
                                 DeviceState rest_state) {
    if (payload_bytes < 0) {
        throw std::invalid_argument("wake_and_transmit: payload_bytes must be >= 0");
    }
    if (device.battery_pct <= 0.0) {
        ledger.flag_skipped_tx(device.id);
        return TransmitResult{0.0, true};
    }
    double cost = 0.0;
    if (device.state != DeviceState::Active) {
        cost += model.wake_cost_pct;
    }
    device.state = DeviceState::Active;
    cost += model.tx_cost_pct_per_kb * (static_cast<double>(payload_bytes) / 1024.0);
    const double consumed = charge(device, cost, ledger);
    device.last_tx = now;
    if (device.battery_pct > 0.0) {
        device.state = rest_state;
    }
    return TransmitResult{consumed, false};
}

double battery_at(const Device& device, SimTime schedule_time, const BatteryModel& model,
                  SimTime day_start) {
    if (schedule_time < day_start) {
        throw std::invalid_argument("battery_at: schedule_time before day_start");
    }
    if (device.battery_pct <= 0.0) {
        return 0.0;
    }
    const double minutes = static_cast<double>(schedule_time - day_start) /
                           static_cast<double>(kMsPerMinute);
    double level = device.battery_pct - model.drain_rate(device.state) * minutes;
    if (device.state != DeviceState::Active) {
        level -= model.wake_cost_pct;
    }
    level -= model.tx_cost_pct_per_kb * (static_cast<double>(device.payload_bytes) / 1024.0);
    return std::max(0.0, level);
}

std::vector<double> normalize(std::span<const double> values, double reference_max) {
    if (!(reference_max > 0.0)) {
        throw std::invalid_argument("normalize: reference_max must be > 0");
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        out.push_back(v / reference_max);
    }
    return out;
}

}  // namespace twincity::energy
