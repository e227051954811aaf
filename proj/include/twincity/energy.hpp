#pragma once

#include <map>
#include <span>
#include <vector>

#include "twincity/core.hpp"

namespace twincity::energy {

/// Per-state battery drain rates and transmission costs, all in percent.
/// Defaults give a managed device roughly 1-2% consumption per day.
struct BatteryModel {
    double sleep_drain_pct_per_min = 0.0005;
    double idle_drain_pct_per_min = 0.01;
    double active_drain_pct_per_min = 0.05;
    double wake_cost_pct = 0.2;
    double tx_cost_pct_per_kb = 0.3;

    double drain_rate(DeviceState state) const;
    void validate() const;  // requires sleep <= idle <= active, all >= 0
};

/// Cumulative per-device consumption ledger. The device battery is derived
/// from the accumulated consumption so the conservation identity
/// initial - battery == consumed holds to rounding of a single subtraction.
class EnergyLedger {
public:
    void track(int device_id, double initial_pct);
    bool tracked(int device_id) const { return entries_.contains(device_id); }

    double initial_pct(int device_id) const;
    double consumed_pct(int device_id) const;

    /// Sum of consumed_pct over all tracked devices.
    double total_consumption() const;

    /// Records `amount` percent consumed and returns the new battery level.
    double consume(int device_id, double amount);

    void flag_skipped_tx(int device_id);
    int skipped_tx(int device_id) const;

    std::vector<int> device_ids() const;

    /// Text export: one line per device plus the total.
    std::string report() const;

private:
    struct Entry {
        double initial_pct = 0.0;
        double consumed_pct = 0.0;
        int skipped_tx = 0;
    };
    std::map<int, Entry> entries_;
};

/// Drains the device for dt_ms in its current state. A device that reaches
/// battery 0 goes to Sleep and stays there.
void advance(Device& device, SimTime dt_ms, const BatteryModel& model, EnergyLedger& ledger);

struct TransmitResult {
    double consumed_pct = 0.0;
    bool skipped = false;  // dead battery, transmission flagged and skipped
};

/// Wakes the device (unless already Active), pays wake + transmission cost,
/// records last_tx = now and puts the device into rest_state afterwards.
TransmitResult wake_and_transmit(Device& device, const BatteryModel& model,
                                 std::int64_t payload_bytes, SimTime now, EnergyLedger& ledger,
                                 DeviceState rest_state = DeviceState::Sleep);

/// Predicted battery level right after a transmission scheduled at
/// schedule_time: drains from day_start in the device's current (rest)
/// state, then subtracts wake and transmission costs. Clamped at 0.
double battery_at(const Device& device, SimTime schedule_time, const BatteryModel& model,
                  SimTime day_start);

/// Divides every value by reference_max (> 0 required).
std::vector<double> normalize(std::span<const double> values, double reference_max);

}  // namespace twincity::energy
