#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace twincity {

/// Simulation clock value in integer milliseconds since simulation start.
/// A single integer base unit keeps event ordering exact.
using SimTime = std::int64_t;

inline constexpr SimTime kMsPerMinute = 60'000;
inline constexpr SimTime kMsPerDay = 86'400'000;
inline constexpr double kMinutesPerDay = 1440.0;

/// Converts a non-negative duration in minutes to SimTime milliseconds.
SimTime minutes_to_simtime(double minutes);

/// Service-based domain identifier. Ids 0..2 carry the three built-in
/// smart-city service names; higher ids are allowed for extensions.
struct DomainId {
    int id = 0;

    auto operator<=>(const DomainId&) const = default;
};

inline constexpr DomainId kAirQualityDomain{0};
inline constexpr DomainId kTransportDomain{1};
inline constexpr DomainId kSmartFarmDomain{2};

/// Canonical name for a domain id ("AIR_Q_DOMAIN", ... or "DOMAIN_<n>").
std::string domain_name(DomainId domain);

/// Operational state of a physical device.
enum class DeviceState { Idle, Active, Sleep };

std::string to_string(DeviceState state);

/// A physical publisher: battery-constrained IoT device producing one
/// reading per day.
struct Device {
    int id = 0;
    DomainId domain{};
    double battery_pct = 100.0;      // in [0, 100], never increases
    DeviceState state = DeviceState::Idle;
    SimTime last_tx = 0;             // most recent completed transmission
    std::int64_t payload_bytes = 1;  // size of one daily reading
};

/// Validates ranges and returns a fresh Idle device with last_tx = 0.
Device make_device(int id, DomainId domain, double battery_pct, std::int64_t payload_bytes);

/// A named data channel scoped to one domain. Topics never cross domains.
struct Topic {
    std::string name;
    DomainId domain{};

    auto operator<=>(const Topic&) const = default;
};

}  // namespace twincity
