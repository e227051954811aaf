#include "twincity/core.hpp"

#include <cmath>

namespace twincity {

SimTime minutes_to_simtime(double minutes) {
    if (!(minutes >= 0.0)) {
        throw std::invalid_argument("minutes_to_simtime: minutes must be >= 0");
    }
    return static_cast<SimTime>(std::llround(minutes * static_cast<double>(kMsPerMinute)));
}

std::string domain_name(DomainId domain) {
    switch (domain.id) {
        case 0: return "AIR_Q_DOMAIN";
        case 1: return "TRANSPORT_DOMAIN";
        case 2: return "SMART_FARM_DOMAIN";
        default: return "DOMAIN_" + std::to_string(domain.id);
    }
}

std::string to_string(DeviceState state) {
    switch (state) {
        case DeviceState::Idle: return "Idle";
        case DeviceState::Active: return "Active";
        case DeviceState::Sleep: return "Sleep";
    }
    return "?";
}

Device make_device(int id, DomainId domain, double battery_pct, std::int64_t payload_bytes) {
    if (!(battery_pct >= 0.0 && battery_pct <= 100.0)) {
        throw std::invalid_argument("make_device: battery_pct must lie in [0, 100]");
    }
    if (payload_bytes < 1) {
        throw std::invalid_argument("make_device: payload_bytes must be >= 1");
    }
    Device d;
    d.id = id;
    d.domain = domain;
    d.battery_pct = battery_pct;
    d.state = DeviceState::Idle;
    d.last_tx = 0;
    d.payload_bytes = payload_bytes;
    return d;
}

}  // namespace twincity
