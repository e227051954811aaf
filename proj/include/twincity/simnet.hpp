#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "twincity/core.hpp"
#include "twincity/energy.hpp"
#include "twincity/netsim.hpp"
#include "twincity/overlay.hpp"
#include "twincity/rtps.hpp"

namespace twincity::sim {

/// Network-level knobs shared by every scenario.
struct SimConfig {
    std::uint64_t seed = 1;
    SimTime heartbeat_period_ms = 1000;
    int lease_multiple = 3;
    double bandwidth_bytes_per_ms = 12'500.0;
    int prop_delay_ms_min = 1;
    int prop_delay_ms_max = 5;
    int underlay_hops_min = 1;
    int underlay_hops_max = 3;
    int peer_degree = 2;
    SimTime horizon_ms = kMsPerDay;  // heartbeats stop after this

    void validate() const;
};

/// One running twin network: overlay topology, per-node protocol views,
/// devices with batteries, and the event engine tying them together.
/// Participant ids equal overlay node ids throughout.
class SimNetwork {
public:
    SimNetwork(SimConfig config, energy::BatteryModel battery);

    /// Creates the domain gateway and a service application subscribed to
    /// the domain's readings topic.
    void add_domain(DomainId domain);

    /// Creates a device plus its twin node (writer on the domain topic).
    /// Device ids are dense 0..N-1. If the network has started, the new
    /// participant announces itself immediately.
    int add_device(DomainId domain, double battery_pct, std::int64_t payload_bytes);

    /// Takes a device's twin offline; peers expire it once its lease runs out.
    void remove_device(int device_id);

    /// Announces every participant and starts heartbeat ticks.
    void start();

    /// One extra announcement round from every participant (discovery traffic).
    void discovery_round();

    /// Sends a SUBSCRIBE from each service app and a STATE_SYNC from each
    /// gateway (data-exchange control traffic).
    void data_exchange_handshake();

    /// Wakes the device, pays the energy cost and publishes its reading to
    /// every topic subscriber. Returns false when the battery was dead.
    bool publish_reading(int device_id, std::optional<std::int64_t> payload_override =
                             std::nullopt);

    /// Lazily drains every device's battery up to `t`.
    void advance_devices_to(SimTime t);

    /// Rest state devices return to after transmitting (Sleep under the
    /// managed policy; Idle/Active for baseline policies).
    void set_rest_state(DeviceState rest);
    DeviceState rest_state() const { return rest_state_; }

    netsim::Engine& engine() { return engine_; }
    const netsim::Engine& engine() const { return engine_; }
    overlay::OverlayGraph& graph() { return *graph_; }
    energy::EnergyLedger& ledger() { return ledger_; }
    const energy::BatteryModel& battery_model() const { return battery_; }
    const SimConfig& config() const { return config_; }

    Device& device(int device_id);
    const std::vector<Device>& devices() const { return devices_; }
    std::vector<int> device_ids() const;
    int twin_node_of(int device_id) const;
    Topic domain_topic(DomainId domain) const;
    rtps::Participant& participant(int node_id);
    const std::map<int, rtps::Participant>& participants() const { return participants_; }
    std::uint64_t cross_domain_drops() const;
    SimTime lease_ms() const {
        return config_.heartbeat_period_ms * config_.lease_multiple;
    }

    /// Largest |initial - battery - consumed| over all devices.
    double max_conservation_error() const;

private:
    int add_participant(DomainId domain, overlay::NodeKind kind);
    void announce_burst(int node_id, SimTime now);
    void broadcast_from(int src_node, const rtps::RtpsMessage& msg);
    void unicast(int src_node, int dst_node, const rtps::RtpsMessage& msg);
    void send_via(int src_node, int dst_node, const rtps::RtpsMessage& msg,
                  const std::vector<int>& underlay_path);
    void on_delivered(const rtps::RtpsMessage& msg, int dst_node, SimTime t);
    void heartbeat_tick(int node_id, SimTime now);
    int flow_id_for(const rtps::RtpsMessage& msg) const;

    SimConfig config_;
    energy::BatteryModel battery_;
    netsim::Engine engine_;
    std::unique_ptr<overlay::OverlayGraph> graph_;
    energy::EnergyLedger ledger_;
    std::mt19937_64 topo_rng_;
    std::map<int, rtps::Participant> participants_;
    std::vector<Device> devices_;
    std::vector<SimTime> device_energy_clock_;
    std::map<int, int> twin_node_by_device_;
    std::map<int, int> device_by_twin_node_;
    std::map<int, int> service_app_by_domain_;
    DeviceState rest_state_ = DeviceState::Sleep;
    bool started_ = false;
};

}  // namespace twincity::sim
