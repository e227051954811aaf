#include "twincity/simnet.hpp"

#include <algorithm>

namespace twincity::sim {

void SimConfig::validate() const {
    if (heartbeat_period_ms <= 0 || lease_multiple < 1) {
        throw std::invalid_argument("SimConfig: heartbeat period and lease multiple invalid");
    }
    if (!(bandwidth_bytes_per_ms > 0.0)) {
        throw std::invalid_argument("SimConfig: bandwidth must be > 0");
    }
    if (prop_delay_ms_min < 0 || prop_delay_ms_max < prop_delay_ms_min) {
        throw std::invalid_argument("SimConfig: propagation delay range invalid");
    }
    if (underlay_hops_min < 1 || underlay_hops_max < underlay_hops_min) {
        throw std::invalid_argument("SimConfig: underlay hop range invalid");
    }
    if (peer_degree < 0 || horizon_ms < 0) {
        throw std::invalid_argument("SimConfig: peer_degree/horizon invalid");
    }
}

SimNetwork::SimNetwork(SimConfig config, energy::BatteryModel battery)
    : config_(config), battery_(battery), topo_rng_(config.seed) {
    config_.validate();
    battery_.validate();
    // Every logical link maps onto 1..underlay_hops fresh physical links with
    // seeded propagation delays.
    auto allocator = [this](int, int) {
        std::uniform_int_distribution<int> hops(config_.underlay_hops_min,
                                                config_.underlay_hops_max);
        std::uniform_int_distribution<int> prop(config_.prop_delay_ms_min,
                                                config_.prop_delay_ms_max);
        std::vector<int> path;
        const int n = hops(topo_rng_);
        path.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            path.push_back(engine_.add_link(config_.bandwidth_bytes_per_ms,
                                            static_cast<double>(prop(topo_rng_))));
        }
        return path;
    };
    graph_ = std::make_unique<overlay::OverlayGraph>(config_.peer_degree, allocator);
}

Topic SimNetwork::domain_topic(DomainId domain) const {
    return Topic{"readings", domain};
}

int SimNetwork::add_participant(DomainId domain, overlay::NodeKind kind) {
    // Participant id == overlay node id; mint the guid from the id the
    // graph will assign next.
    const rtps::Guid guid{graph_->next_node_id(), 0};
    const int node_id = kind == overlay::NodeKind::DataGateway
                            ? graph_->add_gateway(guid, domain)
                            : graph_->register_twin(guid, domain, kind);
    participants_.emplace(node_id, rtps::Participant(guid, domain));
    return node_id;
}

void SimNetwork::add_domain(DomainId domain) {
    add_participant(domain, overlay::NodeKind::DataGateway);
    const Topic topic = domain_topic(domain);
    const int app = add_participant(domain, overlay::NodeKind::ServiceApp);
    participants_.at(app).add_reader(rtps::Guid{app, 1}, topic);
    graph_->subscribe(topic, app);
    service_app_by_domain_[domain.id] = app;
    if (started_) {
        announce_burst(app, engine_.now());
    }
}

int SimNetwork::add_device(DomainId domain, double battery_pct, std::int64_t payload_bytes) {
    const int device_id = static_cast<int>(devices_.size());
    const int node_id = add_participant(domain, overlay::NodeKind::TwinModel);
    participants_.at(node_id).add_writer(rtps::Guid{node_id, 1}, domain_topic(domain));
    devices_.push_back(make_device(device_id, domain, battery_pct, payload_bytes));
    devices_.back().state = rest_state_;
    device_energy_clock_.push_back(engine_.now());
    ledger_.track(device_id, battery_pct);
    twin_node_by_device_[device_id] = node_id;
    device_by_twin_node_[node_id] = device_id;
    if (started_) {
        announce_burst(node_id, engine_.now());
    }
    return device_id;
}

void SimNetwork::remove_device(int device_id) {
    const int node_id = twin_node_of(device_id);
    graph_->remove_node(node_id);
    participants_.erase(node_id);
    twin_node_by_device_.erase(device_id);
    device_by_twin_node_.erase(node_id);
}

void SimNetwork::start() {
    started_ = true;
    const SimTime now = engine_.now();
    for (const auto& [node_id, p] : participants_) {
        announce_burst(node_id, now);
    }
    for (const auto& [node_id, p] : participants_) {
        if (now + config_.heartbeat_period_ms <= config_.horizon_ms) {
            engine_.schedule(now + config_.heartbeat_period_ms, netsim::EventKind::HeartbeatTick,
                             [this, id = node_id](SimTime t) { heartbeat_tick(id, t); });
        }
    }
}

void SimNetwork::discovery_round() {
    for (const auto& [node_id, p] : participants_) {
        announce_burst(node_id, engine_.now());
    }
}

void SimNetwork::data_exchange_handshake() {
    const SimTime now = engine_.now();
    for (const auto& [domain_id, app] : service_app_by_domain_) {
        auto& p = participants_.at(app);
        broadcast_from(app, p.make_subscribe(rtps::Guid{app, 1},
                                             domain_topic(DomainId{domain_id}), now));
    }
    for (const auto& [node_id, p] : participants_) {
        if (graph_->node(node_id).kind == overlay::NodeKind::DataGateway) {
            broadcast_from(node_id, participants_.at(node_id).make_state_sync(now));
        }
    }
}

void SimNetwork::announce_burst(int node_id, SimTime now) {
    auto msgs = participants_.at(node_id).announce(now);
    for (const auto& m : msgs) {
        broadcast_from(node_id, m);
    }
}

void SimNetwork::heartbeat_tick(int node_id, SimTime now) {
    const auto it = participants_.find(node_id);
    if (it == participants_.end()) {
        return;  // participant went offline
    }
    broadcast_from(node_id, it->second.make_heartbeat(now));
    it->second.check_liveliness(now, lease_ms());
    if (now + config_.heartbeat_period_ms <= config_.horizon_ms) {
        engine_.schedule(now + config_.heartbeat_period_ms, netsim::EventKind::HeartbeatTick,
                         [this, node_id](SimTime t) { heartbeat_tick(node_id, t); });
    }
}

int SimNetwork::flow_id_for(const rtps::RtpsMessage& msg) const {
    if (msg.primitive == rtps::Primitive::Publish) {
        const auto it = device_by_twin_node_.find(msg.src.participant_id);
        if (it != device_by_twin_node_.end()) {
            return it->second;
        }
    }
    return msg.src.participant_id;
}

void SimNetwork::broadcast_from(int src_node, const rtps::RtpsMessage& msg) {
    const DomainId domain = graph_->node(src_node).domain;
    for (const auto& [node_id, p] : participants_) {
        if (node_id != src_node && graph_->node(node_id).domain == domain) {
            unicast(src_node, node_id, msg);
        }
    }
}

void SimNetwork::unicast(int src_node, int dst_node, const rtps::RtpsMessage& msg) {
    const auto hops = graph_->route(src_node, dst_node);
    std::vector<int> underlay;
    for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
        const auto key = std::minmax(hops[i], hops[i + 1]);
        const auto& link = graph_->links().at({key.first, key.second});
        underlay.insert(underlay.end(), link.underlay_path.begin(), link.underlay_path.end());
    }
    send_via(src_node, dst_node, msg, underlay);
}

void SimNetwork::send_via(int src_node, int dst_node, const rtps::RtpsMessage& msg,
                          const std::vector<int>& underlay_path) {
    if (src_node == dst_node || underlay_path.empty()) {
        // Same-node delivery has no physical hops; hand over immediately.
        engine_.schedule(engine_.now(), netsim::EventKind::Deliver,
                         [this, msg, dst_node](SimTime t) { on_delivered(msg, dst_node, t); });
        return;
    }
    engine_.send(msg, underlay_path, netsim::phase_of(msg.primitive), flow_id_for(msg),
                 [this, msg, dst_node](SimTime t) { on_delivered(msg, dst_node, t); });
}

void SimNetwork::on_delivered(const rtps::RtpsMessage& msg, int dst_node, SimTime t) {
    const auto it = participants_.find(dst_node);
    if (it == participants_.end()) {
        return;  // receiver went offline while the message was in flight
    }
    engine_.trace().record(t, msg, it->second.guid());
    auto replies = it->second.handle(msg, t);
    for (const auto& reply : replies) {
        if (reply.dst && participants_.contains(reply.dst->participant_id)) {
            unicast(dst_node, reply.dst->participant_id, reply);
        }
    }
}

bool SimNetwork::publish_reading(int device_id, std::optional<std::int64_t> payload_override) {
    Device& dev = device(device_id);
    const SimTime now = engine_.now();
    advance_devices_to(now);
    const std::int64_t payload = payload_override.value_or(dev.payload_bytes);
    const auto result =
        energy::wake_and_transmit(dev, battery_, payload, now, ledger_, rest_state_);
    if (result.skipped) {
        return false;
    }
    const int twin = twin_node_of(device_id);
    const Topic topic = domain_topic(dev.domain);
    auto& p = participants_.at(twin);
    const auto msg = p.make_publish(rtps::Guid{twin, 1}, topic, payload, now);
    for (const auto& target : graph_->propagate_update(topic, twin)) {
        send_via(twin, target.node_id, msg, target.underlay_path);
    }
    return true;
}

void SimNetwork::advance_devices_to(SimTime t) {
    for (auto& dev : devices_) {
        auto& clock = device_energy_clock_[static_cast<std::size_t>(dev.id)];
        if (t > clock) {
            energy::advance(dev, t - clock, battery_, ledger_);
            clock = t;
        }
    }
}

void SimNetwork::set_rest_state(DeviceState rest) {
    rest_state_ = rest;
    for (auto& dev : devices_) {
        if (dev.battery_pct > 0.0 && dev.state != DeviceState::Active) {
            dev.state = rest;
        }
    }
}

Device& SimNetwork::device(int device_id) {
    if (device_id < 0 || device_id >= static_cast<int>(devices_.size())) {
        throw std::invalid_argument("device: unknown device id");
    }
    return devices_[static_cast<std::size_t>(device_id)];
}

std::vector<int> SimNetwork::device_ids() const {
    std::vector<int> ids(devices_.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) {
        ids[i] = devices_[i].id;
    }
    return ids;
}

int SimNetwork::twin_node_of(int device_id) const {
    const auto it = twin_node_by_device_.find(device_id);
    if (it == twin_node_by_device_.end()) {
        throw std::invalid_argument("twin_node_of: unknown or removed device");
    }
    return it->second;
}

rtps::Participant& SimNetwork::participant(int node_id) {
    const auto it = participants_.find(node_id);
    if (it == participants_.end()) {
        throw std::invalid_argument("participant: unknown node id");
    }
    return it->second;
}

std::uint64_t SimNetwork::cross_domain_drops() const {
    std::uint64_t total = 0;
    for (const auto& [id, p] : participants_) {
        total += p.cross_domain_drops();
    }
    return total;
}

double SimNetwork::max_conservation_error() const {
    double worst = 0.0;
    for (const auto& dev : devices_) {
        const double expect = ledger_.initial_pct(dev.id) - dev.battery_pct;
        worst = std::max(worst, std::abs(expect - ledger_.consumed_pct(dev.id)));
    }
    return worst;
}

}  // namespace twincity::sim
