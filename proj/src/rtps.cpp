#include "twincity/rtps.hpp"

#include <algorithm>

namespace twincity::rtps {

std::string to_string(Primitive p) {
    switch (p) {
        case Primitive::DataAvailable: return "DATA_AVAILABLE";
        case Primitive::Info: return "INFO";
        case Primitive::DataW: return "DATA_W";
        case Primitive::DataR: return "DATA_R";
        case Primitive::Heartbeat: return "HEARTBEAT";
        case Primitive::Publish: return "PUBLISH";
        case Primitive::Subscribe: return "SUBSCRIBE";
        case Primitive::StateSync: return "STATE_SYNC";
    }
    return "?";
}

std::string to_string(const Guid& g) {
    return std::to_string(g.participant_id) + ":" + std::to_string(g.entity_id);
}

std::vector<std::pair<Guid, Guid>> match_endpoints(const std::set<EndpointEntry>& writers,
                                                   const std::set<EndpointEntry>& readers) {
    std::vector<std::pair<Guid, Guid>> pairs;
    for (const auto& [w, wt] : writers) {
        for (const auto& [r, rt] : readers) {
            if (wt == rt) {
                pairs.emplace_back(w, r);
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

Participant::Participant(Guid guid, DomainId domain) : guid_(guid), domain_(domain) {
    known_.insert(guid_);  // a view always knows itself
}

void Participant::add_writer(Guid endpoint, Topic topic) {
    if (topic.domain != domain_) {
        throw std::invalid_argument("add_writer: topic domain differs from participant domain");
    }
    writers_.emplace(endpoint, std::move(topic));
}

void Participant::add_reader(Guid endpoint, Topic topic) {
    if (topic.domain != domain_) {
        throw std::invalid_argument("add_reader: topic domain differs from participant domain");
    }
    readers_.emplace(endpoint, std::move(topic));
}

RtpsMessage Participant::make(Primitive p, std::optional<Guid> dst, std::optional<Topic> topic,
                              std::int64_t payload_bytes, SimTime now) {
    RtpsMessage m;
    m.seq = next_seq_++;
    m.src = guid_;
    m.dst = dst;
    m.domain = domain_;
    m.primitive = p;
    m.topic = std::move(topic);
    m.payload_bytes = payload_bytes;
    m.sent_at = now + clock_offset_ms_;
    return m;
}

std::vector<RtpsMessage> Participant::announce(SimTime now) {
    std::vector<RtpsMessage> out;
    out.push_back(make(Primitive::DataAvailable, std::nullopt, std::nullopt,
                       kDiscoveryPayloadBytes, now));
    out.push_back(make(Primitive::Info, std::nullopt, std::nullopt, kDiscoveryPayloadBytes, now));
    for (const auto& [endpoint, topic] : writers_) {
        auto m = make(Primitive::DataW, std::nullopt, topic, kDiscoveryPayloadBytes, now);
        m.src = endpoint;  // announces the endpoint, not the participant
        out.push_back(std::move(m));
    }
    for (const auto& [endpoint, topic] : readers_) {
        auto m = make(Primitive::DataR, std::nullopt, topic, kDiscoveryPayloadBytes, now);
        m.src = endpoint;
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<RtpsMessage> Participant::handle(const RtpsMessage& msg, SimTime now) {
    if (msg.domain != domain_) {
        ++cross_domain_drops_;
        return {};
    }
    std::vector<RtpsMessage> replies;
    const Guid sender{msg.src.participant_id, 0};
    switch (msg.primitive) {
        case Primitive::DataAvailable:
        case Primitive::Info: {
            const bool was_known = known_.contains(sender);
            known_.insert(sender);
            last_heartbeat_[sender] = now;
            if (!was_known) {
                // Reply-on-first-contact: unicast our own announce set back
                // so discovery converges both ways.
                replies = announce(now);
                for (auto& r : replies) {
                    r.dst = sender;
                }
            }
            break;
        }
        case Primitive::DataW:
            known_.insert(sender);
            writers_.emplace(msg.src, *msg.topic);
            break;
        case Primitive::DataR:
            known_.insert(sender);
            readers_.emplace(msg.src, *msg.topic);
            break;
        case Primitive::Subscribe:
            // A subscriber expressing interest behaves like a reader
            // registration at data-exchange time.
            known_.insert(sender);
            readers_.emplace(msg.src, *msg.topic);
            break;
        case Primitive::Heartbeat:
            known_.insert(sender);
            last_heartbeat_[sender] = now;
            break;
        case Primitive::Publish:
            for (const auto& [reader, topic] : readers_) {
                if (reader.participant_id == guid_.participant_id && msg.topic &&
                    topic == *msg.topic) {
                    inbox_.push_back(Delivery{reader, msg});
                }
            }
            break;
        case Primitive::StateSync:
            clock_offset_ms_ = msg.sent_at - now;
            break;
    }
    return replies;
}

RtpsMessage Participant::make_heartbeat(SimTime now) {
    return make(Primitive::Heartbeat, std::nullopt, std::nullopt, kDiscoveryPayloadBytes, now);
}

RtpsMessage Participant::make_publish(Guid writer, const Topic& topic,
                                      std::int64_t payload_bytes, SimTime now) {
    if (payload_bytes < 0) {
        throw std::invalid_argument("make_publish: payload_bytes must be >= 0");
    }
    RtpsMessage m = make(Primitive::Publish, std::nullopt, topic, payload_bytes, now);
    m.src = writer;
    return m;
}

RtpsMessage Participant::make_subscribe(Guid reader, const Topic& topic, SimTime now) {
    RtpsMessage m = make(Primitive::Subscribe, std::nullopt, topic, kDiscoveryPayloadBytes, now);
    m.src = reader;
    return m;
}

RtpsMessage Participant::make_state_sync(SimTime now) {
    return make(Primitive::StateSync, std::nullopt, std::nullopt, kDiscoveryPayloadBytes, now);
}

std::vector<Guid> Participant::check_liveliness(SimTime now, std::int64_t lease_ms) {
    if (lease_ms <= 0) {
        throw std::invalid_argument("check_liveliness: lease_ms must be > 0");
    }
    std::vector<Guid> expired;
    for (const auto& [g, t] : last_heartbeat_) {
        if (g != guid_ && now - t > lease_ms) {
            expired.push_back(g);
        }
    }
    for (const Guid& g : expired) {
        known_.erase(g);
        last_heartbeat_.erase(g);
        std::erase_if(writers_, [&](const EndpointEntry& e) {
            return e.first.participant_id == g.participant_id;
        });
        std::erase_if(readers_, [&](const EndpointEntry& e) {
            return e.first.participant_id == g.participant_id;
        });
    }
    return expired;
}

void Participant::state_sync(SimTime peer_timestamp, SimTime local_timestamp) {
    clock_offset_ms_ = peer_timestamp - local_timestamp;
}

std::vector<std::pair<Guid, Guid>> Participant::matches() const {
    return match_endpoints(writers_, readers_);
}

}  // namespace twincity::rtps
