#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "twincity/core.hpp"

namespace twincity::rtps {

/// The eight wire primitives of the twin-layer operation set.
enum class Primitive {
    DataAvailable,
    Info,
    DataW,
    DataR,
    Heartbeat,
    Publish,
    Subscribe,
    StateSync,
};

/// Uppercase wire name (DATA_AVAILABLE, INFO, ...), as used in trace logs.
std::string to_string(Primitive p);

/// Globally unique entity identifier. entity_id 0 is the participant itself;
/// positive entity ids are reader/writer endpoints of that participant.
struct Guid {
    int participant_id = 0;
    int entity_id = 0;

    auto operator<=>(const Guid&) const = default;
};

std::string to_string(const Guid& g);  // "participant:entity"

/// Nominal size of a discovery-class message; data messages carry the
/// configured payload so volume sweeps can count discovery traffic.
inline constexpr std::int64_t kDiscoveryPayloadBytes = 256;

/// One protocol message instance. dst == nullopt means domain broadcast.
struct RtpsMessage {
    std::uint64_t seq = 0;  // per-source monotone counter
    Guid src{};
    std::optional<Guid> dst{};
    DomainId domain{};
    Primitive primitive = Primitive::Info;
    std::optional<Topic> topic{};
    std::int64_t payload_bytes = 0;
    SimTime sent_at = 0;
};

using EndpointEntry = std::pair<Guid, Topic>;

/// Returns all (writer, reader) pairs sharing topic and domain, sorted by
/// (writer guid, reader guid) so matching is deterministic.
std::vector<std::pair<Guid, Guid>> match_endpoints(const std::set<EndpointEntry>& writers,
                                                   const std::set<EndpointEntry>& readers);

/// A PUBLISH handed to one of the local matched readers.
struct Delivery {
    Guid reader;
    RtpsMessage message;
};

/// One domain participant's protocol state machine: discovery tables,
/// liveliness bookkeeping, and clock offset. Single-owner; all transitions
/// happen through announce()/handle()/check_liveliness()/state_sync().
class Participant {
public:
    Participant(Guid guid, DomainId domain);

    const Guid& guid() const { return guid_; }
    DomainId domain() const { return domain_; }

    void add_writer(Guid endpoint, Topic topic);
    void add_reader(Guid endpoint, Topic topic);

    const std::set<Guid>& known_participants() const { return known_; }
    const std::set<EndpointEntry>& writers() const { return writers_; }
    const std::set<EndpointEntry>& readers() const { return readers_; }
    const std::map<Guid, SimTime>& last_heartbeat() const { return last_heartbeat_; }
    std::int64_t clock_offset_ms() const { return clock_offset_ms_; }
    std::uint64_t cross_domain_drops() const { return cross_domain_drops_; }

    /// PUBLISHes delivered to local matched readers, in arrival order.
    const std::vector<Delivery>& inbox() const { return inbox_; }

    /// Discovery announcement: DATA_AVAILABLE, INFO, one DATA_W per local
    /// writer and one DATA_R per local reader, all broadcast in-domain.
    std::vector<RtpsMessage> announce(SimTime now);

    /// Applies one received message and returns any replies to send.
    /// Cross-domain messages are dropped silently and counted.
    std::vector<RtpsMessage> handle(const RtpsMessage& msg, SimTime now);

    /// Builds a HEARTBEAT broadcast.
    RtpsMessage make_heartbeat(SimTime now);

    /// Builds a PUBLISH from one of this participant's writers.
    RtpsMessage make_publish(Guid writer, const Topic& topic, std::int64_t payload_bytes,
                             SimTime now);

    /// Builds a SUBSCRIBE expressing interest from a local reader.
    RtpsMessage make_subscribe(Guid reader, const Topic& topic, SimTime now);

    /// Builds a STATE_SYNC carrying this participant's current timestamp.
    RtpsMessage make_state_sync(SimTime now);

    /// Removes every known participant whose lease expired (now - last
    /// heartbeat > lease_ms) together with all of its endpoints.
    std::vector<Guid> check_liveliness(SimTime now, std::int64_t lease_ms);

    /// Aligns the local clock to a peer: offset = peer - local. Subsequent
    /// outgoing sent_at values are corrected by the offset.
    void state_sync(SimTime peer_timestamp, SimTime local_timestamp);

    /// Matched (writer, reader) pairs as seen from this participant.
    std::vector<std::pair<Guid, Guid>> matches() const;

private:
    RtpsMessage make(Primitive p, std::optional<Guid> dst, std::optional<Topic> topic,
                     std::int64_t payload_bytes, SimTime now);

    Guid guid_;
    DomainId domain_;
    std::uint64_t next_seq_ = 1;
    std::set<Guid> known_;
    std::set<EndpointEntry> writers_;
    std::set<EndpointEntry> readers_;
    std::map<Guid, SimTime> last_heartbeat_;
    std::int64_t clock_offset_ms_ = 0;
    std::uint64_t cross_domain_drops_ = 0;
    std::vector<Delivery> inbox_;
};

}  // namespace twincity::rtps
