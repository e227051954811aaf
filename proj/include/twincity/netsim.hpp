#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "twincity/core.hpp"
#include "twincity/rtps.hpp"

namespace twincity::netsim {

enum class EventKind { Deliver, DeviceWake, HeartbeatTick, EpisodeEnd };

enum class Phase { Discovery, DataExchange };

std::string to_string(Phase phase);

/// Phase of a message, by primitive class: discovery set vs data exchange.
Phase phase_of(rtps::Primitive p);

/// End-to-end delay of one delivered message.
struct LatencySample {
    int flow_id = 0;  // device id for data flows, source participant otherwise
    DomainId domain{};
    double d_ms = 0.0;
    Phase phase = Phase::Discovery;
};

/// A physical link: single-server FIFO store-and-forward queue. busy_until
/// compresses the queue; serialization of queued transfers is back to back.
struct UnderlayLink {
    int id = 0;
    double bandwidth_bytes_per_ms = 12'500.0;  // 100 Mbit/s
    double prop_delay_ms = 1.0;
    SimTime busy_until = 0;
};

/// Queue-aware traversal cost in real milliseconds:
/// payload / bandwidth + propagation + current queue residual at `now`.
double transfer_time(const UnderlayLink& link, std::int64_t payload_bytes, SimTime now);

/// Nearest-rank percentile: sort ascending, take element ceil(p/100*n),
/// 1-based. p in (0, 100]; empty input is an error.
double percentile(std::span<const double> samples, double p);

/// Trace sink: one line per delivered message, fields in fixed order:
/// t_ms seq src dst domain_id primitive topic payload_bytes
class TraceWriter {
public:
    explicit TraceWriter(std::ostream* out = nullptr) : out_(out) {}

    void attach(std::ostream* out) { out_ = out; }

    void record(SimTime t_ms, const rtps::RtpsMessage& msg, const rtps::Guid& receiver);

private:
    std::ostream* out_;
};

/// Per-run message and byte accounting plus the collected latency samples.
struct NetStats {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped_cross_domain = 0;
    std::map<Phase, std::uint64_t> bytes_by_phase;
    std::map<int, std::uint64_t> bytes_by_domain;
    std::vector<LatencySample> samples;

    std::uint64_t in_flight() const { return sent - delivered; }
    std::vector<double> delays(std::optional<Phase> phase = std::nullopt,
                               std::optional<int> domain = std::nullopt) const;
    std::uint64_t total_bytes() const;

    /// Structured text export: per-phase and per-domain count/mean/p50/p95
    /// plus byte totals. Schema documented in the README.
    std::string report() const;
};

/// Deterministic discrete-event engine. Events execute in (at, seq) order;
/// seq is a global insertion counter so simultaneous events replay stably.
class Engine {
public:
    using Action = std::function<void(SimTime)>;

    SimTime now() const { return clock_; }

    /// Enqueues an event. at < now is an error.
    void schedule(SimTime at, EventKind kind, Action action);

    /// Runs every event with at <= t_end in order, then sets clock to t_end.
    void run_until(SimTime t_end);

    /// Drains the queue completely (events may schedule more events).
    void run_all();

    bool empty() const { return queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }

    int add_link(double bandwidth_bytes_per_ms, double prop_delay_ms);
    UnderlayLink& link(int id);
    const UnderlayLink& link(int id) const;

    /// Delivered callback: receives the arrival time of the last hop.
    using DeliveredFn = std::function<void(SimTime)>;

    /// Sends a message over the underlay path with store-and-forward
    /// semantics. Hop times are quantized up to whole milliseconds so event
    /// ordering stays integral; the sample d_ms is arrival - sent_at.
    void send(const rtps::RtpsMessage& msg, const std::vector<int>& path, Phase phase,
              int flow_id, DeliveredFn on_delivered);

    NetStats& stats() { return stats_; }
    const NetStats& stats() const { return stats_; }
    TraceWriter& trace() { return trace_; }

private:
    struct Event {
        SimTime at;
        std::uint64_t seq;
        EventKind kind;
        Action action;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    void hop(rtps::RtpsMessage msg, std::vector<int> path, std::size_t index, Phase phase,
             int flow_id, DeliveredFn on_delivered, SimTime arrived_at);

    SimTime clock_ = 0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::map<int, UnderlayLink> links_;
    int next_link_id_ = 0;
    NetStats stats_;
    TraceWriter trace_;
};

}  // namespace twincity::netsim
