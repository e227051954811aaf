#include "twincity/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace twincity::netsim {

std::string to_string(Phase phase) {
    return phase == Phase::Discovery ? "DISCOVERY" : "DATA_EXCHANGE";
}

Phase phase_of(rtps::Primitive p) {
    switch (p) {
        case rtps::Primitive::Publish:
        case rtps::Primitive::Subscribe:
        case rtps::Primitive::StateSync:
            return Phase::DataExchange;
        default:
            return Phase::Discovery;
    }
}

double transfer_time(const UnderlayLink& link, std::int64_t payload_bytes, SimTime now) {
    if (payload_bytes < 0) {
        throw std::invalid_argument("transfer_time: payload_bytes must be >= 0");
    }
    const double residual = std::max<double>(0.0, static_cast<double>(link.busy_until - now));
    return static_cast<double>(payload_bytes) / link.bandwidth_bytes_per_ms +
           link.prop_delay_ms + residual;
}

double percentile(std::span<const double> samples, double p) {
    if (samples.empty()) {
        throw std::invalid_argument("percentile: empty sample set");
    }
    if (!(p > 0.0 && p <= 100.0)) {
        throw std::invalid_argument("percentile: p must lie in (0, 100]");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

void TraceWriter::record(SimTime t_ms, const rtps::RtpsMessage& msg,
                         const rtps::Guid& receiver) {
    if (!out_) {
        return;
    }
    *out_ << t_ms << ' ' << msg.seq << ' ' << rtps::to_string(msg.src) << ' '
          << rtps::to_string(receiver) << ' ' << msg.domain.id << ' '
          << rtps::to_string(msg.primitive) << ' ' << (msg.topic ? msg.topic->name : "-") << ' '
          << msg.payload_bytes << '\n';
}

std::vector<double> NetStats::delays(std::optional<Phase> phase,
                                     std::optional<int> domain) const {
    std::vector<double> out;
    for (const auto& s : samples) {
        if (phase && s.phase != *phase) {
            continue;
        }
        if (domain && s.domain.id != *domain) {
            continue;
        }
        out.push_back(s.d_ms);
    }
    return out;
}

std::uint64_t NetStats::total_bytes() const {
    std::uint64_t total = 0;
    for (const auto& [phase, bytes] : bytes_by_phase) {
        total += bytes;
    }
    return total;
}

namespace {

void report_group(std::ostringstream& out, const std::string& label,
                  const std::vector<double>& d, std::uint64_t bytes) {
    out << label << " samples=" << d.size();
    if (!d.empty()) {
        const double mean = std::accumulate(d.begin(), d.end(), 0.0) /
                            static_cast<double>(d.size());
        out << " mean_ms=" << mean << " p50_ms=" << percentile(d, 50.0)
            << " p95_ms=" << percentile(d, 95.0);
    }
    out << " bytes=" << bytes << "\n";
}

}  // namespace

std::string NetStats::report() const {
    std::ostringstream out;
    out << "sent=" << sent << " delivered=" << delivered << " in_flight=" << in_flight()
        << " dropped_cross_domain=" << dropped_cross_domain << "\n";
    for (Phase phase : {Phase::Discovery, Phase::DataExchange}) {
        const auto it = bytes_by_phase.find(phase);
        report_group(out, "phase=" + to_string(phase), delays(phase),
                     it == bytes_by_phase.end() ? 0 : it->second);
    }
    for (const auto& [domain, bytes] : bytes_by_domain) {
        report_group(out,
                     "domain=" + std::to_string(domain) + " name=" + domain_name({domain}),
                     delays(std::nullopt, domain), bytes);
    }
    return out.str();
}

void Engine::schedule(SimTime at, EventKind kind, Action action) {
    if (at < clock_) {
        throw std::invalid_argument("schedule: event dated before current clock");
    }
    queue_.push(Event{at, next_seq_++, kind, std::move(action)});
}

void Engine::run_until(SimTime t_end) {
    if (t_end < clock_) {
        throw std::invalid_argument("run_until: t_end before current clock");
    }
    while (!queue_.empty() && queue_.top().at <= t_end) {
        Event ev = queue_.top();
        queue_.pop();
        clock_ = ev.at;
        ev.action(clock_);
    }
    clock_ = t_end;
}

void Engine::run_all() {
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        clock_ = ev.at;
        ev.action(clock_);
    }
}

int Engine::add_link(double bandwidth_bytes_per_ms, double prop_delay_ms) {
    if (!(bandwidth_bytes_per_ms > 0.0) || prop_delay_ms < 0.0) {
        throw std::invalid_argument("add_link: invalid link parameters");
    }
    const int id = next_link_id_++;
    links_[id] = UnderlayLink{id, bandwidth_bytes_per_ms, prop_delay_ms, 0};
    return id;
}

UnderlayLink& Engine::link(int id) {
    const auto it = links_.find(id);
    if (it == links_.end()) {
        throw std::invalid_argument("link: unknown link id");
    }
    return it->second;
}

const UnderlayLink& Engine::link(int id) const {
    const auto it = links_.find(id);
    if (it == links_.end()) {
        throw std::invalid_argument("link: unknown link id");
    }
    return it->second;
}

void Engine::send(const rtps::RtpsMessage& msg, const std::vector<int>& path, Phase phase,
                  int flow_id, DeliveredFn on_delivered) {
    if (path.empty()) {
        throw std::invalid_argument("send: underlay path must be non-empty");
    }
    ++stats_.sent;
    stats_.bytes_by_phase[phase] += static_cast<std::uint64_t>(msg.payload_bytes);
    stats_.bytes_by_domain[msg.domain.id] += static_cast<std::uint64_t>(msg.payload_bytes);
    hop(msg, path, 0, phase, flow_id, std::move(on_delivered), clock_);
}

void Engine::hop(rtps::RtpsMessage msg, std::vector<int> path, std::size_t index, Phase phase,
                 int flow_id, DeliveredFn on_delivered, SimTime arrived_at) {
    UnderlayLink& l = link(path[index]);
    // Hop costs round up to whole milliseconds so event times stay integral
    // and never undercut the real-valued link cost.
    const SimTime start = std::max(arrived_at, l.busy_until);
    const auto ser = static_cast<SimTime>(
        std::ceil(static_cast<double>(msg.payload_bytes) / l.bandwidth_bytes_per_ms));
    l.busy_until = start + ser;
    const auto prop = static_cast<SimTime>(std::ceil(l.prop_delay_ms));
    const SimTime arrival = start + ser + prop;

    if (index + 1 < path.size()) {
        schedule(arrival, EventKind::Deliver,
                 [this, msg = std::move(msg), path = std::move(path), index, phase, flow_id,
                  cb = std::move(on_delivered)](SimTime t) mutable {
                     hop(std::move(msg), std::move(path), index + 1, phase, flow_id,
                         std::move(cb), t);
                 });
        return;
    }
    schedule(arrival, EventKind::Deliver,
             [this, msg = std::move(msg), phase, flow_id,
              cb = std::move(on_delivered)](SimTime t) {
                 ++stats_.delivered;
                 stats_.samples.push_back(LatencySample{
                     flow_id, msg.domain, static_cast<double>(t - msg.sent_at), phase});
                 if (cb) {
                     cb(t);
                 }
             });
}

}  // namespace twincity::netsim
