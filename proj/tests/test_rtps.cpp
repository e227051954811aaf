#include "twincity/rtps.hpp"

#include <map>

#include "doctest.h"

using namespace twincity;
using namespace twincity::rtps;

namespace {

Participant make_participant(int pid, DomainId domain = kAirQualityDomain) {
    return Participant(Guid{pid, 0}, domain);
}

// Lossless instantaneous delivery of broadcasts between views; replies are
// delivered unicast. One call is one announcement round.
void deliver_round(std::vector<Participant>& views, SimTime now) {
    std::vector<std::pair<int, RtpsMessage>> pending;  // (origin index, message)
    for (std::size_t i = 0; i < views.size(); ++i) {
        for (auto& m : views[i].announce(now)) {
            pending.emplace_back(static_cast<int>(i), m);
        }
    }
    while (!pending.empty()) {
        std::vector<std::pair<int, RtpsMessage>> next;
        for (const auto& [from, msg] : pending) {
            for (std::size_t j = 0; j < views.size(); ++j) {
                if (static_cast<int>(j) == from) {
                    continue;
                }
                if (msg.dst && *msg.dst != views[j].guid()) {
                    continue;
                }
                for (auto& reply : views[j].handle(msg, now)) {
                    next.emplace_back(static_cast<int>(j), reply);
                }
            }
        }
        pending = std::move(next);
    }
}

}  // namespace

TEST_CASE("announce emits DATA_AVAILABLE, INFO and endpoint announcements") {
    const Topic t{"readings", kAirQualityDomain};

    auto p = make_participant(1);
    p.add_writer(Guid{1, 1}, t);
    auto msgs = p.announce(0);
    REQUIRE(msgs.size() == 3);
    CHECK(msgs[0].primitive == Primitive::DataAvailable);
    CHECK(msgs[1].primitive == Primitive::Info);
    CHECK(msgs[2].primitive == Primitive::DataW);
    CHECK(msgs[2].topic == t);
    for (const auto& m : msgs) {
        CHECK(m.payload_bytes == kDiscoveryPayloadBytes);
        CHECK(!m.dst.has_value());  // broadcast
    }

    auto bare = make_participant(2);
    CHECK(bare.announce(0).size() == 2);

    auto reader2 = make_participant(3);
    reader2.add_reader(Guid{3, 1}, t);
    reader2.add_reader(Guid{3, 2}, t);
    auto rmsgs = reader2.announce(0);
    REQUIRE(rmsgs.size() == 4);
    CHECK(rmsgs[2].primitive == Primitive::DataR);
    CHECK(rmsgs[3].primitive == Primitive::DataR);
}

TEST_CASE("per-source sequence numbers increase strictly") {
    auto p = make_participant(1);
    auto a = p.announce(0);
    auto b = p.announce(5);
    std::uint64_t prev = 0;
    for (const auto& m : a) {
        CHECK(m.seq > prev);
        prev = m.seq;
    }
    for (const auto& m : b) {
        CHECK(m.seq > prev);
        prev = m.seq;
    }
}

TEST_CASE("handle: unknown sender triggers a unicast announce reply") {
    auto a = make_participant(1);
    auto b = make_participant(2);
    const auto announces = a.announce(0);
    const auto replies = b.handle(announces[0], 1);
    CHECK(b.known_participants().contains(Guid{1, 0}));
    REQUIRE(!replies.empty());
    for (const auto& r : replies) {
        REQUIRE(r.dst.has_value());
        CHECK(*r.dst == Guid{1, 0});
    }
    // second message from the now-known sender draws no reply
    CHECK(b.handle(announces[1], 2).empty());
}

TEST_CASE("handle: heartbeat refreshes liveliness without replies") {
    auto a = make_participant(1);
    auto b = make_participant(2);
    b.handle(a.announce(0)[0], 0);
    const auto hb = a.make_heartbeat(5000);
    CHECK(b.handle(hb, 5000).empty());
    CHECK(b.last_heartbeat().at(Guid{1, 0}) == 5000);
}

TEST_CASE("handle: publish with no matched reader delivers nothing") {
    const Topic t{"readings", kAirQualityDomain};
    auto writer = make_participant(1);
    auto other = make_participant(2);
    const auto pub = writer.make_publish(Guid{1, 1}, t, 512, 10);
    CHECK(other.handle(pub, 10).empty());
    CHECK(other.inbox().empty());
}

TEST_CASE("handle: publish reaches local matched readers") {
    const Topic t{"readings", kAirQualityDomain};
    auto writer = make_participant(1);
    auto reader = make_participant(2);
    reader.add_reader(Guid{2, 1}, t);
    const auto pub = writer.make_publish(Guid{1, 1}, t, 2048, 42);
    reader.handle(pub, 50);
    REQUIRE(reader.inbox().size() == 1);
    CHECK(reader.inbox()[0].reader == Guid{2, 1});
    CHECK(reader.inbox()[0].message.payload_bytes == 2048);
}

TEST_CASE("handle: cross-domain messages are dropped and counted") {
    auto a = make_participant(1, kAirQualityDomain);
    auto b = make_participant(2, kTransportDomain);
    const auto msgs = a.announce(0);
    CHECK(b.handle(msgs[0], 0).empty());
    CHECK(b.cross_domain_drops() == 1);
    CHECK(b.known_participants().size() == 1);  // only itself

    const Topic t{"readings", kAirQualityDomain};
    b.add_reader(Guid{2, 1}, Topic{"readings", kTransportDomain});
    const auto pub = a.make_publish(Guid{1, 1}, t, 100, 1);
    b.handle(pub, 1);
    CHECK(b.inbox().empty());  // domain isolation
    CHECK(b.cross_domain_drops() == 2);
}

TEST_CASE("match_endpoints pairs by topic within a domain") {
    const Topic t0{"T", kAirQualityDomain};
    const Topic t1{"T", kTransportDomain};

    std::set<EndpointEntry> writers{{Guid{1, 1}, t0}};
    std::set<EndpointEntry> readers{{Guid{2, 1}, t0}};
    CHECK(match_endpoints(writers, readers).size() == 1);

    std::set<EndpointEntry> readers_other{{Guid{2, 1}, t1}};
    CHECK(match_endpoints(writers, readers_other).empty());

    std::set<EndpointEntry> w2{{Guid{1, 1}, t0}, {Guid{3, 1}, t0}};
    std::set<EndpointEntry> r3{{Guid{2, 1}, t0}, {Guid{4, 1}, t0}, {Guid{5, 1}, t0}};
    const auto pairs = match_endpoints(w2, r3);
    CHECK(pairs.size() == 6);  // cross product
    CHECK(std::is_sorted(pairs.begin(), pairs.end()));
}

TEST_CASE("check_liveliness removes expired participants and their endpoints") {
    const Topic t{"readings", kAirQualityDomain};
    auto view = make_participant(1);

    auto peer = make_participant(2);
    peer.add_writer(Guid{2, 1}, t);
    for (const auto& m : peer.announce(0)) {
        view.handle(m, 0);
    }
    CHECK(view.writers().size() == 1);

    SUBCASE("expired") {
        const auto expired = view.check_liveliness(10'000, 9'000);
        REQUIRE(expired.size() == 1);
        CHECK(expired[0] == Guid{2, 0});
        CHECK(!view.known_participants().contains(Guid{2, 0}));
        CHECK(view.writers().empty());
        CHECK(view.matches().empty());
    }
    SUBCASE("alive within lease") {
        view.handle(peer.make_heartbeat(2000), 2000);
        CHECK(view.check_liveliness(10'000, 9'000).empty());
        CHECK(view.writers().size() == 1);
    }
    SUBCASE("empty view") {
        auto lonely = make_participant(9);
        CHECK(lonely.check_liveliness(10'000, 9'000).empty());
    }
    CHECK_THROWS_AS(view.check_liveliness(0, 0), std::invalid_argument);
}

TEST_CASE("state_sync sets the clock offset and corrects sent_at") {
    auto p = make_participant(1);
    p.state_sync(1000, 1000);
    CHECK(p.clock_offset_ms() == 0);
    p.state_sync(1500, 1000);
    CHECK(p.clock_offset_ms() == 500);
    p.state_sync(500, 1000);
    CHECK(p.clock_offset_ms() == -500);

    const auto msg = p.make_heartbeat(100);
    CHECK(msg.sent_at == 100 - 500);

    auto q = make_participant(2);
    const auto sync = p.make_state_sync(100);
    q.handle(sync, 100);
    CHECK(q.clock_offset_ms() == sync.sent_at - 100);
}

TEST_CASE("discovery converges within two rounds for K participants") {
    for (int k : {2, 10, 50}) {
        std::vector<Participant> views;
        for (int i = 0; i < k; ++i) {
            views.push_back(make_participant(i));
        }
        deliver_round(views, 0);
        deliver_round(views, 1);
        for (const auto& v : views) {
            CHECK(static_cast<int>(v.known_participants().size()) == k);
        }
    }
}

TEST_CASE("late joiner converges via reply-on-first-contact") {
    std::vector<Participant> views;
    for (int i = 0; i < 5; ++i) {
        views.push_back(make_participant(i));
    }
    deliver_round(views, 0);
    views.push_back(make_participant(5));
    deliver_round(views, 1);
    for (const auto& v : views) {
        CHECK(v.known_participants().size() == 6);
    }
}

TEST_CASE("endpoint symmetry: both sides compute the same match") {
    const Topic t{"readings", kAirQualityDomain};
    std::vector<Participant> views;
    views.push_back(make_participant(0));
    views.push_back(make_participant(1));
    views[0].add_writer(Guid{0, 1}, t);
    views[1].add_reader(Guid{1, 1}, t);
    deliver_round(views, 0);
    const auto expected = std::pair{Guid{0, 1}, Guid{1, 1}};
    REQUIRE(views[0].matches().size() == 1);
    REQUIRE(views[1].matches().size() == 1);
    CHECK(views[0].matches()[0] == expected);
    CHECK(views[1].matches()[0] == expected);
}
