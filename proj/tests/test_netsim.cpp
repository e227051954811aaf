#include "twincity/netsim.hpp"

#include <random>
#include <sstream>

#include "doctest.h"

using namespace twincity;
using namespace twincity::netsim;

namespace {

rtps::RtpsMessage make_msg(std::int64_t payload, SimTime sent_at,
                           rtps::Primitive p = rtps::Primitive::Publish) {
    rtps::RtpsMessage m;
    m.seq = 1;
    m.src = rtps::Guid{1, 1};
    m.domain = kAirQualityDomain;
    m.primitive = p;
    m.payload_bytes = payload;
    m.sent_at = sent_at;
    if (p == rtps::Primitive::Publish) {
        m.topic = Topic{"readings", kAirQualityDomain};
    }
    return m;
}

// Independent percentile oracle: count-based rank scan over a sorted copy,
// no shared index arithmetic with the implementation.
double oracle_percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t at_most = 0;
        for (double x : v) {
            if (x <= v[i]) {
                ++at_most;
            }
        }
        if (100.0 * static_cast<double>(at_most) >= p * static_cast<double>(n)) {
            return v[i];  // smallest element covering p percent of the samples
        }
    }
    return v.back();
}

}  // namespace

TEST_CASE("schedule enforces ordering and rejects the past") {
    Engine e;
    std::vector<int> order;
    e.schedule(10, EventKind::DeviceWake, [&](SimTime) { order.push_back(1); });
    e.schedule(10, EventKind::DeviceWake, [&](SimTime) { order.push_back(2); });
    e.schedule(0, EventKind::DeviceWake, [&](SimTime) { order.push_back(0); });
    e.run_until(10);
    CHECK(order == std::vector<int>{0, 1, 2});  // same-time events keep insertion order
    CHECK(e.now() == 10);
    CHECK_THROWS_AS(e.schedule(5, EventKind::DeviceWake, [](SimTime) {}),
                    std::invalid_argument);

    // an event at the current time still runs
    bool ran = false;
    e.schedule(10, EventKind::EpisodeEnd, [&](SimTime) { ran = true; });
    e.run_until(10);
    CHECK(ran);
}

TEST_CASE("transfer_time: serialization + propagation + queue residual") {
    UnderlayLink link{0, 12'500.0, 2.0, 0};
    CHECK(transfer_time(link, 125'000, 0) == doctest::Approx(12.0));
    CHECK(transfer_time(link, 0, 0) == doctest::Approx(2.0));
    link.busy_until = 10;
    CHECK(transfer_time(link, 125'000, 0) == doctest::Approx(22.0));
    CHECK(transfer_time(link, 125'000, 10) == doctest::Approx(12.0));
    CHECK_THROWS_AS(transfer_time(link, -1, 0), std::invalid_argument);
}

TEST_CASE("send_over_path: store-and-forward per hop") {
    SUBCASE("single hop") {
        Engine e;
        const int l = e.add_link(12'500.0, 2.0);
        e.send(make_msg(125'000, 0), {l}, Phase::DataExchange, 0, nullptr);
        e.run_all();
        REQUIRE(e.stats().samples.size() == 1);
        CHECK(e.stats().samples[0].d_ms == doctest::Approx(12.0));
    }
    SUBCASE("two identical hops double the delay") {
        Engine e;
        const int l1 = e.add_link(12'500.0, 2.0);
        const int l2 = e.add_link(12'500.0, 2.0);
        e.send(make_msg(125'000, 0), {l1, l2}, Phase::DataExchange, 0, nullptr);
        e.run_all();
        REQUIRE(e.stats().samples.size() == 1);
        CHECK(e.stats().samples[0].d_ms == doctest::Approx(24.0));
    }
    SUBCASE("zero payload pays propagation only") {
        Engine e;
        const int l1 = e.add_link(12'500.0, 2.0);
        const int l2 = e.add_link(12'500.0, 3.0);
        e.send(make_msg(0, 0, rtps::Primitive::Heartbeat), {l1, l2}, Phase::Discovery, 0,
               nullptr);
        e.run_all();
        REQUIRE(e.stats().samples.size() == 1);
        CHECK(e.stats().samples[0].d_ms == doctest::Approx(5.0));
    }
    SUBCASE("FIFO: second transfer queues behind the first") {
        Engine e;
        const int l = e.add_link(12'500.0, 2.0);  // 125 kB serializes in 10 ms
        e.send(make_msg(125'000, 0), {l}, Phase::DataExchange, 0, nullptr);
        e.send(make_msg(125'000, 0), {l}, Phase::DataExchange, 1, nullptr);
        e.run_all();
        REQUIRE(e.stats().samples.size() == 2);
        CHECK(e.stats().samples[0].d_ms == doctest::Approx(12.0));
        CHECK(e.stats().samples[1].d_ms == doctest::Approx(22.0));  // +10 ms residual
    }
}

TEST_CASE("percentile: nearest rank") {
    CHECK(percentile(std::vector<double>{7.0}, 95.0) == 7.0);

    std::vector<double> v100;
    for (int i = 1; i <= 100; ++i) {
        v100.push_back(i);
    }
    CHECK(percentile(v100, 95.0) == 95.0);

    std::vector<double> v20;
    for (int i = 1; i <= 20; ++i) {
        v20.push_back(i);
    }
    CHECK(percentile(v20, 95.0) == 19.0);
    CHECK(percentile(v20, 100.0) == 20.0);

    CHECK_THROWS_AS(percentile(std::vector<double>{}, 95.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile(std::vector<double>{1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile(std::vector<double>{1.0}, 101.0), std::invalid_argument);
}

TEST_CASE("percentile agrees with the sort-based oracle on random sets") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> value(0.0, 500.0);
    std::uniform_int_distribution<int> size(1, 60);
    std::uniform_real_distribution<double> pq(0.5, 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(size(rng)));
        for (double& x : v) {
            x = value(rng);
        }
        const double p = pq(rng);
        CHECK(percentile(v, p) == oracle_percentile(v, p));
    }
}

TEST_CASE("run_until advances the clock and keeps later events") {
    Engine e;
    int ran = 0;
    e.schedule(5, EventKind::DeviceWake, [&](SimTime) { ++ran; });
    e.schedule(50, EventKind::DeviceWake, [&](SimTime) { ++ran; });
    e.run_until(10);
    CHECK(ran == 1);
    CHECK(e.now() == 10);
    CHECK(e.pending() == 1);
    e.run_until(100);  // the queued event survives the segment boundary
    CHECK(ran == 2);
}

TEST_CASE("mid-transfer events complete in a later segment") {
    Engine e;
    const int l = e.add_link(12'500.0, 2.0);
    e.send(make_msg(1'250'000, 0), {l}, Phase::DataExchange, 0, nullptr);  // 102 ms
    e.run_until(50);
    CHECK(e.stats().delivered == 0);
    CHECK(e.stats().in_flight() == 1);
    e.run_until(200);
    CHECK(e.stats().delivered == 1);
    CHECK(e.stats().in_flight() == 0);
}

TEST_CASE("conservation: sent equals delivered plus in-flight") {
    Engine e;
    const int l = e.add_link(12'500.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        e.send(make_msg(50'000 * (i + 1), 0), {l}, Phase::DataExchange, i, nullptr);
    }
    for (SimTime t = 0; t <= 1000; t += 37) {
        e.run_until(t);
        CHECK(e.stats().sent == e.stats().delivered + e.stats().in_flight());
    }
    e.run_all();
    CHECK(e.stats().sent == e.stats().delivered);
}

TEST_CASE("identical runs produce identical traces and stats") {
    const auto run = [] {
        std::ostringstream trace;
        Engine e;
        e.trace().attach(&trace);
        const int l1 = e.add_link(12'500.0, 2.0);
        const int l2 = e.add_link(6'000.0, 4.0);
        std::mt19937_64 rng(5);
        for (int i = 0; i < 30; ++i) {
            auto m = make_msg(static_cast<std::int64_t>(rng() % 100'000), e.now());
            m.seq = static_cast<std::uint64_t>(i + 1);
            e.send(m, rng() % 2 == 0 ? std::vector<int>{l1, l2} : std::vector<int>{l2},
                   Phase::DataExchange, i,
                   [&e, m](SimTime t) { e.trace().record(t, m, rtps::Guid{2, 0}); });
        }
        e.run_all();
        return trace.str() + "\n" + e.stats().report();
    };
    CHECK(run() == run());
}

TEST_CASE("trace line format") {
    std::ostringstream trace;
    TraceWriter w(&trace);
    auto m = make_msg(512, 3);
    m.seq = 9;
    w.record(15, m, rtps::Guid{4, 0});
    CHECK(trace.str() == "15 9 1:1 4:0 0 PUBLISH readings 512\n");

    std::ostringstream t2;
    TraceWriter w2(&t2);
    w2.record(7, make_msg(0, 0, rtps::Primitive::Heartbeat), rtps::Guid{2, 0});
    CHECK(t2.str() == "7 1 1:1 2:0 0 HEARTBEAT - 0\n");
}
