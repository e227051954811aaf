#include "twincity/core.hpp"

#include "doctest.h"

using namespace twincity;

TEST_CASE("make_device defaults and validation") {
    const Device d = make_device(7, kTransportDomain, 100.0, 1024);
    CHECK(d.state == DeviceState::Idle);
    CHECK(d.last_tx == 0);
    CHECK(d.battery_pct == 100.0);
    CHECK(d.payload_bytes == 1024);

    // battery 0 is a valid (dead) device
    const Device dead = make_device(1, kAirQualityDomain, 0.0, 512);
    CHECK(dead.battery_pct == 0.0);

    CHECK_THROWS_AS(make_device(2, kSmartFarmDomain, 101.0, 512), std::invalid_argument);
    CHECK_THROWS_AS(make_device(3, kSmartFarmDomain, -0.5, 512), std::invalid_argument);
    CHECK_THROWS_AS(make_device(4, kSmartFarmDomain, 50.0, 0), std::invalid_argument);
}

TEST_CASE("minutes_to_simtime conversion") {
    CHECK(minutes_to_simtime(0.0) == 0);
    CHECK(minutes_to_simtime(1440.0) == 86'400'000);
    CHECK(minutes_to_simtime(0.5) == 30'000);
    CHECK(minutes_to_simtime(1.0) == kMsPerMinute);
    CHECK_THROWS_AS(minutes_to_simtime(-1.0), std::invalid_argument);
}

TEST_CASE("minutes_to_simtime is monotone") {
    double prev_m = 0.0;
    SimTime prev = minutes_to_simtime(prev_m);
    for (int i = 1; i <= 2000; ++i) {
        const double m = prev_m + 0.37 * i;
        const SimTime t = minutes_to_simtime(m);
        CHECK(t >= prev);
        prev = t;
        prev_m = m;
    }
}

TEST_CASE("domain names") {
    CHECK(domain_name(kAirQualityDomain) == "AIR_Q_DOMAIN");
    CHECK(domain_name(kTransportDomain) == "TRANSPORT_DOMAIN");
    CHECK(domain_name(kSmartFarmDomain) == "SMART_FARM_DOMAIN");
    CHECK(domain_name(DomainId{5}) == "DOMAIN_5");
    CHECK(kAirQualityDomain.id == 0);
    CHECK(kTransportDomain.id == 1);
    CHECK(kSmartFarmDomain.id == 2);
}

TEST_CASE("topics compare by name and domain") {
    const Topic a{"readings", kAirQualityDomain};
    const Topic b{"readings", kTransportDomain};
    CHECK(a != b);
    CHECK(a == (Topic{"readings", kAirQualityDomain}));
    CHECK(a < b);
}
