#include "twincity/energy.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace twincity;
using namespace twincity::energy;

namespace {

BatteryModel default_model() {
    return BatteryModel{};
}

EnergyLedger fresh_ledger(const Device& d) {
    EnergyLedger ledger;
    ledger.track(d.id, d.battery_pct);
    return ledger;
}

}  // namespace

TEST_CASE("battery model validation") {
    BatteryModel m;
    m.validate();
    m.idle_drain_pct_per_min = m.sleep_drain_pct_per_min / 2;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = default_model();
    m.wake_cost_pct = -1;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("advance drains by state and clamps at zero") {
    BatteryModel m;
    SUBCASE("idle for one minute") {
        Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
        auto ledger = fresh_ledger(d);
        advance(d, 60'000, m, ledger);
        CHECK(d.battery_pct == doctest::Approx(99.99).epsilon(1e-12));
        CHECK(ledger.consumed_pct(0) == doctest::Approx(0.01).epsilon(1e-12));
    }
    SUBCASE("sleeping with zero sleep drain is free") {
        BatteryModel zero = m;
        zero.sleep_drain_pct_per_min = 0.0;
        Device d = make_device(0, kAirQualityDomain, 50.0, 1024);
        d.state = DeviceState::Sleep;
        auto ledger = fresh_ledger(d);
        advance(d, 10 * 60'000, zero, ledger);
        CHECK(d.battery_pct == 50.0);
        CHECK(ledger.consumed_pct(0) == 0.0);
    }
    SUBCASE("drain past zero clamps and puts the device to sleep") {
        Device d = make_device(0, kAirQualityDomain, 0.005, 1024);
        auto ledger = fresh_ledger(d);
        advance(d, 60'000, m, ledger);  // idle would take 0.01
        CHECK(d.battery_pct == 0.0);
        CHECK(d.state == DeviceState::Sleep);
        CHECK(ledger.consumed_pct(0) == doctest::Approx(0.005));
        // dead devices stay asleep and stop consuming
        advance(d, 60'000, m, ledger);
        CHECK(ledger.consumed_pct(0) == doctest::Approx(0.005));
    }
    CHECK_THROWS_AS(
        [&] {
            Device d = make_device(0, kAirQualityDomain, 10.0, 1);
            auto ledger = fresh_ledger(d);
            advance(d, -1, m, ledger);
        }(),
        std::invalid_argument);
}

TEST_CASE("wake_and_transmit pays wake plus per-kB cost") {
    BatteryModel m;
    SUBCASE("one kilobyte") {
        Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
        d.state = DeviceState::Sleep;
        auto ledger = fresh_ledger(d);
        const auto r = wake_and_transmit(d, m, 1024, 12'345, ledger);
        CHECK(!r.skipped);
        CHECK(r.consumed_pct == doctest::Approx(0.5));
        CHECK(d.battery_pct == doctest::Approx(99.5));
        CHECK(d.last_tx == 12'345);
        CHECK(d.state == DeviceState::Sleep);  // default rest state
    }
    SUBCASE("zero payload pays only the wake cost") {
        Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
        auto ledger = fresh_ledger(d);
        const auto r = wake_and_transmit(d, m, 0, 1, ledger);
        CHECK(r.consumed_pct == doctest::Approx(m.wake_cost_pct));
    }
    SUBCASE("dead battery skips and flags") {
        Device d = make_device(0, kAirQualityDomain, 0.0, 1024);
        auto ledger = fresh_ledger(d);
        const auto r = wake_and_transmit(d, m, 1024, 5, ledger);
        CHECK(r.skipped);
        CHECK(ledger.skipped_tx(0) == 1);
        CHECK(d.last_tx == 0);
    }
    SUBCASE("already-active devices pay no wake cost") {
        Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
        d.state = DeviceState::Active;
        auto ledger = fresh_ledger(d);
        const auto r =
            wake_and_transmit(d, m, 1024, 5, ledger, DeviceState::Active);
        CHECK(r.consumed_pct == doctest::Approx(0.3));
        CHECK(d.state == DeviceState::Active);
    }
}

TEST_CASE("battery_at predicts the post-transmission level") {
    BatteryModel m;
    m.wake_cost_pct = 0.2;
    m.tx_cost_pct_per_kb = 0.3;
    SUBCASE("midnight transmission: no pre-drain") {
        Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
        d.state = DeviceState::Sleep;
        CHECK(battery_at(d, 0, m, 0) == doctest::Approx(99.5));
    }
    SUBCASE("sleep drain before the scheduled minute") {
        BatteryModel m2 = m;
        m2.sleep_drain_pct_per_min = 0.001;
        Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
        d.state = DeviceState::Sleep;
        CHECK(battery_at(d, minutes_to_simtime(100), m2, 0) == doctest::Approx(99.4));
    }
    SUBCASE("zero sleep drain makes the level time-invariant") {
        BatteryModel m2 = m;
        m2.sleep_drain_pct_per_min = 0.0;
        Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
        d.state = DeviceState::Sleep;
        CHECK(battery_at(d, 0, m2, 0) ==
              battery_at(d, minutes_to_simtime(1000), m2, 0));
    }
}

TEST_CASE("later scheduling never raises the post-transmission level") {
    BatteryModel m;
    Device d = make_device(0, kAirQualityDomain, 90.0, 2048);
    d.state = DeviceState::Sleep;
    double prev = battery_at(d, 0, m, 0);
    for (int minute = 10; minute <= 1440; minute += 10) {
        const double level = battery_at(d, minutes_to_simtime(minute), m, 0);
        CHECK(level <= prev);
        prev = level;
    }
}

TEST_CASE("total_consumption and the conservation identity") {
    BatteryModel m;
    SUBCASE("fresh ledger totals zero") {
        EnergyLedger ledger;
        CHECK(ledger.total_consumption() == 0.0);
    }
    SUBCASE("totals add up") {
        EnergyLedger ledger;
        ledger.track(0, 100.0);
        ledger.track(1, 100.0);
        ledger.consume(0, 1.5);
        ledger.consume(1, 2.5);
        CHECK(ledger.total_consumption() == doctest::Approx(4.0));
    }
    SUBCASE("random op sequences conserve to 1e-9") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            Device d = make_device(0, kAirQualityDomain, 100.0, 1024);
            auto ledger = fresh_ledger(d);
            SimTime now = 0;
            double total_checked = 0.0;
            for (int op = 0; op < 400; ++op) {
                if (unit(rng) < 0.7) {
                    const auto dt = static_cast<SimTime>(unit(rng) * 3.6e6);
                    advance(d, dt, m, ledger);
                    now += dt;
                } else {
                    d.state = unit(rng) < 0.5 ? DeviceState::Idle : DeviceState::Sleep;
                    if (d.battery_pct <= 0.0) {
                        d.state = DeviceState::Sleep;
                    }
                    wake_and_transmit(d, m,
                                      static_cast<std::int64_t>(unit(rng) * 8192), now,
                                      ledger,
                                      unit(rng) < 0.5 ? DeviceState::Sleep
                                                      : DeviceState::Idle);
                }
                const double err =
                    std::abs(ledger.initial_pct(0) - d.battery_pct - ledger.consumed_pct(0));
                CHECK(err < 1e-9);
                // consumption is monotone
                CHECK(ledger.total_consumption() >= total_checked);
                total_checked = ledger.total_consumption();
            }
        }
    }
}

TEST_CASE("normalize divides by the reference maximum") {
    const std::vector<double> v{2.0, 4.0, 8.0};
    const auto out = normalize(v, 8.0);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == doctest::Approx(0.25));
    CHECK(out[1] == doctest::Approx(0.5));
    CHECK(out[2] == doctest::Approx(1.0));
    CHECK(normalize(std::vector<double>{0.0}, 5.0)[0] == 0.0);
    CHECK_THROWS_AS(normalize(v, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(normalize(v, -1.0), std::invalid_argument);
}
