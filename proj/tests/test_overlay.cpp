#include "twincity/overlay.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"

using namespace twincity;
using namespace twincity::overlay;

namespace {

OverlayGraph make_graph(int peer_degree = 2) {
    return OverlayGraph(peer_degree);
}

// Exhaustive simple-path enumeration: shortest, then lexicographically
// smallest sequence. Independent of the BFS implementation under test.
void enumerate_paths(const OverlayGraph& g, int cur, int dst, std::vector<int>& path,
                     std::vector<bool>& used, std::vector<std::vector<int>>& found) {
    if (cur == dst) {
        found.push_back(path);
        return;
    }
    for (int nb : g.neighbors(cur)) {
        if (!used[static_cast<std::size_t>(nb)]) {
            used[static_cast<std::size_t>(nb)] = true;
            path.push_back(nb);
            enumerate_paths(g, nb, dst, path, used, found);
            path.pop_back();
            used[static_cast<std::size_t>(nb)] = false;
        }
    }
}

std::vector<int> brute_force_route(const OverlayGraph& g, int src, int dst, int max_node) {
    std::vector<std::vector<int>> found;
    std::vector<int> path{src};
    std::vector<bool> used(static_cast<std::size_t>(max_node + 1), false);
    used[static_cast<std::size_t>(src)] = true;
    enumerate_paths(g, src, dst, path, used, found);
    REQUIRE(!found.empty());
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return found.front();
}

}  // namespace

TEST_CASE("register_twin links to the gateway and k nearest peers") {
    auto g = make_graph();
    const int gw = g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);

    const int n1 = g.register_twin(rtps::Guid{1, 0}, kAirQualityDomain);
    CHECK(g.neighbors(n1) == std::vector<int>{gw});  // first node: gateway only

    const int n2 = g.register_twin(rtps::Guid{2, 0}, kAirQualityDomain);
    const int n3 = g.register_twin(rtps::Guid{3, 0}, kAirQualityDomain);
    const int n4 = g.register_twin(rtps::Guid{4, 0}, kAirQualityDomain);
    (void)n2;
    (void)n3;
    CHECK(g.neighbors(n4).size() == 3);  // gateway + 2 peers

    CHECK_THROWS_AS(g.register_twin(rtps::Guid{1, 0}, kAirQualityDomain),
                    std::invalid_argument);
    CHECK_THROWS_AS(g.register_twin(rtps::Guid{9, 0}, kTransportDomain),
                    std::invalid_argument);  // no gateway yet
}

TEST_CASE("remove_node repairs connectivity deterministically") {
    SUBCASE("leaf removal needs no repair") {
        auto g = make_graph();
        g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);
        const int n1 = g.register_twin(rtps::Guid{1, 0}, kAirQualityDomain);
        const int n2 = g.register_twin(rtps::Guid{2, 0}, kAirQualityDomain);
        (void)n1;
        g.remove_node(n2);
        CHECK(g.domain_connected(kAirQualityDomain));
        CHECK(g.nodes().size() == 2);
    }
    SUBCASE("bridge removal adds a lowest-id repair link") {
        // Path graph A-B-C via peer_degree 0 (gateway chain).
        auto g = make_graph(0);
        const int a = g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);
        const int b = g.register_twin(rtps::Guid{1, 0}, kAirQualityDomain);
        const int c = g.register_twin(rtps::Guid{2, 0}, kAirQualityDomain);
        // a-b and a-c exist (star): remove hub a -> b and c separate.
        CHECK(g.neighbors(a).size() == 2);
        g.remove_node(a);
        CHECK(g.domain_connected(kAirQualityDomain));
        CHECK(g.links().contains({std::min(b, c), std::max(b, c)}));
    }
    SUBCASE("unknown node") {
        auto g = make_graph();
        CHECK_THROWS_AS(g.remove_node(77), std::invalid_argument);
    }
}

TEST_CASE("removal drops the node's subscriptions") {
    auto g = make_graph();
    g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);
    const int n = g.register_twin(rtps::Guid{1, 0}, kAirQualityDomain, NodeKind::ServiceApp);
    const Topic t{"readings", kAirQualityDomain};
    g.subscribe(t, n);
    CHECK(g.subscriptions().at(t).contains(n));
    g.remove_node(n);
    CHECK(!g.subscriptions().at(t).contains(n));
}

TEST_CASE("route: identity, unique path, and lexicographic ties") {
    auto g = make_graph(0);
    const int a = g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);
    const int b = g.register_twin(rtps::Guid{1, 0}, kAirQualityDomain);
    const int c = g.register_twin(rtps::Guid{2, 0}, kAirQualityDomain);

    CHECK(g.route(a, a) == std::vector<int>{a});
    // star a-b, a-c: unique shortest path b-a-c
    CHECK(g.route(b, c) == std::vector<int>{b, a, c});

    CHECK_THROWS_AS(g.route(a, 99), std::invalid_argument);
}

TEST_CASE("route matches the brute-force oracle on tie-heavy graphs") {
    // Five-node graph with two equal-length routes plus random graphs.
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = make_graph(trial % 4);
        g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);
        const int n = 5 + static_cast<int>(rng() % 4);
        for (int i = 1; i < n; ++i) {
            g.register_twin(rtps::Guid{i, 0}, kAirQualityDomain);
        }
        const int src = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        const int dst = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        if (!g.domain_connected(kAirQualityDomain)) {
            continue;
        }
        const auto got = g.route(src, dst);
        const auto want = brute_force_route(g, src, dst, n + 1);
        CHECK(got == want);
        // route output is simple
        auto sorted = got;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
}

TEST_CASE("propagate_update returns same-domain subscribers with paths") {
    auto g = make_graph();
    g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);
    g.add_gateway(rtps::Guid{100, 0}, kTransportDomain);
    const int src = g.register_twin(rtps::Guid{1, 0}, kAirQualityDomain);
    const int s1 = g.register_twin(rtps::Guid{2, 0}, kAirQualityDomain);
    const int s2 = g.register_twin(rtps::Guid{3, 0}, kAirQualityDomain);
    const int s3 = g.register_twin(rtps::Guid{4, 0}, kAirQualityDomain);
    const int other = g.register_twin(rtps::Guid{5, 0}, kTransportDomain);

    const Topic t{"readings", kAirQualityDomain};
    SUBCASE("no subscribers") {
        CHECK(g.propagate_update(t, src).empty());
    }
    SUBCASE("three in-domain subscribers") {
        g.subscribe(t, s1);
        g.subscribe(t, s2);
        g.subscribe(t, s3);
        g.subscribe(Topic{"readings", kTransportDomain}, other);
        const auto targets = g.propagate_update(t, src);
        REQUIRE(targets.size() == 3);
        for (const auto& target : targets) {
            CHECK(target.node_id != src);
            CHECK(g.node(target.node_id).domain == kAirQualityDomain);
            CHECK(!target.underlay_path.empty());
        }
    }
    SUBCASE("source excluded even when subscribed") {
        g.subscribe(t, src);
        g.subscribe(t, s1);
        const auto targets = g.propagate_update(t, src);
        REQUIRE(targets.size() == 1);
        CHECK(targets[0].node_id == s1);
    }
}

TEST_CASE("random churn keeps every domain subgraph connected") {
    std::mt19937_64 rng(42);
    auto g = make_graph();
    g.add_gateway(rtps::Guid{1000, 0}, kAirQualityDomain);
    g.add_gateway(rtps::Guid{1001, 0}, kTransportDomain);
    std::vector<int> alive;
    int next_guid = 0;
    for (int step = 0; step < 300; ++step) {
        const bool add = alive.size() < 3 || rng() % 3 != 0;
        if (add) {
            const DomainId d = rng() % 2 == 0 ? kAirQualityDomain : kTransportDomain;
            alive.push_back(g.register_twin(rtps::Guid{next_guid++, 0}, d));
        } else {
            const std::size_t pick = rng() % alive.size();
            g.remove_node(alive[pick]);
            alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        CHECK(g.domain_connected(kAirQualityDomain));
        CHECK(g.domain_connected(kTransportDomain));
    }
}

TEST_CASE("identical operation sequences produce identical snapshots") {
    const auto build = [] {
        auto g = make_graph();
        g.add_gateway(rtps::Guid{0, 0}, kAirQualityDomain);
        for (int i = 1; i <= 6; ++i) {
            g.register_twin(rtps::Guid{i, 0}, kAirQualityDomain);
        }
        g.remove_node(3);
        g.subscribe(Topic{"readings", kAirQualityDomain}, 2);
        return g.snapshot();
    };
    CHECK(build() == build());
}
