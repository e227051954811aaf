#include "twincity/overlay.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <sstream>

namespace twincity::overlay {

std::string to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::TwinModel: return "TwinModel";
        case NodeKind::ServiceApp: return "ServiceApp";
        case NodeKind::DataGateway: return "DataGateway";
    }
    return "?";
}

OverlayGraph::OverlayGraph(int peer_degree, UnderlayAllocator allocator)
    : peer_degree_(peer_degree), allocator_(std::move(allocator)) {
    if (peer_degree_ < 0) {
        throw std::invalid_argument("OverlayGraph: peer_degree must be >= 0");
    }
    if (!allocator_) {
        allocator_ = [this](int, int) { return std::vector<int>{next_underlay_id_++}; };
    }
}

int OverlayGraph::add_gateway(rtps::Guid guid, DomainId domain) {
    if (gateways_.contains(domain)) {
        throw std::invalid_argument("add_gateway: domain already has a gateway");
    }
    if (!guids_.insert(guid).second) {
        throw std::invalid_argument("add_gateway: duplicate guid");
    }
    const int id = next_node_id_++;
    nodes_[id] = OverlayNode{id, guid, domain, NodeKind::DataGateway};
    adjacency_[id];
    gateways_[domain] = id;
    return id;
}

int OverlayGraph::register_twin(rtps::Guid guid, DomainId domain, NodeKind kind) {
    const auto gw = gateways_.find(domain);
    if (gw == gateways_.end()) {
        throw std::invalid_argument("register_twin: domain has no gateway");
    }
    if (!guids_.insert(guid).second) {
        throw std::invalid_argument("register_twin: duplicate guid");
    }
    const int id = next_node_id_++;
    nodes_[id] = OverlayNode{id, guid, domain, kind};
    adjacency_[id];
    add_link(id, gw->second);
    if (kind == NodeKind::ServiceApp) {
        return id;  // applications hang off the gateway only
    }

    // Peer with the k nearest existing domain twins by node-id distance,
    // ties toward the smaller id.
    std::vector<int> peers;
    for (const auto& [nid, n] : nodes_) {
        if (n.domain == domain && nid != id && n.kind == NodeKind::TwinModel) {
            peers.push_back(nid);
        }
    }
    std::sort(peers.begin(), peers.end(), [id](int x, int y) {
        const int dx = std::abs(x - id);
        const int dy = std::abs(y - id);
        return dx != dy ? dx < dy : x < y;
    });
    for (int i = 0; i < static_cast<int>(peers.size()) && i < peer_degree_; ++i) {
        add_link(id, peers[i]);
    }
    return id;
}

void OverlayGraph::add_link(int a, int b) {
    if (a == b) {
        throw std::invalid_argument("add_link: self-loop");
    }
    const auto key = std::minmax(a, b);
    if (links_.contains({key.first, key.second})) {
        return;
    }
    std::vector<int> path = allocator_(key.first, key.second);
    if (path.empty()) {
        throw std::invalid_argument("add_link: underlay path must be non-empty");
    }
    links_[{key.first, key.second}] = OverlayLink{key.first, key.second, std::move(path)};
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
}

void OverlayGraph::remove_node(int node_id) {
    const auto it = nodes_.find(node_id);
    if (it == nodes_.end()) {
        throw std::invalid_argument("remove_node: unknown node");
    }
    const DomainId domain = it->second.domain;
    if (gateways_.contains(domain) && gateways_[domain] == node_id) {
        gateways_.erase(domain);
    }
    guids_.erase(it->second.guid);
    for (int nb : adjacency_[node_id]) {
        adjacency_[nb].erase(node_id);
        const auto key = std::minmax(node_id, nb);
        links_.erase({key.first, key.second});
    }
    adjacency_.erase(node_id);
    nodes_.erase(it);
    for (auto& [topic, subs] : subscriptions_) {
        subs.erase(node_id);
    }

    // Self-update: bridge any separated components, lowest node ids first.
    auto components = domain_components(domain);
    if (components.size() > 1) {
        for (auto& c : components) {
            std::sort(c.begin(), c.end());
        }
        std::sort(components.begin(), components.end(),
                  [](const auto& x, const auto& y) { return x.front() < y.front(); });
        for (std::size_t i = 1; i < components.size(); ++i) {
            add_link(components[0].front(), components[i].front());
        }
    }
}

std::vector<int> OverlayGraph::domain_nodes(DomainId domain) const {
    std::vector<int> out;
    for (const auto& [id, n] : nodes_) {
        if (n.domain == domain) {
            out.push_back(id);
        }
    }
    return out;
}

std::vector<std::vector<int>> OverlayGraph::domain_components(DomainId domain) const {
    std::vector<std::vector<int>> components;
    std::set<int> seen;
    for (int start : domain_nodes(domain)) {
        if (seen.contains(start)) {
            continue;
        }
        std::vector<int> comp;
        std::deque<int> frontier{start};
        seen.insert(start);
        while (!frontier.empty()) {
            const int cur = frontier.front();
            frontier.pop_front();
            comp.push_back(cur);
            const auto adj = adjacency_.find(cur);
            if (adj == adjacency_.end()) {
                continue;
            }
            for (int nb : adj->second) {
                if (!seen.contains(nb)) {
                    seen.insert(nb);
                    frontier.push_back(nb);
                }
            }
        }
        components.push_back(std::move(comp));
    }
    return components;
}

bool OverlayGraph::domain_connected(DomainId domain) const {
    return domain_components(domain).size() <= 1;
}

std::vector<int> OverlayGraph::route(int src, int dst) const {
    if (!nodes_.contains(src) || !nodes_.contains(dst)) {
        throw std::invalid_argument("route: unknown endpoint");
    }
    if (nodes_.at(src).domain != nodes_.at(dst).domain) {
        throw std::invalid_argument("route: endpoints cross domains");
    }
    if (src == dst) {
        return {src};
    }

    // BFS distances from dst, then a greedy smallest-id walk from src along
    // strictly decreasing distances yields the lexicographically smallest
    // shortest path.
    std::map<int, int> dist;
    dist[dst] = 0;
    std::deque<int> frontier{dst};
    while (!frontier.empty()) {
        const int cur = frontier.front();
        frontier.pop_front();
        for (int nb : adjacency_.at(cur)) {
            if (!dist.contains(nb)) {
                dist[nb] = dist[cur] + 1;
                frontier.push_back(nb);
            }
        }
    }
    if (!dist.contains(src)) {
        throw std::runtime_error("route: destination unreachable");
    }
    std::vector<int> path{src};
    int cur = src;
    while (cur != dst) {
        int next = -1;
        for (int nb : adjacency_.at(cur)) {  // std::set iterates in id order
            if (dist.contains(nb) && dist.at(nb) == dist.at(cur) - 1) {
                next = nb;
                break;
            }
        }
        path.push_back(next);
        cur = next;
    }
    return path;
}

void OverlayGraph::subscribe(const Topic& topic, int node_id) {
    if (!nodes_.contains(node_id)) {
        throw std::invalid_argument("subscribe: unknown node");
    }
    if (nodes_.at(node_id).domain != topic.domain) {
        throw std::invalid_argument("subscribe: node domain differs from topic domain");
    }
    subscriptions_[topic].insert(node_id);
}

void OverlayGraph::unsubscribe(const Topic& topic, int node_id) {
    const auto it = subscriptions_.find(topic);
    if (it != subscriptions_.end()) {
        it->second.erase(node_id);
    }
}

std::vector<UpdateTarget> OverlayGraph::propagate_update(const Topic& topic,
                                                         int src_node) const {
    if (!nodes_.contains(src_node)) {
        throw std::invalid_argument("propagate_update: unknown source node");
    }
    std::vector<UpdateTarget> targets;
    const auto it = subscriptions_.find(topic);
    if (it == subscriptions_.end()) {
        return targets;
    }
    const DomainId src_domain = nodes_.at(src_node).domain;
    for (int sub : it->second) {
        if (sub == src_node || nodes_.at(sub).domain != src_domain) {
            continue;
        }
        std::vector<int> hops = route(src_node, sub);
        UpdateTarget t;
        t.node_id = sub;
        for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
            const auto key = std::minmax(hops[i], hops[i + 1]);
            const auto& link = links_.at({key.first, key.second});
            t.underlay_path.insert(t.underlay_path.end(), link.underlay_path.begin(),
                                   link.underlay_path.end());
        }
        targets.push_back(std::move(t));
    }
    return targets;
}

const OverlayNode& OverlayGraph::node(int node_id) const {
    const auto it = nodes_.find(node_id);
    if (it == nodes_.end()) {
        throw std::invalid_argument("node: unknown node");
    }
    return it->second;
}

std::vector<int> OverlayGraph::neighbors(int node_id) const {
    const auto it = adjacency_.find(node_id);
    if (it == adjacency_.end()) {
        throw std::invalid_argument("neighbors: unknown node");
    }
    return {it->second.begin(), it->second.end()};
}

int OverlayGraph::gateway(DomainId domain) const {
    const auto it = gateways_.find(domain);
    if (it == gateways_.end()) {
        throw std::invalid_argument("gateway: domain has no gateway");
    }
    return it->second;
}

std::string OverlayGraph::snapshot() const {
    std::ostringstream out;
    for (const auto& [id, n] : nodes_) {
        out << "node " << id << " " << rtps::to_string(n.guid) << " " << n.domain.id << " "
            << to_string(n.kind) << "\n";
    }
    for (const auto& [key, link] : links_) {
        out << "link " << link.a << " " << link.b << " ";
        for (std::size_t i = 0; i < link.underlay_path.size(); ++i) {
            out << (i ? "," : "") << link.underlay_path[i];
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace twincity::overlay
