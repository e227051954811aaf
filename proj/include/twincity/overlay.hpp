#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "twincity/core.hpp"
#include "twincity/rtps.hpp"

namespace twincity::overlay {

enum class NodeKind { TwinModel, ServiceApp, DataGateway };

std::string to_string(NodeKind kind);

/// One overlay node per domain participant.
struct OverlayNode {
    int node_id = 0;
    rtps::Guid guid{};
    DomainId domain{};
    NodeKind kind = NodeKind::TwinModel;
};

/// Logical link; the underlay_path lists the physical link ids it maps to.
struct OverlayLink {
    int a = 0;
    int b = 0;
    std::vector<int> underlay_path;  // length >= 1
};

/// A topic update target with the concatenated underlay path to reach it.
struct UpdateTarget {
    int node_id = 0;
    std::vector<int> underlay_path;
};

/// Mints the underlay path backing a new logical link between two nodes.
using UnderlayAllocator = std::function<std::vector<int>(int a, int b)>;

/// Distributed twin-node graph with per-domain connectivity maintained by
/// deterministic repair. Single-writer; queries are const.
class OverlayGraph {
public:
    /// peer_degree: how many nearest domain peers each new twin links to.
    /// The allocator defaults to minting one fresh single-hop path per link.
    explicit OverlayGraph(int peer_degree = 2, UnderlayAllocator allocator = {});

    /// Adds the per-domain gateway node. Must exist before twins register.
    int add_gateway(rtps::Guid guid, DomainId domain);

    /// Registers a twin (or service-app) node: links it to the domain's
    /// gateway and to the peer_degree nearest domain peers by node id.
    int register_twin(rtps::Guid guid, DomainId domain, NodeKind kind = NodeKind::TwinModel);

    /// Removes a node and its links; adds lowest-id repair links if the
    /// domain subgraph became disconnected. Drops the node's subscriptions.
    void remove_node(int node_id);

    /// Hop-count shortest path, ties broken by lexicographically smallest
    /// node-id sequence. Throws if src/dst cross domains or are unreachable.
    std::vector<int> route(int src, int dst) const;

    void subscribe(const Topic& topic, int node_id);
    void unsubscribe(const Topic& topic, int node_id);

    /// Subscribers of the topic excluding src, each with the underlay path
    /// of the route from src. Other-domain subscribers are never returned.
    std::vector<UpdateTarget> propagate_update(const Topic& topic, int src_node) const;

    bool has_node(int node_id) const { return nodes_.contains(node_id); }
    int next_node_id() const { return next_node_id_; }
    const OverlayNode& node(int node_id) const;
    const std::map<int, OverlayNode>& nodes() const { return nodes_; }
    const std::map<std::pair<int, int>, OverlayLink>& links() const { return links_; }
    const std::map<Topic, std::set<int>>& subscriptions() const { return subscriptions_; }
    std::vector<int> neighbors(int node_id) const;
    int gateway(DomainId domain) const;

    /// True when every pair of nodes in the domain is connected.
    bool domain_connected(DomainId domain) const;

    /// Text snapshot: node and link lines, deterministic order.
    std::string snapshot() const;

private:
    void add_link(int a, int b);
    std::vector<int> domain_nodes(DomainId domain) const;
    std::vector<std::vector<int>> domain_components(DomainId domain) const;

    int peer_degree_;
    UnderlayAllocator allocator_;
    int next_node_id_ = 0;
    int next_underlay_id_ = 0;
    std::map<int, OverlayNode> nodes_;
    std::map<std::pair<int, int>, OverlayLink> links_;
    std::map<int, std::set<int>> adjacency_;
    std::map<Topic, std::set<int>> subscriptions_;
    std::map<DomainId, int> gateways_;
    std::set<rtps::Guid> guids_;
};

}  // namespace twincity::overlay
