#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "transactive/graph.hpp"

namespace transactive {

struct TreeOverlay;

// Message payloads. These five types are the complete vocabulary agents use to
// talk to each other: routing distances, eccentricities, tree parent choices,
// sweep partial sums and powers. No payload carries a cost coefficient, a
// consumer valuation or a gradient.

struct DistanceAnnounce {
    AgentId destination;
    HopCount distance = 0;
};

struct EccentricityAnnounce {
    AgentId agent;
    HopCount value = 0;
};

/// Sent once by a non-root agent to the neighbor it selected as tree parent.
struct ParentAnnounce {
    AgentId parent;
};

struct SweepValue {
    std::vector<double> values;
};

/// Signed power in watts (consumers positive, generators negative).
struct PowerValue {
    double watts = 0.0;
};

using Payload =
    std::variant<DistanceAnnounce, EccentricityAnnounce, ParentAnnounce, SweepValue, PowerValue>;

enum class PayloadKind { DistanceAnnounce, EccentricityAnnounce, ParentAnnounce, SweepValue, PowerValue };

PayloadKind kind_of(const Payload& payload);
const char* to_string(PayloadKind kind);

struct Message {
    AgentId sender;
    AgentId recipient;
    std::uint64_t round = 0;
    Payload payload;
};

/// Which link set a phase is allowed to use.
enum class Channel { Topology, Tree };

/// Round-synchronous, lossless message delivery.
///
/// A round is: every agent calls send(); deliver() acts as the barrier; every
/// agent drains its own inbox with take(); end_round() checks that all inboxes
/// are empty and advances the round counter. Messages are only accepted along
/// edges of the channel's link set.
class Network {
public:
    using Observer = std::function<void(const Message&, Channel)>;

    explicit Network(Topology topology);

    void set_topology(Topology topology);
    void set_tree(const TreeOverlay& tree);
    void clear_tree();

    const Topology& topology() const noexcept { return topology_; }

    void send(AgentId from, AgentId to, Payload payload, Channel channel);
    void deliver();
    std::vector<Message> take(AgentId agent);
    void end_round();

    std::uint64_t round() const noexcept { return round_; }
    std::uint64_t messages_sent() const noexcept { return sent_; }

    void set_observer(Observer observer) { observer_ = std::move(observer); }

private:
    bool linked(AgentId a, AgentId b, Channel channel) const;

    Topology topology_;
    std::optional<std::map<AgentId, std::set<AgentId>>> tree_links_;
    std::map<AgentId, std::vector<Message>> outbox_;
    std::map<AgentId, std::vector<Message>> inbox_;
    std::uint64_t round_ = 0;
    std::uint64_t sent_ = 0;
    bool delivered_ = false;
    Observer observer_;
};

}  // namespace transactive
