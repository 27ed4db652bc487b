#include "transactive/network.hpp"

#include <iterator>
#include <string>

#include "transactive/errors.hpp"
#include "transactive/mdst.hpp"

namespace transactive {

static_assert(std::variant_size_v<Payload> == 5,
              "a new payload type must be added to the privacy audit");

PayloadKind kind_of(const Payload& payload) {
    return static_cast<PayloadKind>(payload.index());
}

const char* to_string(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::DistanceAnnounce: return "DistanceAnnounce";
        case PayloadKind::EccentricityAnnounce: return "EccentricityAnnounce";
        case PayloadKind::ParentAnnounce: return "ParentAnnounce";
        case PayloadKind::SweepValue: return "SweepValue";
        case PayloadKind::PowerValue: return "PowerValue";
    }
    return "?";
}

Network::Network(Topology topology) : topology_(std::move(topology)) {}

void Network::set_topology(Topology topology) {
    if (delivered_ || !outbox_.empty()) throw ProtocolError("topology change in the middle of a round");
    topology_ = std::move(topology);
    tree_links_.reset();
}

void Network::set_tree(const TreeOverlay& tree) {
    for (const auto& [a, nbrs] : tree.tree_neighbors) {
        if (!topology_.contains(a)) throw OverlayMismatchError("tree agent " + to_string(a) + " not in topology");
        for (AgentId b : nbrs) {
            if (!topology_.has_edge(a, b)) {
                throw OverlayMismatchError("tree edge (" + to_string(a) + ", " + to_string(b) +
                                           ") is not a topology edge");
            }
        }
    }
    if (tree.tree_neighbors.size() != topology_.size()) {
        throw OverlayMismatchError("tree does not span the topology");
    }
    tree_links_ = tree.tree_neighbors;
}

void Network::clear_tree() { tree_links_.reset(); }

bool Network::linked(AgentId a, AgentId b, Channel channel) const {
    if (channel == Channel::Topology) return topology_.has_edge(a, b);
    if (!tree_links_) return false;
    auto it = tree_links_->find(a);
    return it != tree_links_->end() && it->second.contains(b);
}

void Network::send(AgentId from, AgentId to, Payload payload, Channel channel) {
    if (delivered_) throw ProtocolError("send after the round barrier");
    if (!linked(from, to, channel)) {
        throw ProtocolError("no " + std::string(channel == Channel::Tree ? "tree" : "topology") +
                            " link " + to_string(from) + " -> " + to_string(to));
    }
    Message msg{from, to, round_, std::move(payload)};
    if (observer_) observer_(msg, channel);
    outbox_[to].push_back(std::move(msg));
    ++sent_;
}

void Network::deliver() {
    if (delivered_) throw ProtocolError("round delivered twice");
    for (auto& [to, msgs] : outbox_) {
        auto& box = inbox_[to];
        box.insert(box.end(), std::make_move_iterator(msgs.begin()),
                   std::make_move_iterator(msgs.end()));
    }
    outbox_.clear();
    delivered_ = true;
}

std::vector<Message> Network::take(AgentId agent) {
    if (!delivered_) throw ProtocolError("inbox read before the round barrier");
    auto it = inbox_.find(agent);
    if (it == inbox_.end()) return {};
    std::vector<Message> out = std::move(it->second);
    inbox_.erase(it);
    for (const auto& m : out) {
        if (m.round != round_) throw ProtocolError("message from round " + std::to_string(m.round) +
                                                   " read in round " + std::to_string(round_));
    }
    return out;
}

void Network::end_round() {
    if (!delivered_) deliver();
    if (!inbox_.empty()) {
        throw ProtocolError("undrained inbox at agent " + to_string(inbox_.begin()->first) +
                            " at end of round " + std::to_string(round_));
    }
    delivered_ = false;
    ++round_;
}

}  // namespace transactive
