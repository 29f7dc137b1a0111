#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "ersentinel/encounter.hpp"

namespace ersentinel {

/// Per-node event tallies behind the RR and SR metrics.
///
/// rfm: relayed messages forwarded onward; rmr: messages received as a
/// relay (obligations, whether or not honored); gsm: messages the node
/// generated and sent out; sm: all messages it sent out. Forged records
/// can push rfm above rmr, so that is deliberately not an invariant.
struct BehaviorCounters {
    std::uint64_t rfm = 0;
    std::uint64_t rmr = 0;
    std::uint64_t gsm = 0;
    std::uint64_t sm = 0;
};

/// Ordered-pair message/encounter tallies behind the FXS metric:
/// m messages sent from `from` to `to`, over f recorded encounters.
struct PairStats {
    NodeId from;
    NodeId to;
    std::uint64_t m = 0;
    std::uint64_t f = 0;
};

/// Message metadata the auditor learns from msg_created lines; needed to
/// tell relay receipts from final-destination receipts.
class MessageIndex {
public:
    void insert(std::uint64_t id, const NodeId& destination) {
        destinations_[id] = destination;
    }
    /// True when `node` is known to be the message's final destination.
    /// Unknown ids count as relay obligations.
    bool is_destination(std::uint64_t id, const NodeId& node) const {
        auto it = destinations_.find(id);
        return it != destinations_.end() && it->second == node;
    }
    std::size_t size() const { return destinations_.size(); }

private:
    std::map<std::uint64_t, NodeId> destinations_;
};

/// Tally one node's history. `history` must contain only records where
/// `node` is the local side.
BehaviorCounters compute_counters(const std::vector<EncounterRecord>& history,
                                  const NodeId& node, const MessageIndex& messages);

/// RR = RFM / RMR. A node with no relay obligations has nothing to
/// drop, so rmr = 0 maps to 1.0.
double relayed_ratio(const BehaviorCounters& c);

/// SR = GSM / SM. No sends means no self-forwarding evidence: 0.0.
double self_forwarding_ratio(const BehaviorCounters& c);

/// FXS = M / F, messages per encounter for one ordered pair. Claimed
/// messages over zero encounters is maximally anomalous: +infinity.
/// No messages and no encounters: 0.
double fxs(const PairStats& p);

constexpr double kFxsAnomalySentinel = std::numeric_limits<double>::infinity();

/// Per-peer pair stats from one node's history: f counts records naming
/// the peer, m counts sent entries inside them. Keyed by peer, ordered.
std::map<NodeId, PairStats> pair_stats(const std::vector<EncounterRecord>& history,
                                       const NodeId& node);

}  // namespace ersentinel
