#include "ersentinel/counters.hpp"

namespace ersentinel {

BehaviorCounters compute_counters(const std::vector<EncounterRecord>& history,
                                  const NodeId& node, const MessageIndex& messages) {
    BehaviorCounters c;
    for (const auto& er : history) {
        for (const auto& e : er.entries) {
            if (e.direction == Direction::sent) {
                ++c.sm;
                if (e.kind == EntryKind::generated) {
                    ++c.gsm;
                } else {
                    ++c.rfm;
                }
            } else {
                if (!messages.is_destination(e.message_id, node)) ++c.rmr;
            }
        }
    }
    return c;
}

double relayed_ratio(const BehaviorCounters& c) {
    if (c.rmr == 0) return 1.0;
    return static_cast<double>(c.rfm) / static_cast<double>(c.rmr);
}

double self_forwarding_ratio(const BehaviorCounters& c) {
    if (c.sm == 0) return 0.0;
    return static_cast<double>(c.gsm) / static_cast<double>(c.sm);
}

double fxs(const PairStats& p) {
    if (p.f == 0) return p.m == 0 ? 0.0 : kFxsAnomalySentinel;
    return static_cast<double>(p.m) / static_cast<double>(p.f);
}

std::map<NodeId, PairStats> pair_stats(const std::vector<EncounterRecord>& history,
                                       const NodeId& node) {
    std::map<NodeId, PairStats> stats;
    for (const auto& er : history) {
        auto& s = stats[er.peer_node];
        if (s.f == 0 && s.m == 0) {
            s.from = node;
            s.to = er.peer_node;
        }
        ++s.f;
        for (const auto& e : er.entries) {
            if (e.direction == Direction::sent) ++s.m;
        }
    }
    return stats;
}

}  // namespace ersentinel
