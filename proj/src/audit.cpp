#include "ersentinel/audit.hpp"

#include <algorithm>
#include <tuple>

namespace ersentinel {

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::seq_order: return "seq_order";
        case ViolationKind::timestamp_order: return "timestamp_order";
        case ViolationKind::bad_local_sig: return "bad_local_sig";
        case ViolationKind::bad_peer_sig: return "bad_peer_sig";
        case ViolationKind::unverifiable: return "unverifiable";
        case ViolationKind::one_sided_claim: return "one_sided_claim";
        case ViolationKind::entry_divergence: return "entry_divergence";
    }
    return "seq_order";
}

std::vector<AuditViolation> audit_sequences(const std::vector<EncounterRecord>& history) {
    std::vector<AuditViolation> violations;
    for (std::size_t i = 1; i < history.size(); ++i) {
        const auto& prev = history[i - 1];
        const auto& cur = history[i];
        if (cur.local_seq <= prev.local_seq) {
            violations.push_back({ViolationKind::seq_order, cur.local_node, cur.timestamp, i,
                                  "seq " + std::to_string(cur.local_seq) + " after " +
                                      std::to_string(prev.local_seq)});
        }
        if (cur.timestamp < prev.timestamp) {
            violations.push_back({ViolationKind::timestamp_order, cur.local_node, cur.timestamp,
                                  i,
                                  "t " + std::to_string(cur.timestamp) + " after " +
                                      std::to_string(prev.timestamp)});
        }
    }
    return violations;
}

std::vector<AuditViolation> audit_signatures(const std::vector<EncounterRecord>& history,
                                             const Keyring& ring) {
    std::vector<AuditViolation> violations;
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& er = history[i];
        const auto local_key = ring.find(er.local_node);
        const auto peer_key = ring.find(er.peer_node);
        if (!local_key) {
            violations.push_back({ViolationKind::unverifiable, er.local_node, er.timestamp, i,
                                  "no key for " + to_string(er.local_node)});
        } else if (!verify(*local_key, er, er.sig_local)) {
            violations.push_back({ViolationKind::bad_local_sig, er.local_node, er.timestamp, i,
                                  "local signature invalid"});
        }
        if (!peer_key) {
            violations.push_back({ViolationKind::unverifiable, er.local_node, er.timestamp, i,
                                  "no key for peer " + to_string(er.peer_node)});
        } else if (!verify(*peer_key, er, er.sig_peer)) {
            violations.push_back({ViolationKind::bad_peer_sig, er.local_node, er.timestamp, i,
                                  "peer signature invalid"});
        }
    }
    return violations;
}

namespace {

// Entry set as the other side should mirror it: (message, direction).
std::vector<std::pair<std::uint64_t, Direction>> normalized_entries(
    const EncounterRecord& er) {
    std::vector<std::pair<std::uint64_t, Direction>> out;
    out.reserve(er.entries.size());
    for (const auto& e : er.entries) out.emplace_back(e.message_id, e.direction);
    std::sort(out.begin(), out.end());
    return out;
}

bool entries_mirror(const EncounterRecord& a, const EncounterRecord& b) {
    auto ea = normalized_entries(a);
    auto eb = normalized_entries(b);
    if (ea.size() != eb.size()) return false;
    for (auto& [id, dir] : eb) {
        dir = dir == Direction::sent ? Direction::received : Direction::sent;
    }
    std::sort(eb.begin(), eb.end());
    return ea == eb;
}

std::vector<const EncounterRecord*> records_naming(
    const std::vector<EncounterRecord>& history, const NodeId& peer) {
    std::vector<const EncounterRecord*> out;
    for (const auto& er : history) {
        if (er.peer_node == peer) out.push_back(&er);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const EncounterRecord* x, const EncounterRecord* y) {
                         return std::tie(x->timestamp, x->local_seq) <
                                std::tie(y->timestamp, y->local_seq);
                     });
    return out;
}

}  // namespace

std::vector<AuditViolation> cross_check_neighbors(const std::vector<EncounterRecord>& history_a,
                                                  const std::vector<EncounterRecord>& history_b,
                                                  const NodeId& a, const NodeId& b) {
    std::vector<AuditViolation> violations;
    auto claims_a = records_naming(history_a, b);
    auto claims_b = records_naming(history_b, a);

    // Walk both timelines, grouping claims by equal timestamp.
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < claims_a.size() || j < claims_b.size()) {
        SimTime t;
        if (i >= claims_a.size()) {
            t = claims_b[j]->timestamp;
        } else if (j >= claims_b.size()) {
            t = claims_a[i]->timestamp;
        } else {
            t = std::min(claims_a[i]->timestamp, claims_b[j]->timestamp);
        }
        std::vector<const EncounterRecord*> group_a;
        std::vector<const EncounterRecord*> group_b;
        while (i < claims_a.size() && claims_a[i]->timestamp == t) group_a.push_back(claims_a[i++]);
        while (j < claims_b.size() && claims_b[j]->timestamp == t) group_b.push_back(claims_b[j++]);

        // Pair records with mirrored entries first.
        std::vector<bool> used_b(group_b.size(), false);
        std::vector<const EncounterRecord*> unmatched_a;
        for (const auto* ra : group_a) {
            bool matched = false;
            for (std::size_t k = 0; k < group_b.size(); ++k) {
                if (!used_b[k] && entries_mirror(*ra, *group_b[k])) {
                    used_b[k] = true;
                    matched = true;
                    break;
                }
            }
            if (!matched) unmatched_a.push_back(ra);
        }
        std::vector<const EncounterRecord*> unmatched_b;
        for (std::size_t k = 0; k < group_b.size(); ++k) {
            if (!used_b[k]) unmatched_b.push_back(group_b[k]);
        }

        // Leftovers pair up as divergent accounts of the same contact;
        // anything beyond that is a one-sided claim.
        const std::size_t paired = std::min(unmatched_a.size(), unmatched_b.size());
        for (std::size_t k = 0; k < paired; ++k) {
            violations.push_back({ViolationKind::entry_divergence, a, t, 0,
                                  "entry sets disagree with " + to_string(b)});
            violations.push_back({ViolationKind::entry_divergence, b, t, 0,
                                  "entry sets disagree with " + to_string(a)});
        }
        for (std::size_t k = paired; k < unmatched_a.size(); ++k) {
            violations.push_back({ViolationKind::one_sided_claim, a, t, 0,
                                  "claims contact " + to_string(b) + " never recorded"});
        }
        for (std::size_t k = paired; k < unmatched_b.size(); ++k) {
            violations.push_back({ViolationKind::one_sided_claim, b, t, 0,
                                  "claims contact " + to_string(a) + " never recorded"});
        }
    }
    return violations;
}

}  // namespace ersentinel
