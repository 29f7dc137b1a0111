#pragma once

// Builders shared across test files: nodes, entries, co-signed record
// pairs, and tiny keyrings.

#include <utility>
#include <vector>

#include "ersentinel/encounter.hpp"
#include "ersentinel/signing.hpp"
#include "ersentinel/types.hpp"

namespace testutil {

using namespace ersentinel;

inline NodeId srv(std::uint32_t i) { return {i, Role::server}; }
inline NodeId vm(std::uint32_t i) { return {i, Role::vm}; }

inline MessageEntry sent(std::uint64_t id, EntryKind kind = EntryKind::relayed) {
    return {id, Direction::sent, kind};
}

inline MessageEntry received(std::uint64_t id) {
    return {id, Direction::received, EntryKind::relayed};
}

inline EncounterRecord make_er(const NodeId& local, const NodeId& peer, SimTime t,
                               std::uint64_t seq, std::vector<MessageEntry> entries = {}) {
    EncounterRecord er;
    er.local_node = local;
    er.peer_node = peer;
    er.timestamp = t;
    er.local_seq = seq;
    er.entries = std::move(entries);
    return er;
}

inline void co_sign(EncounterRecord& er, const Keyring& ring) {
    er.sig_local = sign(*ring.find(er.local_node), er);
    er.sig_peer = sign(*ring.find(er.peer_node), er);
}

inline std::vector<MessageEntry> mirrored(const std::vector<MessageEntry>& entries) {
    std::vector<MessageEntry> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back({e.message_id,
                       e.direction == Direction::sent ? Direction::received : Direction::sent,
                       EntryKind::relayed});
    }
    return out;
}

/// Both sides of one authentic contact, mirrored and co-signed.
inline std::pair<EncounterRecord, EncounterRecord> contact(
    const NodeId& a, const NodeId& b, SimTime t, std::uint64_t seq_a, std::uint64_t seq_b,
    const std::vector<MessageEntry>& entries_a, const Keyring& ring) {
    auto er_a = make_er(a, b, t, seq_a, entries_a);
    auto er_b = make_er(b, a, t, seq_b, mirrored(entries_a));
    co_sign(er_a, ring);
    co_sign(er_b, ring);
    return {er_a, er_b};
}

inline Keyring test_ring(const std::vector<NodeId>& nodes, std::uint64_t seed = 99) {
    return Keyring::derive(seed, nodes);
}

}  // namespace testutil
