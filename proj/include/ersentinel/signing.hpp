#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "ersentinel/encounter.hpp"

namespace ersentinel {

/// 128-bit shared secret. Held by the node itself and by the trusted
/// auditor; producing a valid signature over a record requires the key,
/// so a fake record naming a peer verifies only if that peer's key was
/// used (i.e. the peer colludes).
struct NodeKey {
    std::array<std::uint8_t, 16> bytes{};

    friend bool operator==(const NodeKey& a, const NodeKey& b) { return a.bytes == b.bytes; }
};

std::string to_hex(const NodeKey& key);
NodeKey key_from_hex(const std::string& hex);

/// SipHash-2-4 with 64-bit output.
std::uint64_t siphash24(const NodeKey& key, std::span<const std::uint8_t> data);

Signature sign(const NodeKey& key, const EncounterRecord& er);
bool verify(const NodeKey& key, const EncounterRecord& er, const Signature& sig);

/// All node keys, as the trusted auditor sees them.
class Keyring {
public:
    void insert(const NodeId& node, const NodeKey& key) { keys_[node] = key; }
    std::optional<NodeKey> find(const NodeId& node) const;
    bool empty() const { return keys_.empty(); }
    const std::map<NodeId, NodeKey>& all() const { return keys_; }

    /// Per-node keys expanded deterministically from one master seed.
    static Keyring derive(std::uint64_t master_seed,
                          const std::vector<NodeId>& nodes);

private:
    std::map<NodeId, NodeKey> keys_;
};

}  // namespace ersentinel
