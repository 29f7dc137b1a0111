#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ersentinel/types.hpp"

namespace ersentinel {

/// Keyed digest over the canonical encoding of an encounter record.
struct Signature {
    std::array<std::uint8_t, 8> digest{};

    friend bool operator==(const Signature& a, const Signature& b) {
        return a.digest == b.digest;
    }
    friend bool operator!=(const Signature& a, const Signature& b) { return !(a == b); }
};

std::string to_hex(const Signature& sig);
Signature signature_from_hex(const std::string& hex);

/// Co-signed record of one contact between two nodes, from the local
/// node's point of view. Both parties of an authentic contact produce
/// one, with mirrored entry sets. The unit of evidence for detection.
///
/// ground_truth_forged is a simulator annotation used only by the
/// evaluation harness; the detector-facing view strips it.
struct EncounterRecord {
    NodeId local_node;
    NodeId peer_node;
    SimTime timestamp = 0;
    std::uint64_t local_seq = 0;
    std::vector<MessageEntry> entries;
    Signature sig_local;
    Signature sig_peer;
    bool ground_truth_forged = false;
};

}  // namespace ersentinel
