#pragma once

#include <string>
#include <vector>

#include "ersentinel/encounter.hpp"
#include "ersentinel/signing.hpp"

namespace ersentinel {

enum class ViolationKind {
    seq_order,         // local_seq not strictly increasing
    timestamp_order,   // timestamp decreased in sequence order
    bad_local_sig,     // local signature does not verify
    bad_peer_sig,      // peer signature does not verify
    unverifiable,      // no key for a signer, distinct from invalid
    one_sided_claim,   // encounter present in only one party's history
    entry_divergence,  // both recorded it, entry sets disagree
};

std::string to_string(ViolationKind kind);

struct AuditViolation {
    ViolationKind kind = ViolationKind::seq_order;
    NodeId node;           // implicated node
    SimTime timestamp = 0; // when the offending record claims to be from
    std::size_t index = 0; // position in that node's history, where meaningful
    std::string detail;
};

/// Order audit over one node's history as stored (expected sorted by
/// local_seq). Flags every index where local_seq fails strict increase
/// or the timestamp regresses. Empty result means pass.
std::vector<AuditViolation> audit_sequences(const std::vector<EncounterRecord>& history);

/// Verifies both signatures of every record against the keyring.
std::vector<AuditViolation> audit_signatures(const std::vector<EncounterRecord>& history,
                                             const Keyring& ring);

/// Compares two parties' accounts of their mutual contacts, given each
/// one's full history. Records for the same contact must exist on both
/// sides with mirrored entry sets (directions flipped; entry kind is the
/// sender's private knowledge and is not compared). A claim the other
/// side never recorded implicates the claimer; diverging entry sets
/// implicate both.
std::vector<AuditViolation> cross_check_neighbors(const std::vector<EncounterRecord>& history_a,
                                                  const std::vector<EncounterRecord>& history_b,
                                                  const NodeId& a, const NodeId& b);

}  // namespace ersentinel
