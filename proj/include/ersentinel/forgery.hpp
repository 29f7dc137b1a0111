#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "ersentinel/counters.hpp"
#include "ersentinel/encounter.hpp"
#include "ersentinel/signing.hpp"

namespace ersentinel {

/// Minimum number of invented sent-relayed entries that lifts the relayed
/// ratio to at least target_rr while pushing the self-forwarding ratio to at
/// most target_sr. Uses the detector's own ratio arithmetic, so the result
/// is exact rather than an estimate.
std::uint64_t fake_entry_deficit(const BehaviorCounters& counters, double target_rr,
                                 double target_sr);

/// Partner with the fewest authentic encounters in `history`; ties go to the
/// lower node id. Partners that never appear count as zero encounters.
NodeId choose_partner(const std::set<NodeId>& partners,
                      const std::vector<EncounterRecord>& history);

struct ForgeOutcome {
    std::vector<EncounterRecord> attacker_records;
    std::vector<EncounterRecord> partner_records;
    std::uint64_t forged_entries = 0;
    bool unreachable = false;
};

/// One-shot forgery against a finished history: produces a single co-signed
/// fake record pair (attacker's claim plus the partner's mirror) appended
/// after both parties' last authentic records, claiming enough messages from
/// `claimable` (in order) to meet the targets. Returns empty record lists
/// when the targets already hold; sets `unreachable` when `claimable` runs
/// out first.
ForgeOutcome forge_collusion_records(
    const NodeId& attacker, const std::set<NodeId>& partners,
    const std::map<NodeId, std::vector<EncounterRecord>>& histories,
    const std::vector<std::uint64_t>& claimable, const MessageIndex& messages,
    double target_rr, double target_sr, const Keyring& ring);

struct ColluderSpec {
    std::set<NodeId> partners;
    double target_rr = 0.7;
    double target_sr = 0.5;
};

struct ForgeReport {
    std::uint64_t forged_records = 0;
    std::uint64_t forged_entries = 0;
    std::uint64_t unreachable_entries = 0;
};

/// Windowed forgery pass over a finished run. Each colluder sizes one fake
/// record per window against its targets and claims the messages it actually
/// dropped in that window. Mirror records landing on a partner inflate that
/// partner's receipt count, so sizes are iterated to a fixed point per
/// window. Returned records carry valid co-signatures, legal sequence slots
/// between the neighbours they will sit among, and timestamps borrowed from
/// authentic encounters; the caller merges them into the trace.
std::vector<EncounterRecord> forge_windows(
    const std::map<NodeId, ColluderSpec>& colluders,
    const std::map<NodeId, std::vector<EncounterRecord>>& histories,
    const std::map<NodeId, std::vector<std::pair<SimTime, std::uint64_t>>>& dropped,
    const MessageIndex& messages, SimTime window, SimTime horizon, const Keyring& ring,
    ForgeReport& report);

}  // namespace ersentinel
