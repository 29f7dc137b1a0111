#pragma once

#include <cstdint>
#include <vector>

#include "ersentinel/scenario.hpp"
#include "ersentinel/signing.hpp"
#include "ersentinel/trace.hpp"

namespace ersentinel {

/// Full-mesh node set: servers first, then VMs, one global index space.
/// Every pair of the returned nodes is adjacent. ConfigError on a zero
/// count.
std::vector<NodeId> build_topology(std::uint32_t n_servers, std::uint32_t n_vms);

struct SimSummary {
    std::uint64_t messages_created = 0;
    std::uint64_t encounters = 0;
    std::uint64_t encounter_records = 0;  // trace total, fakes included
    std::uint64_t delivered = 0;
    std::uint64_t dropped_malicious = 0;
    std::uint64_t dropped_expired = 0;
    std::uint64_t in_flight = 0;  // still in custody when the run ends
    std::uint64_t forged_records = 0;
    std::uint64_t forged_entries = 0;
    std::uint64_t forge_unreachable = 0;
};

struct SimResult {
    TraceLog log;
    Keyring ring;
    SimSummary summary;
};

/// Deterministic run: same config, same bytes. Encounters arrive per
/// pair as seeded Poisson processes; messages ride single-copy custody
/// routing down a per-message hash metric; every contact yields a
/// co-signed record pair; colluders forge after the fact.
SimResult run(const SimConfig& cfg);

}  // namespace ersentinel
