#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ersentinel/evaluation.hpp"
#include "ersentinel/types.hpp"

namespace ersentinel {

enum class AttackerKind { blackhole, greyhole, colluder };

std::string to_string(AttackerKind kind);
AttackerKind parse_attacker_kind(const std::string& text);

struct AttackerConfig {
    AttackerKind kind = AttackerKind::blackhole;
    // Greyholes set exactly one of the three drop modes. Colluders use
    // drop_prob (they drop like greyholes, then forge the books).
    std::optional<double> drop_prob;
    std::optional<SimTime> drop_period_t;
    std::optional<std::uint64_t> drop_every_n;
    std::set<NodeId> colluder_partners;
    double target_rr = 0.7;
    double target_sr = 0.5;
};

struct AttackerGroup {
    std::set<NodeId> nodes;
    AttackerConfig config;
};

// Reading of "message packet is generated within the range of 20-30
// seconds": one generator per node (default) or one for the network.
enum class MsgScope { per_node, per_network };

struct SimConfig {
    std::uint32_t n_servers = 5;
    std::uint32_t n_vms = 50;
    SimTime duration = seconds(36000);
    double msg_interval_low = 20.0;   // seconds between generations
    double msg_interval_high = 30.0;
    MsgScope msg_scope = MsgScope::per_node;
    double encounter_rate = 6.0;      // contacts per pair per hour
    std::uint32_t routing_copies = 1; // cap; custody routing carries one
    SimTime ttl = seconds(3600);
    // Colluders shape their fakes per tumbling window of this size,
    // mirroring the detector's filter window.
    SimTime forge_window = seconds(3600);
    std::uint64_t seed = 1;
    std::vector<AttackerGroup> attacker_mix;
};

/// ConfigError on any out-of-range field or inconsistent attacker spec.
void validate(const SimConfig& cfg);

/// Flattened per-node view of attacker_mix. A node in two groups is a
/// ConfigError.
std::map<NodeId, AttackerConfig> attacker_map(const SimConfig& cfg);

Labels ground_truth_labels(const SimConfig& cfg);

struct Scenario {
    SimConfig sim;
    DetectionConfig det;
    std::vector<SweepSpec> sweeps;
    std::string output_dir;  // empty: resolved by the CLI
};

/// Defaults throughout, with the four standard sweep tables.
Scenario default_scenario();

/// INI-style scenario text: [topology], [traffic], [seed], [attackers],
/// [detection], [sweep], [output]. Unknown sections or keys are
/// ConfigErrors; attacker lines repeat, e.g.
///   attacker = v7,v8 blackhole
///   attacker = v9 greyhole drop_prob=0.5
///   attacker = v10 colluder partners=v11 drop_prob=0.9 target_rr=0.7 target_sr=0.5
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

}  // namespace ersentinel
