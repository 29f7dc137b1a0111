#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ersentinel/counters.hpp"
#include "ersentinel/encounter.hpp"
#include "ersentinel/signing.hpp"

namespace ersentinel {

enum class DropReason : std::uint8_t { malicious, expired };

struct MsgCreated {
    SimTime t = 0;
    std::uint64_t id = 0;
    NodeId src;
    NodeId dst;
    SimTime ttl = 0;
};

struct MsgDelivered {
    SimTime t = 0;
    std::uint64_t id = 0;
    NodeId node;  // destination that took delivery
};

struct MsgDropped {
    SimTime t = 0;
    std::uint64_t id = 0;
    NodeId node;  // holder responsible for the drop
    DropReason reason = DropReason::malicious;
};

struct EncounterEvent {
    SimTime t = 0;
    NodeId a;  // lower index
    NodeId b;
};

using TraceEvent = std::variant<MsgCreated, EncounterEvent, MsgDelivered, MsgDropped>;

enum class TruthRole { honest, blackhole, greyhole, colluder };

std::string to_string(TruthRole role);
TruthRole parse_truth_role(const std::string& text);
inline bool is_malicious(TruthRole role) { return role != TruthRole::honest; }

using Labels = std::map<NodeId, TruthRole>;

/// Everything one simulation run produced. `labels` is ground truth for
/// the evaluation harness and is written to a separate sidecar file,
/// never into the trace itself.
struct TraceLog {
    std::vector<TraceEvent> events;
    std::vector<EncounterRecord> ers;
    Labels labels;
};

/// The slice of a trace the detector is allowed to see: encounter
/// records (ground-truth annotations scrubbed) plus message metadata
/// from msg_created lines. Encounter/delivery/drop events stay on the
/// simulator side of the fence; a detector that read those would know
/// the answers.
struct DetectorView {
    std::vector<EncounterRecord> ers;
    MessageIndex messages;
    SimTime horizon = 0;  // max timestamp seen
};

DetectorView make_detector_view(const TraceLog& log);

// --- line-delimited trace file format ---------------------------------------
//
// One JSON object per line, tagged by "type":
//   {"type":"msg_created","t":..,"id":..,"src":"v12","dst":"s3","ttl":..}
//   {"type":"encounter","t":..,"a":"s0","b":"v7"}
//   {"type":"er","t":..,"local":..,"peer":..,"seq":..,"entries":[...],
//    "sig_local":"<16 hex>","sig_peer":"<16 hex>","forged":bool}
//   {"type":"msg_delivered","t":..,"id":..,"node":..}
//   {"type":"msg_dropped","t":..,"id":..,"node":..,"reason":"malicious"|"expired"}
// Times are integer milliseconds. Entry objects: {"msg":..,"dir":"sent"|
// "received","kind":"generated"|"relayed"}. Lines are sorted by
// (t, type, keys) so equal inputs serialize byte-identically.

void write_trace(const TraceLog& log, std::ostream& out);
TraceLog read_trace(std::istream& in);

/// Builds the detector view straight from a trace stream; malformed
/// lines raise DataError naming the 1-based line number.
DetectorView read_detector_view(std::istream& in);

// Labels sidecar: {"node":"v9","truth":"blackhole"} per line.
void write_labels(const Labels& labels, std::ostream& out);
Labels read_labels(std::istream& in);

// Keyring sidecar (trusted-auditor keys): {"node":"s0","key":"<32 hex>"}.
void write_keys(const Keyring& ring, std::ostream& out);
Keyring read_keys(std::istream& in);

}  // namespace ersentinel
