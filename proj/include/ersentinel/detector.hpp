#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ersentinel/audit.hpp"
#include "ersentinel/counters.hpp"
#include "ersentinel/signing.hpp"
#include "ersentinel/trace.hpp"

namespace ersentinel {

enum class Classification {
    benign,
    individual_attacker,
    colluder,
    er_forger,
};

std::string to_string(Classification c);
Classification parse_classification(const std::string& text);

// Severity order used when folding per-window results into a final call.
inline int severity(Classification c) { return static_cast<int>(c); }

// Which metric drives the threshold rule. `both` is the full detector;
// the single-metric variants exist for threshold sweeps.
enum class ClassifyRule {
    both,
    rr_only,
    sr_only,
};

struct DetectionConfig {
    double rr_threshold = 0.5375;
    double sr_threshold = 0.63;
    // Unset picks a data-driven cutoff per node: max(5.0, mean + 3 sigma)
    // over that node's pairwise FXS values.
    std::optional<double> fxs_threshold;
    SimTime window = seconds(3600);
    double reputation_step = 0.1;  // down per flagged window; up is half
    double blacklist_reputation = 0.5;
};

/// ConfigError on out-of-range fields: thresholds in (0, 1], window > 0,
/// reputation_step > 0, blacklist_reputation in [0, 1], fxs_threshold
/// (when set) > 0.
void validate(const DetectionConfig& cfg);

struct DetectMode {
    ClassifyRule rule = ClassifyRule::both;
    bool collusion_filtering = true;
};

// Threshold rule on one window's metrics. Strict comparisons: a node
// sitting exactly on a threshold stays benign.
Classification classify_individual(double rr, double sr, const DetectionConfig& cfg,
                                   ClassifyRule rule = ClassifyRule::both);

struct FilterResult {
    std::vector<EncounterRecord> filtered;
    std::set<NodeId> suspicious_peers;
    double threshold_used = 0.0;
};

/// Drops every ER naming a peer whose pairwise FXS exceeds the cutoff.
/// Suspicion is computed over the node's full history so that sparse
/// windows do not produce spurious outliers.
FilterResult filter_colluders(const std::vector<EncounterRecord>& history,
                              const DetectionConfig& cfg);

struct Verdict {
    NodeId node;
    std::uint64_t window_id = 0;
    double rr = 1.0;
    double sr = 0.0;
    double reputation = 1.0;
    Classification classification = Classification::benign;  // most severe so far
    bool blacklisted = false;
};

struct NodeVerdict {
    NodeId node;
    Classification classification = Classification::benign;
    double reputation = 1.0;
    bool blacklisted = false;
};

struct DetectionResult {
    std::vector<Verdict> rows;            // sorted by (node, window_id)
    std::map<NodeId, NodeVerdict> nodes;  // final fold per node
    std::set<NodeId> blacklist;
    std::vector<AuditViolation> violations;
    std::map<NodeId, std::set<NodeId>> suspicious_peers;
};

/// The full pipeline: order/signature/cross-check audits over each
/// node's history, FXS collusion filtering, then windowed RR/SR
/// classification of the filtered records. Audit or FXS evidence marks a
/// node er_forger (colluder for the named partners) from the window the
/// evidence lands in; any non-benign window puts the node on the
/// blacklist for good. An empty keyring skips the signature audit; with
/// keys present, a record by an unknown signer is reported as
/// unverifiable, which is weaker than invalid and implicates nobody.
DetectionResult detect(const DetectorView& view, const Keyring& ring,
                       const DetectionConfig& cfg, const DetectMode& mode = {});

void write_verdicts(const DetectionResult& result, std::ostream& out);
std::vector<Verdict> read_verdicts(std::istream& in);

/// Final per-node state out of a verdict row stream: the last window row
/// already carries the cumulative classification and sticky blacklist.
std::vector<NodeVerdict> fold_verdicts(const std::vector<Verdict>& rows);

}  // namespace ersentinel
