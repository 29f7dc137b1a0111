#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ersentinel/detector.hpp"

namespace ersentinel {

/// Node-level confusion tallies: positive = blacklisted, malicious =
/// ground-truth blackhole/greyhole/colluder.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

struct DetectionScore {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

/// Exact confusion counts for a detection outcome. Every verdict node
/// must be labeled; a missing label is a hard error.
ConfusionCounts confusion(const std::vector<NodeVerdict>& verdicts, const Labels& labels);

/// P = TP / (TP + FP). Nothing flagged: vacuously 1.0 when there was
/// also nothing to find, else 0.0.
double precision(const ConfusionCounts& c);

/// R = TP / (TP + FN). No malicious nodes to find: 1.0.
double recall(const ConfusionCounts& c);

/// F = 2PR / (P + R), 0 when both are 0.
double f_score(double p, double r);

DetectionScore score(const ConfusionCounts& c);

// ---------------------------------------------------------------------------
// Threshold sweeps

enum class SweepMetric { rr, sr };

/// individual: plain threshold classification, no collusion filtering;
/// collusion: FXS filtering plus forger/colluder blacklisting first.
enum class SweepMode { individual, collusion };

std::string to_string(SweepMetric metric);
std::string to_string(SweepMode mode);
SweepMetric parse_sweep_metric(const std::string& text);
SweepMode parse_sweep_mode(const std::string& text);

struct SweepSpec {
    SweepMetric metric = SweepMetric::rr;
    SweepMode mode = SweepMode::individual;
    std::vector<double> thresholds;
};

struct SweepRow {
    double threshold = 0.0;
    DetectionScore score;
};

struct SweepTable {
    SweepSpec spec;
    std::vector<SweepRow> rows;  // ascending by threshold
};

/// One detect + confusion + score run per threshold, everything else in
/// `base` held fixed. Rows are independent; `jobs` > 1 evaluates them in
/// parallel without changing the output.
SweepTable threshold_sweep(const DetectorView& view, const Labels& labels,
                           const SweepSpec& spec, const DetectionConfig& base,
                           const Keyring& ring = {}, unsigned jobs = 1);

/// CSV with header "threshold,precision,recall,f_score", 3-decimal fixed.
std::string sweep_csv(const SweepTable& table);

struct SweepSummaryRow {
    SweepMode mode = SweepMode::individual;
    SweepMetric metric = SweepMetric::rr;
    double threshold = 0.0;
    DetectionScore score;
};

/// Best row per mode across its tables: max F-score, ties broken by
/// lower threshold, then rr before sr.
std::vector<SweepSummaryRow> summarize(const std::vector<SweepTable>& tables);

std::string summary_csv(const std::vector<SweepSummaryRow>& rows);

}  // namespace ersentinel
