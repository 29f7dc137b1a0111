#include "ersentinel/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>
#include <tuple>

namespace ersentinel {

ConfusionCounts confusion(const std::vector<NodeVerdict>& verdicts, const Labels& labels) {
    ConfusionCounts c;
    for (const auto& v : verdicts) {
        auto it = labels.find(v.node);
        if (it == labels.end()) {
            throw DataError("no label for node " + to_string(v.node));
        }
        const bool malicious = is_malicious(it->second);
        if (v.blacklisted) {
            malicious ? ++c.tp : ++c.fp;
        } else {
            malicious ? ++c.fn : ++c.tn;
        }
    }
    return c;
}

double precision(const ConfusionCounts& c) {
    if (c.tp + c.fp > 0) return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    return c.fn == 0 ? 1.0 : 0.0;
}

double recall(const ConfusionCounts& c) {
    if (c.tp + c.fn > 0) return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return 1.0;
}

double f_score(double p, double r) {
    if (p + r <= 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

DetectionScore score(const ConfusionCounts& c) {
    const double p = precision(c);
    const double r = recall(c);
    return {p, r, f_score(p, r)};
}

std::string to_string(SweepMetric metric) {
    return metric == SweepMetric::rr ? "rr" : "sr";
}

std::string to_string(SweepMode mode) {
    return mode == SweepMode::individual ? "individual" : "collusion";
}

SweepMetric parse_sweep_metric(const std::string& text) {
    if (text == "rr") return SweepMetric::rr;
    if (text == "sr") return SweepMetric::sr;
    throw ConfigError("unknown sweep metric '" + text + "'");
}

SweepMode parse_sweep_mode(const std::string& text) {
    if (text == "individual") return SweepMode::individual;
    if (text == "collusion") return SweepMode::collusion;
    throw ConfigError("unknown sweep mode '" + text + "'");
}

namespace {

SweepRow evaluate_threshold(const DetectorView& view, const Labels& labels,
                            const SweepSpec& spec, DetectionConfig cfg,
                            const Keyring& ring, double threshold) {
    DetectMode mode;
    mode.collusion_filtering = spec.mode == SweepMode::collusion;
    if (spec.metric == SweepMetric::rr) {
        cfg.rr_threshold = threshold;
        mode.rule = ClassifyRule::rr_only;
    } else {
        cfg.sr_threshold = threshold;
        mode.rule = ClassifyRule::sr_only;
    }
    const auto result = detect(view, ring, cfg, mode);
    std::vector<NodeVerdict> verdicts;
    verdicts.reserve(result.nodes.size());
    for (const auto& [node, v] : result.nodes) verdicts.push_back(v);
    return {threshold, score(confusion(verdicts, labels))};
}

}  // namespace

SweepTable threshold_sweep(const DetectorView& view, const Labels& labels,
                           const SweepSpec& spec, const DetectionConfig& base,
                           const Keyring& ring, unsigned jobs) {
    if (spec.thresholds.empty()) throw ConfigError("sweep needs at least one threshold");

    SweepTable table;
    table.spec = spec;
    table.rows.resize(spec.thresholds.size());

    const unsigned workers =
        std::min<unsigned>(std::max(1u, jobs),
                           static_cast<unsigned>(spec.thresholds.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < spec.thresholds.size(); ++i) {
            table.rows[i] =
                evaluate_threshold(view, labels, spec, base, ring, spec.thresholds[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < spec.thresholds.size();
                     i = next.fetch_add(1)) {
                    table.rows[i] = evaluate_threshold(view, labels, spec, base, ring,
                                                       spec.thresholds[i]);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const SweepRow& a, const SweepRow& b) {
                         return a.threshold < b.threshold;
                     });
    return table;
}

namespace {

std::string format_ratio(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

// Thresholds keep their given precision (0.4375 must not round to 0.438).
std::string format_threshold(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

std::string sweep_csv(const SweepTable& table) {
    std::string out = "threshold,precision,recall,f_score\n";
    for (const auto& row : table.rows) {
        out += format_threshold(row.threshold);
        out += ',';
        out += format_ratio(row.score.precision);
        out += ',';
        out += format_ratio(row.score.recall);
        out += ',';
        out += format_ratio(row.score.f_score);
        out += '\n';
    }
    return out;
}

std::vector<SweepSummaryRow> summarize(const std::vector<SweepTable>& tables) {
    std::vector<SweepSummaryRow> rows;
    for (const SweepMode mode : {SweepMode::individual, SweepMode::collusion}) {
        bool found = false;
        SweepSummaryRow best;
        for (const auto& table : tables) {
            if (table.spec.mode != mode) continue;
            for (const auto& row : table.rows) {
                const SweepSummaryRow candidate{mode, table.spec.metric, row.threshold,
                                                row.score};
                if (!found) {
                    best = candidate;
                    found = true;
                    continue;
                }
                const auto key = [](const SweepSummaryRow& r) {
                    return std::make_tuple(-r.score.f_score, r.threshold,
                                           r.metric == SweepMetric::sr);
                };
                if (key(candidate) < key(best)) best = candidate;
            }
        }
        if (found) rows.push_back(best);
    }
    return rows;
}

std::string summary_csv(const std::vector<SweepSummaryRow>& rows) {
    std::string out = "mode,metric,threshold,precision,recall,f_score\n";
    for (const auto& row : rows) {
        out += to_string(row.mode);
        out += ',';
        out += to_string(row.metric);
        out += ',';
        out += format_threshold(row.threshold);
        out += ',';
        out += format_ratio(row.score.precision);
        out += ',';
        out += format_ratio(row.score.recall);
        out += ',';
        out += format_ratio(row.score.f_score);
        out += '\n';
    }
    return out;
}

}  // namespace ersentinel
