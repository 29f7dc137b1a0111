#include "ersentinel/detector.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace ersentinel {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::benign: return "benign";
        case Classification::individual_attacker: return "individual_attacker";
        case Classification::colluder: return "colluder";
        case Classification::er_forger: return "er_forger";
    }
    return "benign";
}

Classification parse_classification(const std::string& text) {
    if (text == "benign") return Classification::benign;
    if (text == "individual_attacker") return Classification::individual_attacker;
    if (text == "colluder") return Classification::colluder;
    if (text == "er_forger") return Classification::er_forger;
    throw DataError("unknown classification '" + text + "'");
}

void validate(const DetectionConfig& cfg) {
    if (!(cfg.rr_threshold > 0.0 && cfg.rr_threshold <= 1.0)) {
        throw ConfigError("rr_threshold must be in (0, 1]");
    }
    if (!(cfg.sr_threshold > 0.0 && cfg.sr_threshold <= 1.0)) {
        throw ConfigError("sr_threshold must be in (0, 1]");
    }
    if (cfg.fxs_threshold && !(*cfg.fxs_threshold > 0.0)) {
        throw ConfigError("fxs_threshold must be positive");
    }
    if (cfg.window <= 0) throw ConfigError("window must be positive");
    if (!(cfg.reputation_step > 0.0)) throw ConfigError("reputation_step must be positive");
    if (cfg.blacklist_reputation < 0.0 || cfg.blacklist_reputation > 1.0) {
        throw ConfigError("blacklist_reputation must be in [0, 1]");
    }
}

Classification classify_individual(double rr, double sr, const DetectionConfig& cfg,
                                   ClassifyRule rule) {
    const bool rr_bad = rr < cfg.rr_threshold;
    const bool sr_bad = sr > cfg.sr_threshold;
    bool bad = false;
    switch (rule) {
        case ClassifyRule::both: bad = rr_bad || sr_bad; break;
        case ClassifyRule::rr_only: bad = rr_bad; break;
        case ClassifyRule::sr_only: bad = sr_bad; break;
    }
    return bad ? Classification::individual_attacker : Classification::benign;
}

FilterResult filter_colluders(const std::vector<EncounterRecord>& history,
                              const DetectionConfig& cfg) {
    FilterResult result;
    result.threshold_used = cfg.fxs_threshold.value_or(5.0);
    if (history.empty()) return result;

    const NodeId node = history.front().local_node;
    const auto stats = pair_stats(history, node);

    std::map<NodeId, double> scores;
    for (const auto& [peer, ps] : stats) scores[peer] = fxs(ps);

    if (!cfg.fxs_threshold) {
        double sum = 0.0;
        for (const auto& [peer, x] : scores) sum += x;
        const double mean = sum / static_cast<double>(scores.size());
        double var = 0.0;
        for (const auto& [peer, x] : scores) var += (x - mean) * (x - mean);
        var /= static_cast<double>(scores.size());
        result.threshold_used = std::max(5.0, mean + 3.0 * std::sqrt(var));
    }

    for (const auto& [peer, x] : scores) {
        if (x > result.threshold_used) result.suspicious_peers.insert(peer);
    }

    if (result.suspicious_peers.empty()) {
        result.filtered = history;
        return result;
    }
    result.filtered.reserve(history.size());
    for (const auto& er : history) {
        if (!result.suspicious_peers.count(er.peer_node)) result.filtered.push_back(er);
    }
    return result;
}

namespace {

bool implicates(ViolationKind kind) {
    return kind != ViolationKind::unverifiable;
}

struct Evidence {
    SimTime t = 0;
    Classification classification = Classification::benign;
};

Classification more_severe(Classification a, Classification b) {
    return severity(a) >= severity(b) ? a : b;
}

}  // namespace

DetectionResult detect(const DetectorView& view, const Keyring& ring,
                       const DetectionConfig& cfg, const DetectMode& mode) {
    validate(cfg);

    DetectionResult result;

    std::map<NodeId, std::vector<EncounterRecord>> by_node;
    for (const auto& er : view.ers) by_node[er.local_node].push_back(er);

    std::map<NodeId, std::vector<Evidence>> evidence;
    auto implicate = [&](const NodeId& node, Classification c, SimTime t) {
        evidence[node].push_back({t, c});
    };

    for (const auto& [node, history] : by_node) {
        auto order = audit_sequences(history);
        std::vector<AuditViolation> sigs;
        if (!ring.empty()) sigs = audit_signatures(history, ring);
        for (const auto& v : order) {
            if (implicates(v.kind)) implicate(v.node, Classification::er_forger, v.timestamp);
        }
        for (const auto& v : sigs) {
            if (implicates(v.kind)) implicate(v.node, Classification::er_forger, v.timestamp);
        }
        result.violations.insert(result.violations.end(), order.begin(), order.end());
        result.violations.insert(result.violations.end(), sigs.begin(), sigs.end());
    }

    std::set<std::pair<NodeId, NodeId>> contact_pairs;
    for (const auto& [node, history] : by_node) {
        for (const auto& er : history) {
            contact_pairs.insert(std::minmax(node, er.peer_node));
        }
    }
    static const std::vector<EncounterRecord> kNoRecords;
    for (const auto& [a, b] : contact_pairs) {
        auto it_a = by_node.find(a);
        auto it_b = by_node.find(b);
        const auto& history_a = it_a == by_node.end() ? kNoRecords : it_a->second;
        const auto& history_b = it_b == by_node.end() ? kNoRecords : it_b->second;
        auto mismatches = cross_check_neighbors(history_a, history_b, a, b);
        for (const auto& v : mismatches) {
            if (implicates(v.kind)) implicate(v.node, Classification::er_forger, v.timestamp);
        }
        result.violations.insert(result.violations.end(), mismatches.begin(), mismatches.end());
    }

    std::map<NodeId, std::vector<EncounterRecord>> usable;
    if (mode.collusion_filtering) {
        for (auto& [node, history] : by_node) {
            auto fr = filter_colluders(history, cfg);
            if (!fr.suspicious_peers.empty()) {
                SimTime first = history.front().timestamp;
                for (const auto& er : history) {
                    if (fr.suspicious_peers.count(er.peer_node)) {
                        first = er.timestamp;
                        break;
                    }
                }
                implicate(node, Classification::er_forger, first);
                for (const auto& peer : fr.suspicious_peers) {
                    implicate(peer, Classification::colluder, first);
                }
                result.suspicious_peers[node] = fr.suspicious_peers;
            }
            usable[node] = std::move(fr.filtered);
        }
    } else {
        usable = std::move(by_node);
    }

    for (const auto& [node, ev] : evidence) {
        if (!usable.count(node)) usable[node];  // implicated peers still get rows
    }

    const std::uint64_t n_windows =
        view.horizon > 0
            ? static_cast<std::uint64_t>((view.horizon + cfg.window - 1) / cfg.window)
            : 1;

    for (const auto& [node, history] : usable) {
        std::map<std::uint64_t, std::vector<EncounterRecord>> windows;
        for (const auto& er : history) {
            windows[static_cast<std::uint64_t>(er.timestamp / cfg.window)].push_back(er);
        }

        auto ev = evidence.find(node) == evidence.end() ? std::vector<Evidence>{}
                                                        : evidence[node];
        std::sort(ev.begin(), ev.end(),
                  [](const Evidence& x, const Evidence& y) { return x.t < y.t; });
        std::size_t next_ev = 0;

        Classification cumulative = Classification::benign;
        double reputation = 1.0;
        bool blacklisted = false;

        for (std::uint64_t w = 0; w < n_windows; ++w) {
            const SimTime window_end = static_cast<SimTime>(w + 1) * cfg.window;
            bool evidence_here = false;
            while (next_ev < ev.size() &&
                   (ev[next_ev].t < window_end || w + 1 == n_windows)) {
                cumulative = more_severe(cumulative, ev[next_ev].classification);
                evidence_here = true;
                ++next_ev;
            }

            BehaviorCounters counters;
            auto it = windows.find(w);
            if (it != windows.end()) {
                counters = compute_counters(it->second, node, view.messages);
            }
            const double rr = relayed_ratio(counters);
            const double sr = self_forwarding_ratio(counters);
            const Classification wc = classify_individual(rr, sr, cfg, mode.rule);
            cumulative = more_severe(cumulative, wc);

            const bool flagged = evidence_here || wc != Classification::benign;
            reputation += flagged ? -cfg.reputation_step : cfg.reputation_step / 2.0;
            reputation = std::clamp(reputation, 0.0, 1.0);

            if (cumulative != Classification::benign ||
                reputation < cfg.blacklist_reputation) {
                blacklisted = true;
            }

            result.rows.push_back({node, w, rr, sr, reputation, cumulative, blacklisted});
        }

        result.nodes[node] = {node, cumulative, reputation, blacklisted};
        if (blacklisted) result.blacklist.insert(node);
    }

    return result;
}

void write_verdicts(const DetectionResult& result, std::ostream& out) {
    for (const auto& row : result.rows) {
        nlohmann::ordered_json j;
        j["node"] = to_string(row.node);
        j["classification"] = to_string(row.classification);
        j["rr"] = row.rr;
        j["sr"] = row.sr;
        j["reputation"] = row.reputation;
        j["blacklisted"] = row.blacklisted;
        j["window_id"] = row.window_id;
        out << j.dump() << '\n';
    }
}

std::vector<NodeVerdict> fold_verdicts(const std::vector<Verdict>& rows) {
    std::map<NodeId, NodeVerdict> last;
    std::map<NodeId, std::uint64_t> last_window;
    for (const auto& row : rows) {
        auto it = last_window.find(row.node);
        if (it != last_window.end() && it->second > row.window_id) continue;
        last_window[row.node] = row.window_id;
        last[row.node] = {row.node, row.classification, row.reputation, row.blacklisted};
    }
    std::vector<NodeVerdict> out;
    out.reserve(last.size());
    for (const auto& [node, v] : last) out.push_back(v);
    return out;
}

std::vector<Verdict> read_verdicts(std::istream& in) {
    std::vector<Verdict> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Verdict v;
            v.node = parse_node_id(j.at("node").get<std::string>());
            v.classification = parse_classification(j.at("classification").get<std::string>());
            v.rr = j.at("rr").get<double>();
            v.sr = j.at("sr").get<double>();
            v.reputation = j.at("reputation").get<double>();
            v.blacklisted = j.at("blacklisted").get<bool>();
            v.window_id = j.at("window_id").get<std::uint64_t>();
            rows.push_back(v);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("verdicts line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace ersentinel
