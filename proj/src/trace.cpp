#include "ersentinel/trace.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <tuple>

#include <json.hpp>

namespace ersentinel {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::string to_string(TruthRole role) {
    switch (role) {
        case TruthRole::honest: return "honest";
        case TruthRole::blackhole: return "blackhole";
        case TruthRole::greyhole: return "greyhole";
        case TruthRole::colluder: return "colluder";
    }
    return "honest";
}

TruthRole parse_truth_role(const std::string& text) {
    if (text == "honest") return TruthRole::honest;
    if (text == "blackhole") return TruthRole::blackhole;
    if (text == "greyhole") return TruthRole::greyhole;
    if (text == "colluder") return TruthRole::colluder;
    throw DataError("unknown truth role '" + text + "'");
}

namespace {

// Sort rank for merged serialization. Within one timestamp: message
// creations, the contact, deliveries/drops it caused, then the records
// both parties signed.
constexpr int kRankMsgCreated = 0;
constexpr int kRankEncounter = 1;
constexpr int kRankDelivered = 2;
constexpr int kRankDropped = 3;
constexpr int kRankEr = 4;

struct LineKey {
    SimTime t;
    int rank;
    std::uint64_t k1;
    std::uint64_t k2;

    friend bool operator<(const LineKey& a, const LineKey& b) {
        return std::tie(a.t, a.rank, a.k1, a.k2) < std::tie(b.t, b.rank, b.k1, b.k2);
    }
};

LineKey event_key(const TraceEvent& ev) {
    return std::visit(
        [](const auto& e) -> LineKey {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, MsgCreated>) {
                return {e.t, kRankMsgCreated, e.id, 0};
            } else if constexpr (std::is_same_v<T, EncounterEvent>) {
                return {e.t, kRankEncounter, e.a.index, e.b.index};
            } else if constexpr (std::is_same_v<T, MsgDelivered>) {
                return {e.t, kRankDelivered, e.id, 0};
            } else {
                return {e.t, kRankDropped, e.id, 0};
            }
        },
        ev);
}

ordered_json entry_to_json(const MessageEntry& e) {
    ordered_json j;
    j["msg"] = e.message_id;
    j["dir"] = e.direction == Direction::sent ? "sent" : "received";
    j["kind"] = e.kind == EntryKind::generated ? "generated" : "relayed";
    return j;
}

MessageEntry entry_from_json(const json& j) {
    MessageEntry e;
    e.message_id = j.at("msg").get<std::uint64_t>();
    const std::string dir = j.at("dir").get<std::string>();
    if (dir == "sent") {
        e.direction = Direction::sent;
    } else if (dir == "received") {
        e.direction = Direction::received;
    } else {
        throw DataError("bad entry direction '" + dir + "'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "generated") {
        e.kind = EntryKind::generated;
    } else if (kind == "relayed") {
        e.kind = EntryKind::relayed;
    } else {
        throw DataError("bad entry kind '" + kind + "'");
    }
    return e;
}

std::string event_line(const TraceEvent& ev) {
    ordered_json j;
    std::visit(
        [&j](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, MsgCreated>) {
                j["type"] = "msg_created";
                j["t"] = e.t;
                j["id"] = e.id;
                j["src"] = to_string(e.src);
                j["dst"] = to_string(e.dst);
                j["ttl"] = e.ttl;
            } else if constexpr (std::is_same_v<T, EncounterEvent>) {
                j["type"] = "encounter";
                j["t"] = e.t;
                j["a"] = to_string(e.a);
                j["b"] = to_string(e.b);
            } else if constexpr (std::is_same_v<T, MsgDelivered>) {
                j["type"] = "msg_delivered";
                j["t"] = e.t;
                j["id"] = e.id;
                j["node"] = to_string(e.node);
            } else {
                j["type"] = "msg_dropped";
                j["t"] = e.t;
                j["id"] = e.id;
                j["node"] = to_string(e.node);
                j["reason"] = e.reason == DropReason::malicious ? "malicious" : "expired";
            }
        },
        ev);
    return j.dump();
}

std::string er_line(const EncounterRecord& er) {
    ordered_json j;
    j["type"] = "er";
    j["t"] = er.timestamp;
    j["local"] = to_string(er.local_node);
    j["peer"] = to_string(er.peer_node);
    j["seq"] = er.local_seq;
    ordered_json entries = ordered_json::array();
    for (const auto& e : er.entries) entries.push_back(entry_to_json(e));
    j["entries"] = std::move(entries);
    j["sig_local"] = to_hex(er.sig_local);
    j["sig_peer"] = to_hex(er.sig_peer);
    j["forged"] = er.ground_truth_forged;
    return j.dump();
}

EncounterRecord er_from_json(const json& j) {
    EncounterRecord er;
    er.timestamp = j.at("t").get<SimTime>();
    er.local_node = parse_node_id(j.at("local").get<std::string>());
    er.peer_node = parse_node_id(j.at("peer").get<std::string>());
    er.local_seq = j.at("seq").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) er.entries.push_back(entry_from_json(e));
    er.sig_local = signature_from_hex(j.at("sig_local").get<std::string>());
    er.sig_peer = signature_from_hex(j.at("sig_peer").get<std::string>());
    er.ground_truth_forged = j.value("forged", false);
    return er;
}

template <typename OnEvent, typename OnEr>
void parse_trace_lines(std::istream& in, OnEvent&& on_event, OnEr&& on_er) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "er") {
                on_er(er_from_json(j));
            } else if (type == "msg_created") {
                MsgCreated e;
                e.t = j.at("t").get<SimTime>();
                e.id = j.at("id").get<std::uint64_t>();
                e.src = parse_node_id(j.at("src").get<std::string>());
                e.dst = parse_node_id(j.at("dst").get<std::string>());
                e.ttl = j.at("ttl").get<SimTime>();
                on_event(TraceEvent{e});
            } else if (type == "encounter") {
                EncounterEvent e;
                e.t = j.at("t").get<SimTime>();
                e.a = parse_node_id(j.at("a").get<std::string>());
                e.b = parse_node_id(j.at("b").get<std::string>());
                on_event(TraceEvent{e});
            } else if (type == "msg_delivered") {
                MsgDelivered e;
                e.t = j.at("t").get<SimTime>();
                e.id = j.at("id").get<std::uint64_t>();
                e.node = parse_node_id(j.at("node").get<std::string>());
                on_event(TraceEvent{e});
            } else if (type == "msg_dropped") {
                MsgDropped e;
                e.t = j.at("t").get<SimTime>();
                e.id = j.at("id").get<std::uint64_t>();
                e.node = parse_node_id(j.at("node").get<std::string>());
                const std::string reason = j.at("reason").get<std::string>();
                if (reason == "malicious") {
                    e.reason = DropReason::malicious;
                } else if (reason == "expired") {
                    e.reason = DropReason::expired;
                } else {
                    throw DataError("bad drop reason '" + reason + "'");
                }
                on_event(TraceEvent{e});
            } else {
                throw DataError("unknown record type '" + type + "'");
            }
        } catch (const DataError& err) {
            throw DataError("trace line " + std::to_string(line_no) + ": " + err.what());
        } catch (const json::exception& err) {
            throw DataError("trace line " + std::to_string(line_no) + ": " + err.what());
        }
    }
}

}  // namespace

void write_trace(const TraceLog& log, std::ostream& out) {
    struct Line {
        LineKey key;
        bool is_er;
        std::size_t idx;
    };
    std::vector<Line> lines;
    lines.reserve(log.events.size() + log.ers.size());
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        lines.push_back({event_key(log.events[i]), false, i});
    }
    for (std::size_t i = 0; i < log.ers.size(); ++i) {
        const auto& er = log.ers[i];
        lines.push_back({{er.timestamp, kRankEr, er.local_node.index, er.local_seq}, true, i});
    }
    std::stable_sort(lines.begin(), lines.end(),
                     [](const Line& a, const Line& b) { return a.key < b.key; });
    for (const auto& l : lines) {
        out << (l.is_er ? er_line(log.ers[l.idx]) : event_line(log.events[l.idx])) << '\n';
    }
}

TraceLog read_trace(std::istream& in) {
    TraceLog log;
    parse_trace_lines(
        in, [&](TraceEvent ev) { log.events.push_back(std::move(ev)); },
        [&](EncounterRecord er) { log.ers.push_back(std::move(er)); });
    return log;
}

DetectorView make_detector_view(const TraceLog& log) {
    DetectorView view;
    view.ers.reserve(log.ers.size());
    for (const auto& er : log.ers) {
        EncounterRecord scrubbed = er;
        scrubbed.ground_truth_forged = false;
        view.horizon = std::max(view.horizon, er.timestamp);
        view.ers.push_back(std::move(scrubbed));
    }
    for (const auto& ev : log.events) {
        if (const auto* created = std::get_if<MsgCreated>(&ev)) {
            view.messages.insert(created->id, created->dst);
            view.horizon = std::max(view.horizon, created->t);
        }
    }
    return view;
}

DetectorView read_detector_view(std::istream& in) {
    DetectorView view;
    parse_trace_lines(
        in,
        [&](TraceEvent ev) {
            if (const auto* created = std::get_if<MsgCreated>(&ev)) {
                view.messages.insert(created->id, created->dst);
                view.horizon = std::max(view.horizon, created->t);
            }
        },
        [&](EncounterRecord er) {
            er.ground_truth_forged = false;
            view.horizon = std::max(view.horizon, er.timestamp);
            view.ers.push_back(std::move(er));
        });
    return view;
}

void write_labels(const Labels& labels, std::ostream& out) {
    for (const auto& [node, role] : labels) {
        ordered_json j;
        j["node"] = to_string(node);
        j["truth"] = to_string(role);
        out << j.dump() << '\n';
    }
}

Labels read_labels(std::istream& in) {
    Labels labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            labels[parse_node_id(j.at("node").get<std::string>())] =
                parse_truth_role(j.at("truth").get<std::string>());
        } catch (const DataError& err) {
            throw DataError("labels line " + std::to_string(line_no) + ": " + err.what());
        } catch (const json::exception& err) {
            throw DataError("labels line " + std::to_string(line_no) + ": " + err.what());
        }
    }
    return labels;
}

void write_keys(const Keyring& ring, std::ostream& out) {
    for (const auto& [node, key] : ring.all()) {
        ordered_json j;
        j["node"] = to_string(node);
        j["key"] = to_hex(key);
        out << j.dump() << '\n';
    }
}

Keyring read_keys(std::istream& in) {
    Keyring ring;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            ring.insert(parse_node_id(j.at("node").get<std::string>()),
                        key_from_hex(j.at("key").get<std::string>()));
        } catch (const DataError& err) {
            throw DataError("keys line " + std::to_string(line_no) + ": " + err.what());
        } catch (const json::exception& err) {
            throw DataError("keys line " + std::to_string(line_no) + ": " + err.what());
        }
    }
    return ring;
}

}  // namespace ersentinel
