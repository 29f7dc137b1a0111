#include "ersentinel/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace ersentinel {

std::string to_string(AttackerKind kind) {
    switch (kind) {
        case AttackerKind::blackhole: return "blackhole";
        case AttackerKind::greyhole: return "greyhole";
        case AttackerKind::colluder: return "colluder";
    }
    return "blackhole";
}

AttackerKind parse_attacker_kind(const std::string& text) {
    if (text == "blackhole") return AttackerKind::blackhole;
    if (text == "greyhole") return AttackerKind::greyhole;
    if (text == "colluder") return AttackerKind::colluder;
    throw ConfigError("unknown attacker kind '" + text + "'");
}

namespace {

bool node_in_topology(const NodeId& node, const SimConfig& cfg) {
    const std::uint32_t total = cfg.n_servers + cfg.n_vms;
    if (node.role == Role::server) return node.index < cfg.n_servers;
    return node.index >= cfg.n_servers && node.index < total;
}

void validate_attacker(const NodeId& node, const AttackerConfig& a, const SimConfig& cfg) {
    const std::string who = "attacker " + to_string(node) + ": ";
    const int drop_modes = (a.drop_prob ? 1 : 0) + (a.drop_period_t ? 1 : 0) +
                           (a.drop_every_n ? 1 : 0);
    if (a.drop_prob && (*a.drop_prob < 0.0 || *a.drop_prob > 1.0)) {
        throw ConfigError(who + "drop_prob must be in [0, 1]");
    }
    if (a.drop_period_t && *a.drop_period_t <= 0) {
        throw ConfigError(who + "drop_period_t must be positive");
    }
    if (a.drop_every_n && *a.drop_every_n < 1) {
        throw ConfigError(who + "drop_every_n must be at least 1");
    }
    switch (a.kind) {
        case AttackerKind::blackhole:
            if (drop_modes != 0) {
                throw ConfigError(who + "blackhole takes no drop parameters");
            }
            if (!a.colluder_partners.empty()) {
                throw ConfigError(who + "blackhole takes no partners");
            }
            break;
        case AttackerKind::greyhole:
            if (drop_modes != 1) {
                throw ConfigError(who +
                                  "greyhole needs exactly one of drop_prob, "
                                  "drop_period_t, drop_every_n");
            }
            if (!a.colluder_partners.empty()) {
                throw ConfigError(who + "greyhole takes no partners");
            }
            break;
        case AttackerKind::colluder: {
            if (!a.drop_prob || a.drop_period_t || a.drop_every_n) {
                throw ConfigError(who + "colluder needs drop_prob and no other drop mode");
            }
            if (a.colluder_partners.empty()) {
                throw ConfigError(who + "colluder needs at least one partner");
            }
            if (!(a.target_rr > 0.0 && a.target_rr <= 1.0) ||
                !(a.target_sr > 0.0 && a.target_sr <= 1.0)) {
                throw ConfigError(who + "targets must be in (0, 1]");
            }
            for (const auto& p : a.colluder_partners) {
                if (p == node) throw ConfigError(who + "cannot partner with itself");
                if (!node_in_topology(p, cfg)) {
                    throw ConfigError(who + "partner " + to_string(p) + " not in topology");
                }
            }
            break;
        }
    }
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (cfg.n_servers == 0) throw ConfigError("n_servers must be positive");
    if (cfg.n_vms == 0) throw ConfigError("n_vms must be positive");
    if (cfg.duration <= 0) throw ConfigError("duration must be positive");
    if (!(cfg.msg_interval_low > 0.0) || cfg.msg_interval_high < cfg.msg_interval_low) {
        throw ConfigError("msg_interval must satisfy 0 < low <= high");
    }
    if (!(cfg.encounter_rate > 0.0)) throw ConfigError("encounter_rate must be positive");
    if (cfg.routing_copies < 1) throw ConfigError("routing_copies must be at least 1");
    if (cfg.ttl <= 0) throw ConfigError("ttl must be positive");
    if (cfg.forge_window <= 0) throw ConfigError("forge_window must be positive");

    const auto attackers = attacker_map(cfg);
    for (const auto& [node, a] : attackers) {
        if (!node_in_topology(node, cfg)) {
            throw ConfigError("attacker " + to_string(node) + " not in topology");
        }
        validate_attacker(node, a, cfg);
        for (const auto& p : a.colluder_partners) {
            auto it = attackers.find(p);
            if (it == attackers.end() || it->second.kind != AttackerKind::colluder) {
                throw ConfigError("attacker " + to_string(node) + ": partner " +
                                  to_string(p) + " must itself be a colluder");
            }
        }
    }
}

std::map<NodeId, AttackerConfig> attacker_map(const SimConfig& cfg) {
    std::map<NodeId, AttackerConfig> out;
    for (const auto& group : cfg.attacker_mix) {
        for (const auto& node : group.nodes) {
            if (!out.emplace(node, group.config).second) {
                throw ConfigError("node " + to_string(node) +
                                  " appears in more than one attacker group");
            }
        }
    }
    return out;
}

Labels ground_truth_labels(const SimConfig& cfg) {
    Labels labels;
    for (std::uint32_t i = 0; i < cfg.n_servers; ++i) {
        labels[{i, Role::server}] = TruthRole::honest;
    }
    for (std::uint32_t i = cfg.n_servers; i < cfg.n_servers + cfg.n_vms; ++i) {
        labels[{i, Role::vm}] = TruthRole::honest;
    }
    for (const auto& [node, a] : attacker_map(cfg)) {
        switch (a.kind) {
            case AttackerKind::blackhole: labels[node] = TruthRole::blackhole; break;
            case AttackerKind::greyhole: labels[node] = TruthRole::greyhole; break;
            case AttackerKind::colluder: labels[node] = TruthRole::colluder; break;
        }
    }
    return labels;
}

Scenario default_scenario() {
    Scenario sc;
    sc.sweeps = {
        {SweepMetric::rr, SweepMode::individual, {0.4375, 0.5375, 0.5875}},
        {SweepMetric::sr, SweepMode::individual, {0.56, 0.63, 0.69}},
        {SweepMetric::rr, SweepMode::collusion, {0.47, 0.52, 0.66}},
        {SweepMetric::sr, SweepMode::collusion, {0.59, 0.65, 0.71}},
    };
    return sc;
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        const auto piece = trim(s.substr(start, comma - start));
        if (!piece.empty()) out.push_back(piece);
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": not a non-negative integer: '" + value + "'");
    }
    return x;
}

std::uint32_t parse_u32(const std::string& key, const std::string& value) {
    const auto x = parse_u64(key, value);
    if (x > 0xffffffffULL) throw ConfigError(key + ": out of range: '" + value + "'");
    return static_cast<std::uint32_t>(x);
}

NodeId parse_node(const std::string& key, const std::string& text) {
    try {
        return parse_node_id(text);
    } catch (const DataError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::set<NodeId> parse_node_set(const std::string& key, const std::string& value) {
    std::set<NodeId> out;
    for (const auto& piece : split_commas(value)) out.insert(parse_node(key, piece));
    if (out.empty()) throw ConfigError(key + ": empty node list");
    return out;
}

std::vector<double> parse_threshold_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& token : split_ws(value)) out.push_back(parse_double(key, token));
    if (out.empty()) throw ConfigError(key + ": empty threshold list");
    return out;
}

AttackerGroup parse_attacker_line(const std::string& value) {
    const auto tokens = split_ws(value);
    if (tokens.size() < 2) {
        throw ConfigError("attacker: expected '<nodes> <kind> [key=value...]', got '" +
                          value + "'");
    }
    AttackerGroup group;
    group.nodes = parse_node_set("attacker", tokens[0]);
    group.config.kind = parse_attacker_kind(tokens[1]);
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos) {
            throw ConfigError("attacker: expected key=value, got '" + tokens[i] + "'");
        }
        const auto key = tokens[i].substr(0, eq);
        const auto val = tokens[i].substr(eq + 1);
        if (key == "drop_prob") {
            group.config.drop_prob = parse_double(key, val);
        } else if (key == "drop_period_t") {
            group.config.drop_period_t = seconds(parse_double(key, val));
        } else if (key == "drop_every_n") {
            group.config.drop_every_n = parse_u64(key, val);
        } else if (key == "partners") {
            group.config.colluder_partners = parse_node_set(key, val);
        } else if (key == "target_rr") {
            group.config.target_rr = parse_double(key, val);
        } else if (key == "target_sr") {
            group.config.target_sr = parse_double(key, val);
        } else {
            throw ConfigError("attacker: unknown parameter '" + key + "'");
        }
    }
    return group;
}

void set_sweep(Scenario& sc, SweepMetric metric, SweepMode mode, std::vector<double> list) {
    for (auto& spec : sc.sweeps) {
        if (spec.metric == metric && spec.mode == mode) {
            spec.thresholds = std::move(list);
            return;
        }
    }
    sc.sweeps.push_back({metric, mode, std::move(list)});
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
    Scenario sc = default_scenario();
    std::string line;
    std::string section;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& what) -> void {
        throw ConfigError("scenario line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known = {
                "topology", "traffic", "seed", "attackers",
                "detection", "sweep", "output"};
            if (!known.count(section)) fail("unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail("expected key = value");

        try {
            if (section == "topology") {
                if (key == "n_servers") sc.sim.n_servers = parse_u32(key, value);
                else if (key == "n_vms") sc.sim.n_vms = parse_u32(key, value);
                else fail("unknown key '" + key + "'");
            } else if (section == "traffic") {
                if (key == "duration") sc.sim.duration = seconds(parse_double(key, value));
                else if (key == "msg_interval") {
                    const auto parts = split_ws(value);
                    if (parts.size() != 2) fail("msg_interval needs two numbers");
                    sc.sim.msg_interval_low = parse_double(key, parts[0]);
                    sc.sim.msg_interval_high = parse_double(key, parts[1]);
                } else if (key == "msg_scope") {
                    if (value == "per_node") sc.sim.msg_scope = MsgScope::per_node;
                    else if (value == "per_network") sc.sim.msg_scope = MsgScope::per_network;
                    else fail("msg_scope must be per_node or per_network");
                } else if (key == "encounter_rate") {
                    sc.sim.encounter_rate = parse_double(key, value);
                } else if (key == "routing_copies") {
                    sc.sim.routing_copies = parse_u32(key, value);
                } else if (key == "ttl") {
                    sc.sim.ttl = seconds(parse_double(key, value));
                } else if (key == "forge_window") {
                    sc.sim.forge_window = seconds(parse_double(key, value));
                } else {
                    fail("unknown key '" + key + "'");
                }
            } else if (section == "seed") {
                if (key == "seed") sc.sim.seed = parse_u64(key, value);
                else fail("unknown key '" + key + "'");
            } else if (section == "attackers") {
                if (key == "attacker") sc.sim.attacker_mix.push_back(parse_attacker_line(value));
                else fail("unknown key '" + key + "'");
            } else if (section == "detection") {
                if (key == "rr_threshold") sc.det.rr_threshold = parse_double(key, value);
                else if (key == "sr_threshold") sc.det.sr_threshold = parse_double(key, value);
                else if (key == "fxs_threshold") {
                    if (value == "auto") sc.det.fxs_threshold.reset();
                    else sc.det.fxs_threshold = parse_double(key, value);
                } else if (key == "window") {
                    sc.det.window = seconds(parse_double(key, value));
                } else if (key == "reputation_step") {
                    sc.det.reputation_step = parse_double(key, value);
                } else if (key == "blacklist_reputation") {
                    sc.det.blacklist_reputation = parse_double(key, value);
                } else {
                    fail("unknown key '" + key + "'");
                }
            } else if (section == "sweep") {
                if (key == "rr_individual")
                    set_sweep(sc, SweepMetric::rr, SweepMode::individual,
                              parse_threshold_list(key, value));
                else if (key == "sr_individual")
                    set_sweep(sc, SweepMetric::sr, SweepMode::individual,
                              parse_threshold_list(key, value));
                else if (key == "rr_collusion")
                    set_sweep(sc, SweepMetric::rr, SweepMode::collusion,
                              parse_threshold_list(key, value));
                else if (key == "sr_collusion")
                    set_sweep(sc, SweepMetric::sr, SweepMode::collusion,
                              parse_threshold_list(key, value));
                else
                    fail("unknown key '" + key + "'");
            } else if (section == "output") {
                if (key == "dir") sc.output_dir = value;
                else fail("unknown key '" + key + "'");
            } else {
                fail("key outside any section");
            }
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.rfind("scenario line", 0) == 0) throw;
            fail(what);
        }
    }

    validate(sc.sim);
    validate(sc.det);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    return parse_scenario(in);
}

}  // namespace ersentinel
