#include "ersentinel/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <tuple>

#include "ersentinel/forgery.hpp"
#include "ersentinel/rng.hpp"

namespace ersentinel {

std::vector<NodeId> build_topology(std::uint32_t n_servers, std::uint32_t n_vms) {
    if (n_servers == 0) throw ConfigError("n_servers must be positive");
    if (n_vms == 0) throw ConfigError("n_vms must be positive");
    std::vector<NodeId> nodes;
    nodes.reserve(std::size_t{n_servers} + n_vms);
    for (std::uint32_t i = 0; i < n_servers; ++i) nodes.push_back({i, Role::server});
    for (std::uint32_t i = 0; i < n_vms; ++i) nodes.push_back({n_servers + i, Role::vm});
    return nodes;
}

namespace {

// Stream domains for derived seeds, so pair encounters, message
// generation, drop decisions and the routing metric never share draws.
constexpr std::uint64_t kStreamEncounters = 1;
constexpr std::uint64_t kStreamMessages = 2;
constexpr std::uint64_t kStreamDrops = 3;
constexpr std::uint64_t kStreamMetric = 4;

struct AttackerState {
    AttackerConfig cfg;
    Rng rng;
    std::uint64_t relayed_seen = 0;

    AttackerState(const AttackerConfig& c, std::uint64_t seed) : cfg(c), rng(seed) {}

    // One verdict per relayed message, at the moment custody is offered.
    bool decide_forward(SimTime received_at) {
        switch (cfg.kind) {
            case AttackerKind::blackhole:
                return false;
            case AttackerKind::greyhole:
                if (cfg.drop_prob) return !rng.chance(*cfg.drop_prob);
                if (cfg.drop_every_n) return ++relayed_seen % *cfg.drop_every_n != 0;
                // drops everything arriving in the first half of each cycle
                return received_at % *cfg.drop_period_t >= *cfg.drop_period_t / 2;
            case AttackerKind::colluder:
                return !rng.chance(*cfg.drop_prob);
        }
        return true;
    }
};

struct Custody {
    Message msg;
    bool as_relay = false;
};

struct Pending {
    SimTime t;
    int kind;  // 0 = message creation, 1 = encounter
    std::uint32_t a;
    std::uint32_t b;
    std::uint64_t id = 0;
};

}  // namespace

SimResult run(const SimConfig& cfg) {
    validate(cfg);

    SimResult result;
    TraceLog& log = result.log;
    SimSummary& sum = result.summary;
    const auto nodes = build_topology(cfg.n_servers, cfg.n_vms);
    const auto n = static_cast<std::uint32_t>(nodes.size());
    result.ring = Keyring::derive(cfg.seed, nodes);

    std::vector<Pending> pending;

    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            Rng rng(mix_seed({cfg.seed, kStreamEncounters, i, j}));
            const double mean_ms = 3600.0 * 1000.0 / cfg.encounter_rate;
            SimTime t = 0;
            for (;;) {
                t += std::max<SimTime>(1, std::llround(rng.exponential(mean_ms)));
                if (t >= cfg.duration) break;
                pending.push_back({t, 1, i, j});
            }
        }
    }

    {
        struct Draft {
            SimTime t;
            std::uint32_t src;
            std::uint32_t dst;
        };
        std::vector<Draft> drafts;
        auto generate = [&](Rng& rng, std::uint32_t fixed_src, bool draw_src) {
            SimTime t = 0;
            for (;;) {
                const double gap = rng.uniform(cfg.msg_interval_low, cfg.msg_interval_high);
                t += std::max<SimTime>(1, std::llround(gap * 1000.0));
                if (t >= cfg.duration) break;
                const auto src = draw_src ? static_cast<std::uint32_t>(rng.below(n)) : fixed_src;
                const auto r = static_cast<std::uint32_t>(rng.below(n - 1));
                drafts.push_back({t, src, r < src ? r : r + 1});
            }
        };
        if (cfg.msg_scope == MsgScope::per_node) {
            for (std::uint32_t i = 0; i < n; ++i) {
                Rng rng(mix_seed({cfg.seed, kStreamMessages, i}));
                generate(rng, i, false);
            }
        } else {
            Rng rng(mix_seed({cfg.seed, kStreamMessages, 0xffffffffULL}));
            generate(rng, 0, true);
        }
        std::sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) {
            return std::tie(a.t, a.src) < std::tie(b.t, b.src);
        });
        std::uint64_t next_id = 1;
        for (const auto& d : drafts) pending.push_back({d.t, 0, d.src, d.dst, next_id++});
    }

    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
        return std::tie(a.t, a.kind, a.a, a.b) < std::tie(b.t, b.kind, b.a, b.b);
    });

    const auto attackers = attacker_map(cfg);
    std::uint64_t n_colluders = 0;
    for (const auto& [node, a] : attackers) {
        if (a.kind == AttackerKind::colluder) ++n_colluders;
    }
    std::vector<std::unique_ptr<AttackerState>> astate(n);
    std::vector<std::uint64_t> stride(n, 1);
    for (const auto& [node, a] : attackers) {
        astate[node.index] = std::make_unique<AttackerState>(
            a, mix_seed({cfg.seed, kStreamDrops, node.index}));
        // Colluders skip sequence numbers so their fakes (and partners'
        // mirrors) fit between authentic records without a seq clash.
        if (a.kind == AttackerKind::colluder) stride[node.index] = n_colluders + 2;
    }

    std::vector<std::vector<Custody>> custody(n);
    std::vector<std::vector<EncounterRecord>> histories(n);
    std::vector<std::uint64_t> seq(n, 0);
    std::map<NodeId, std::vector<std::pair<SimTime, std::uint64_t>>> drop_pools;
    MessageIndex index;

    auto co_sign = [&](EncounterRecord& er) {
        er.sig_local = sign(*result.ring.find(er.local_node), er);
        er.sig_peer = sign(*result.ring.find(er.peer_node), er);
    };
    // Ranked per message, not per destination, so no single node becomes
    // the funnel for all of one destination's traffic (which would give
    // honest pairs the same lopsided per-encounter volume the collusion
    // filter hunts for).
    auto metric = [&](std::uint32_t holder, std::uint64_t msg_id) {
        return mix_seed({cfg.seed, kStreamMetric, holder, msg_id});
    };
    auto purge = [&](std::uint32_t i, SimTime now) {
        auto& held = custody[i];
        std::vector<Custody> kept;
        kept.reserve(held.size());
        for (auto& c : held) {
            if (now >= c.msg.expires_at()) {
                log.events.push_back(MsgDropped{now, c.msg.id, nodes[i], DropReason::expired});
                ++sum.dropped_expired;
            } else {
                kept.push_back(c);
            }
        }
        held = std::move(kept);
    };

    for (const auto& ev : pending) {
        if (ev.kind == 0) {
            const Message m{ev.id, nodes[ev.a], nodes[ev.b], ev.t, cfg.ttl};
            custody[ev.a].push_back({m, false});
            index.insert(m.id, m.destination);
            log.events.push_back(MsgCreated{ev.t, m.id, m.source, m.destination, cfg.ttl});
            ++sum.messages_created;
            continue;
        }

        const std::uint32_t ia = ev.a;
        const std::uint32_t ib = ev.b;
        purge(ia, ev.t);
        purge(ib, ev.t);

        // Custody moves to the peer when the peer is the destination or
        // sits strictly lower in the static metric; both sides plan from
        // the pre-exchange state, so nothing bounces within one contact.
        auto plan = [&](std::uint32_t from, std::uint32_t to) {
            std::vector<std::size_t> take;
            for (std::size_t k = 0; k < custody[from].size(); ++k) {
                const auto& msg = custody[from][k].msg;
                if (msg.destination == nodes[to] ||
                    metric(to, msg.id) < metric(from, msg.id)) {
                    take.push_back(k);
                }
            }
            return take;
        };
        const auto take_a = plan(ia, ib);
        const auto take_b = plan(ib, ia);

        EncounterRecord er_a;
        EncounterRecord er_b;
        er_a.local_node = nodes[ia];
        er_a.peer_node = nodes[ib];
        er_b.local_node = nodes[ib];
        er_b.peer_node = nodes[ia];
        er_a.timestamp = er_b.timestamp = ev.t;
        seq[ia] += stride[ia];
        seq[ib] += stride[ib];
        er_a.local_seq = seq[ia];
        er_b.local_seq = seq[ib];

        auto transfer = [&](std::uint32_t from, std::uint32_t to,
                            const std::vector<std::size_t>& take, EncounterRecord& er_from,
                            EncounterRecord& er_to) {
            for (const auto k : take) {
                const Message msg = custody[from][k].msg;
                const auto sent_kind = msg.source == nodes[from] ? EntryKind::generated
                                                                 : EntryKind::relayed;
                er_from.entries.push_back({msg.id, Direction::sent, sent_kind});
                er_to.entries.push_back({msg.id, Direction::received, EntryKind::relayed});
                if (msg.destination == nodes[to]) {
                    log.events.push_back(MsgDelivered{ev.t, msg.id, nodes[to]});
                    ++sum.delivered;
                    continue;
                }
                auto* att = astate[to].get();
                if (att && !att->decide_forward(ev.t)) {
                    log.events.push_back(
                        MsgDropped{ev.t, msg.id, nodes[to], DropReason::malicious});
                    ++sum.dropped_malicious;
                    if (att->cfg.kind == AttackerKind::colluder) {
                        drop_pools[nodes[to]].push_back({ev.t, msg.id});
                    }
                    continue;
                }
                custody[to].push_back({msg, true});
            }
        };
        transfer(ia, ib, take_a, er_a, er_b);
        transfer(ib, ia, take_b, er_b, er_a);

        auto erase_taken = [&](std::uint32_t from, const std::vector<std::size_t>& take) {
            for (auto it = take.rbegin(); it != take.rend(); ++it) {
                custody[from].erase(custody[from].begin() + static_cast<std::ptrdiff_t>(*it));
            }
        };
        erase_taken(ia, take_a);
        erase_taken(ib, take_b);

        co_sign(er_a);
        co_sign(er_b);
        histories[ia].push_back(std::move(er_a));
        histories[ib].push_back(std::move(er_b));
        log.events.push_back(EncounterEvent{ev.t, nodes[ia], nodes[ib]});
        ++sum.encounters;
    }

    for (const auto& held : custody) sum.in_flight += held.size();

    std::map<NodeId, ColluderSpec> colluders;
    for (const auto& [node, a] : attackers) {
        if (a.kind == AttackerKind::colluder) {
            colluders[node] = {a.colluder_partners, a.target_rr, a.target_sr};
        }
    }
    std::vector<EncounterRecord> fakes;
    if (!colluders.empty()) {
        std::map<NodeId, std::vector<EncounterRecord>> hist_map;
        for (const auto& [node, spec] : colluders) hist_map[node] = histories[node.index];
        ForgeReport report;
        fakes = forge_windows(colluders, hist_map, drop_pools, index, cfg.forge_window,
                              cfg.duration, result.ring, report);
        sum.forged_records = report.forged_records;
        sum.forged_entries = report.forged_entries;
        sum.forge_unreachable = report.unreachable_entries;
    }

    std::size_t total = fakes.size();
    for (const auto& h : histories) total += h.size();
    log.ers.reserve(total);
    for (auto& h : histories) {
        for (auto& er : h) log.ers.push_back(std::move(er));
    }
    for (auto& er : fakes) log.ers.push_back(std::move(er));
    std::sort(log.ers.begin(), log.ers.end(),
              [](const EncounterRecord& a, const EncounterRecord& b) {
                  return std::tie(a.timestamp, a.local_node.index, a.local_seq) <
                         std::tie(b.timestamp, b.local_node.index, b.local_seq);
              });
    sum.encounter_records = log.ers.size();
    log.labels = ground_truth_labels(cfg);
    return result;
}

}  // namespace ersentinel
