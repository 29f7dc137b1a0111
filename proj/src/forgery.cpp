#include "ersentinel/forgery.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace ersentinel {

namespace {

bool targets_met(const BehaviorCounters& c, std::uint64_t k, double target_rr,
                 double target_sr) {
    BehaviorCounters t = c;
    t.rfm += k;
    t.sm += k;
    return relayed_ratio(t) >= target_rr && self_forwarding_ratio(t) <= target_sr;
}

}  // namespace

std::uint64_t fake_entry_deficit(const BehaviorCounters& counters, double target_rr,
                                 double target_sr) {
    if (targets_met(counters, 0, target_rr, target_sr)) return 0;
    std::uint64_t hi = 1;
    constexpr std::uint64_t kCap = std::uint64_t{1} << 40;
    while (!targets_met(counters, hi, target_rr, target_sr)) {
        if (hi >= kCap) return hi;
        hi <<= 1;
    }
    std::uint64_t lo = hi >> 1;
    while (lo + 1 < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (targets_met(counters, mid, target_rr, target_sr)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

NodeId choose_partner(const std::set<NodeId>& partners,
                      const std::vector<EncounterRecord>& history) {
    if (partners.empty()) throw ConfigError("colluder has no partners to choose from");
    std::map<NodeId, std::uint64_t> counts;
    for (const auto& p : partners) counts[p] = 0;
    for (const auto& er : history) {
        auto it = counts.find(er.peer_node);
        if (it != counts.end()) ++it->second;
    }
    NodeId best = *partners.begin();
    std::uint64_t best_count = counts[best];
    for (const auto& [p, n] : counts) {
        if (n < best_count) {
            best = p;
            best_count = n;
        }
    }
    return best;
}

namespace {

const std::vector<EncounterRecord>& history_of(
    const std::map<NodeId, std::vector<EncounterRecord>>& histories, const NodeId& node) {
    static const std::vector<EncounterRecord> kEmpty;
    auto it = histories.find(node);
    return it == histories.end() ? kEmpty : it->second;
}

void co_sign(EncounterRecord& er, const Keyring& ring) {
    const auto local = ring.find(er.local_node);
    const auto peer = ring.find(er.peer_node);
    if (!local || !peer) {
        throw DataError("no key for fake record signer " +
                        to_string(local ? er.peer_node : er.local_node));
    }
    er.sig_local = sign(*local, er);
    er.sig_peer = sign(*peer, er);
}

}  // namespace

ForgeOutcome forge_collusion_records(
    const NodeId& attacker, const std::set<NodeId>& partners,
    const std::map<NodeId, std::vector<EncounterRecord>>& histories,
    const std::vector<std::uint64_t>& claimable, const MessageIndex& messages,
    double target_rr, double target_sr, const Keyring& ring) {
    ForgeOutcome out;
    const auto& own = history_of(histories, attacker);
    const auto counters = compute_counters(own, attacker, messages);
    const std::uint64_t deficit = fake_entry_deficit(counters, target_rr, target_sr);
    if (deficit == 0) return out;

    const std::uint64_t k = std::min<std::uint64_t>(deficit, claimable.size());
    out.unreachable = k < deficit;
    if (k == 0) return out;

    const NodeId partner = choose_partner(partners, own);
    const auto& theirs = history_of(histories, partner);

    EncounterRecord claim;
    claim.local_node = attacker;
    claim.peer_node = partner;
    claim.timestamp = std::max(own.empty() ? SimTime{0} : own.back().timestamp,
                               theirs.empty() ? SimTime{0} : theirs.back().timestamp);
    claim.local_seq = (own.empty() ? 0 : own.back().local_seq) + 1;
    claim.ground_truth_forged = true;

    EncounterRecord mirror;
    mirror.local_node = partner;
    mirror.peer_node = attacker;
    mirror.timestamp = claim.timestamp;
    mirror.local_seq = (theirs.empty() ? 0 : theirs.back().local_seq) + 1;
    mirror.ground_truth_forged = true;

    for (std::uint64_t i = 0; i < k; ++i) {
        claim.entries.push_back({claimable[i], Direction::sent, EntryKind::relayed});
        mirror.entries.push_back({claimable[i], Direction::received, EntryKind::relayed});
    }
    co_sign(claim, ring);
    co_sign(mirror, ring);

    out.forged_entries = k;
    out.attacker_records.push_back(std::move(claim));
    out.partner_records.push_back(std::move(mirror));
    return out;
}

namespace {

// Index span of records falling in [from, to) by timestamp, assuming the
// vector is time-ordered.
template <typename T>
std::pair<std::size_t, std::size_t> span_in(const std::vector<T>& v, SimTime from, SimTime to,
                                            SimTime (*time_of)(const T&)) {
    auto lo = std::partition_point(v.begin(), v.end(),
                                   [&](const T& x) { return time_of(x) < from; });
    auto hi = std::partition_point(lo, v.end(), [&](const T& x) { return time_of(x) < to; });
    return {static_cast<std::size_t>(lo - v.begin()), static_cast<std::size_t>(hi - v.begin())};
}

SimTime er_time(const EncounterRecord& er) { return er.timestamp; }
SimTime drop_time(const std::pair<SimTime, std::uint64_t>& d) { return d.first; }

struct FakePair {
    EncounterRecord claim;
    EncounterRecord mirror;
    std::uint64_t entries = 0;
    bool dead = false;
};

}  // namespace

std::vector<EncounterRecord> forge_windows(
    const std::map<NodeId, ColluderSpec>& colluders,
    const std::map<NodeId, std::vector<EncounterRecord>>& histories,
    const std::map<NodeId, std::vector<std::pair<SimTime, std::uint64_t>>>& dropped,
    const MessageIndex& messages, SimTime window, SimTime horizon, const Keyring& ring,
    ForgeReport& report) {
    std::vector<EncounterRecord> out;
    if (colluders.empty() || window <= 0 || horizon <= 0) return out;

    static const std::vector<std::pair<SimTime, std::uint64_t>> kNoDrops;
    std::map<NodeId, NodeId> partner_of;
    for (const auto& [node, spec] : colluders) {
        partner_of[node] = choose_partner(spec.partners, history_of(histories, node));
    }

    const std::size_t n_windows = static_cast<std::size_t>((horizon + window - 1) / window);
    std::vector<FakePair> pairs;

    for (std::size_t w = 0; w < n_windows; ++w) {
        const SimTime w_start = static_cast<SimTime>(w) * window;
        const SimTime w_end = w_start + window;

        struct WindowState {
            BehaviorCounters base;
            std::pair<std::size_t, std::size_t> drop_span;
            const std::vector<std::pair<SimTime, std::uint64_t>>* drops = nullptr;
            SimTime anchor = 0;
            bool anchored = false;
            std::uint64_t k = 0;
            std::uint64_t want = 0;
        };
        std::map<NodeId, WindowState> state;

        for (const auto& [node, spec] : colluders) {
            WindowState st;
            const auto& hist = history_of(histories, node);
            const auto er_span = span_in(hist, w_start, w_end, er_time);
            if (er_span.first < er_span.second) {
                st.anchored = true;
                st.anchor = hist[er_span.second - 1].timestamp;
            }
            const std::vector<EncounterRecord> slice(hist.begin() + er_span.first,
                                                     hist.begin() + er_span.second);
            st.base = compute_counters(slice, node, messages);
            auto dit = dropped.find(node);
            st.drops = dit == dropped.end() ? &kNoDrops : &dit->second;
            st.drop_span = span_in(*st.drops, w_start, w_end, drop_time);
            state.emplace(node, std::move(st));
        }

        for (int iter = 0; iter < 1000; ++iter) {
            bool changed = false;
            for (auto& [node, st] : state) {
                BehaviorCounters c = st.base;
                for (const auto& [other, ost] : state) {
                    if (other == node || partner_of.at(other) != node) continue;
                    for (std::uint64_t i = 0; i < ost.k; ++i) {
                        const auto id = (*ost.drops)[ost.drop_span.first + i].second;
                        if (!messages.is_destination(id, node)) ++c.rmr;
                    }
                }
                const auto& spec = colluders.at(node);
                st.want = fake_entry_deficit(c, spec.target_rr, spec.target_sr);
                const std::uint64_t cap =
                    st.anchored ? st.drop_span.second - st.drop_span.first : 0;
                const std::uint64_t nk = std::min(st.want, cap);
                if (nk > st.k) {
                    st.k = nk;
                    changed = true;
                }
            }
            if (!changed) break;
        }

        for (const auto& [node, st] : state) {
            report.unreachable_entries += st.want - st.k;
            if (st.k == 0) continue;

            const NodeId partner = partner_of.at(node);
            const auto& theirs = history_of(histories, partner);
            const auto before_end = std::partition_point(
                theirs.begin(), theirs.end(),
                [&](const EncounterRecord& er) { return er.timestamp < w_end; });
            SimTime t = st.anchor;
            if (before_end != theirs.begin()) {
                t = std::max(t, (before_end - 1)->timestamp);
            }

            FakePair fp;
            fp.claim.local_node = node;
            fp.claim.peer_node = partner;
            fp.claim.timestamp = t;
            fp.claim.ground_truth_forged = true;
            fp.mirror.local_node = partner;
            fp.mirror.peer_node = node;
            fp.mirror.timestamp = t;
            fp.mirror.ground_truth_forged = true;
            for (std::uint64_t i = 0; i < st.k; ++i) {
                const auto id = (*st.drops)[st.drop_span.first + i].second;
                fp.claim.entries.push_back({id, Direction::sent, EntryKind::relayed});
                fp.mirror.entries.push_back({id, Direction::received, EntryKind::relayed});
            }
            fp.entries = st.k;
            pairs.push_back(std::move(fp));
        }
    }

    // Sequence slots: each fake sits in the gap after the last authentic
    // record at or before its timestamp, ordered within the gap, taking
    // consecutive numbers above the left neighbour. Attackers emit authentic
    // sequence numbers with a stride wide enough that slots are available;
    // if a gap still overflows the pair is abandoned.
    struct Placement {
        std::size_t gap;
        SimTime t;
        std::uint32_t peer;
        std::size_t pair_idx;
        bool mirror_side;
    };
    std::map<NodeId, std::vector<Placement>> placements;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        placements[pairs[i].claim.local_node].push_back(
            {0, pairs[i].claim.timestamp, pairs[i].claim.peer_node.index, i, false});
        placements[pairs[i].mirror.local_node].push_back(
            {0, pairs[i].mirror.timestamp, pairs[i].mirror.peer_node.index, i, true});
    }

    for (auto& [node, slots] : placements) {
        const auto& hist = history_of(histories, node);
        for (auto& s : slots) {
            const auto gap = std::upper_bound(
                hist.begin(), hist.end(), s.t,
                [](SimTime t, const EncounterRecord& er) { return t < er.timestamp; });
            s.gap = static_cast<std::size_t>(gap - hist.begin());
        }
        std::sort(slots.begin(), slots.end(), [](const Placement& a, const Placement& b) {
            return std::tie(a.gap, a.t, a.peer, a.pair_idx) <
                   std::tie(b.gap, b.t, b.peer, b.pair_idx);
        });
        std::size_t i = 0;
        while (i < slots.size()) {
            std::size_t j = i;
            while (j < slots.size() && slots[j].gap == slots[i].gap) ++j;
            const std::size_t gap = slots[i].gap;
            std::uint64_t seq = gap == 0 ? 0 : hist[gap - 1].local_seq;
            const std::uint64_t right = gap < hist.size()
                                            ? hist[gap].local_seq
                                            : std::numeric_limits<std::uint64_t>::max();
            for (; i < j; ++i) {
                auto& fp = pairs[slots[i].pair_idx];
                if (fp.dead) continue;
                if (seq + 1 >= right) {
                    fp.dead = true;
                    continue;
                }
                ++seq;
                (slots[i].mirror_side ? fp.mirror : fp.claim).local_seq = seq;
            }
        }
    }

    for (auto& fp : pairs) {
        if (fp.dead) {
            report.unreachable_entries += fp.entries;
            continue;
        }
        co_sign(fp.claim, ring);
        co_sign(fp.mirror, ring);
        report.forged_records += 2;
        report.forged_entries += fp.entries;
        out.push_back(std::move(fp.claim));
        out.push_back(std::move(fp.mirror));
    }
    return out;
}

}  // namespace ersentinel
