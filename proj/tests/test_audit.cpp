#include <doctest.h>

#include <vector>

#include "ersentinel/audit.hpp"
#include "helpers.hpp"

using namespace ersentinel;
using namespace testutil;

TEST_CASE("sequence audit flags regressions and repeats") {
    const auto node = vm(1);
    std::vector<EncounterRecord> history;
    history.push_back(make_er(node, vm(2), 100, 1));
    history.push_back(make_er(node, vm(3), 200, 3));
    history.push_back(make_er(node, vm(4), 300, 2));

    auto violations = audit_sequences(history);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == ViolationKind::seq_order);
    CHECK(violations[0].index == 2);
    CHECK(violations[0].node == node);

    SUBCASE("equal sequence numbers also fail strict increase") {
        history[2].local_seq = 3;
        violations = audit_sequences(history);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].kind == ViolationKind::seq_order);
    }
}

TEST_CASE("timestamp audit flags time running backwards") {
    const auto node = vm(1);
    std::vector<EncounterRecord> history;
    history.push_back(make_er(node, vm(2), 100, 1));
    history.push_back(make_er(node, vm(3), 250, 2));
    history.push_back(make_er(node, vm(4), 200, 3));

    const auto violations = audit_sequences(history);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == ViolationKind::timestamp_order);
    CHECK(violations[0].index == 2);

    SUBCASE("equal timestamps are legal") {
        std::vector<EncounterRecord> same;
        same.push_back(make_er(node, vm(2), 100, 1));
        same.push_back(make_er(node, vm(3), 100, 2));
        CHECK(audit_sequences(same).empty());
    }
}

TEST_CASE("empty and single histories pass the order audit") {
    CHECK(audit_sequences({}).empty());
    CHECK(audit_sequences({make_er(vm(1), vm(2), 5, 1)}).empty());
}

TEST_CASE("signature audit") {
    const auto nodes = std::vector<NodeId>{vm(1), vm(2), vm(3)};
    const auto ring = test_ring(nodes);
    std::vector<EncounterRecord> history;
    auto er = make_er(vm(1), vm(2), 100, 1, {sent(5)});
    co_sign(er, ring);
    history.push_back(er);

    SUBCASE("valid co-signatures pass") {
        CHECK(audit_signatures(history, ring).empty());
    }

    SUBCASE("tampered local signature") {
        history[0].sig_local.digest[3] ^= 0x10;
        const auto violations = audit_signatures(history, ring);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].kind == ViolationKind::bad_local_sig);
        CHECK(violations[0].node == vm(1));
    }

    SUBCASE("tampered peer signature") {
        history[0].sig_peer.digest[0] ^= 0x01;
        const auto violations = audit_signatures(history, ring);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].kind == ViolationKind::bad_peer_sig);
    }

    SUBCASE("tampered content invalidates both signatures") {
        history[0].entries.push_back(sent(99));
        const auto violations = audit_signatures(history, ring);
        CHECK(violations.size() == 2);
    }

    SUBCASE("missing key reports unverifiable, not invalid") {
        Keyring partial;
        partial.insert(vm(1), *ring.find(vm(1)));
        const auto violations = audit_signatures(history, partial);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].kind == ViolationKind::unverifiable);
    }
}

TEST_CASE("cross-check accepts mirrored accounts") {
    const auto ring = test_ring({vm(1), vm(2)});
    const auto [er_a, er_b] =
        contact(vm(1), vm(2), 100, 1, 1, {sent(5), received(6)}, ring);
    const auto violations =
        cross_check_neighbors({er_a}, {er_b}, vm(1), vm(2));
    CHECK(violations.empty());
}

TEST_CASE("cross-check flags a one-sided claim") {
    const auto ring = test_ring({vm(1), vm(2)});
    const auto [er_a, er_b] = contact(vm(1), vm(2), 100, 1, 1, {sent(5)}, ring);
    auto lone = make_er(vm(1), vm(2), 900, 2, {sent(7), sent(8)});
    co_sign(lone, ring);

    const auto violations =
        cross_check_neighbors({er_a, lone}, {er_b}, vm(1), vm(2));
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == ViolationKind::one_sided_claim);
    CHECK(violations[0].node == vm(1));
    CHECK(violations[0].timestamp == 900);
}

TEST_CASE("cross-check flags diverging entry sets on both parties") {
    const auto ring = test_ring({vm(1), vm(2)});
    auto er_a = make_er(vm(1), vm(2), 100, 1, {sent(5), sent(6), sent(7)});
    auto er_b = make_er(vm(2), vm(1), 100, 1, {received(5), received(6)});
    co_sign(er_a, ring);
    co_sign(er_b, ring);

    const auto violations = cross_check_neighbors({er_a}, {er_b}, vm(1), vm(2));
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].kind == ViolationKind::entry_divergence);
    CHECK(violations[1].kind == ViolationKind::entry_divergence);
    CHECK(((violations[0].node == vm(1) && violations[1].node == vm(2)) ||
           (violations[0].node == vm(2) && violations[1].node == vm(1))));
}

TEST_CASE("cross-check ignores entry kind, the sender's private knowledge") {
    const auto ring = test_ring({vm(1), vm(2)});
    auto er_a = make_er(vm(1), vm(2), 100, 1, {sent(5, EntryKind::generated)});
    auto er_b = make_er(vm(2), vm(1), 100, 1, {received(5)});
    co_sign(er_a, ring);
    co_sign(er_b, ring);
    CHECK(cross_check_neighbors({er_a}, {er_b}, vm(1), vm(2)).empty());
}

TEST_CASE("cross-check pairs same-timestamp contacts by entry mirror") {
    const auto ring = test_ring({vm(1), vm(2)});
    const auto [a1, b1] = contact(vm(1), vm(2), 100, 1, 1, {sent(5)}, ring);
    const auto [a2, b2] = contact(vm(1), vm(2), 100, 2, 2, {received(6)}, ring);
    CHECK(cross_check_neighbors({a1, a2}, {b1, b2}, vm(1), vm(2)).empty());
    // Same set, opposite arrival order on one side.
    CHECK(cross_check_neighbors({a1, a2}, {b2, b1}, vm(1), vm(2)).empty());
}

TEST_CASE("co-signed fakes sail through all three audits") {
    // The collusion blind spot: a fabricated contact signed with both
    // real keys, mirrored on both sides, and inserted in legal order is
    // indistinguishable from authentic evidence at the audit layer.
    const auto ring = test_ring({vm(1), vm(2), vm(3)});

    std::vector<EncounterRecord> history_a;
    std::vector<EncounterRecord> history_b;
    const auto [a1, b1] = contact(vm(1), vm(2), 100, 1, 1, {sent(5)}, ring);
    history_a.push_back(a1);
    history_b.push_back(b1);

    const auto [fake_a, fake_b] =
        contact(vm(1), vm(2), 200, 2, 2, {sent(6), sent(7), sent(8)}, ring);
    history_a.push_back(fake_a);
    history_b.push_back(fake_b);

    CHECK(audit_sequences(history_a).empty());
    CHECK(audit_sequences(history_b).empty());
    CHECK(audit_signatures(history_a, ring).empty());
    CHECK(audit_signatures(history_b, ring).empty());
    CHECK(cross_check_neighbors(history_a, history_b, vm(1), vm(2)).empty());
}
