#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ersentinel/scenario.hpp"
#include "helpers.hpp"

using namespace ersentinel;
using namespace testutil;

namespace {

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

}  // namespace

TEST_CASE("default scenario carries the standard setup") {
    const auto sc = default_scenario();

    CHECK(sc.sim.n_servers == 5);
    CHECK(sc.sim.n_vms == 50);
    CHECK(sc.sim.duration == seconds(36000));
    CHECK(sc.sim.msg_interval_low == 20.0);
    CHECK(sc.sim.msg_interval_high == 30.0);
    CHECK(sc.sim.msg_scope == MsgScope::per_node);
    CHECK(sc.sim.encounter_rate == 6.0);
    CHECK(sc.sim.routing_copies == 1);
    CHECK(sc.sim.ttl == seconds(3600));
    CHECK(sc.sim.forge_window == seconds(3600));
    CHECK(sc.sim.seed == 1);
    CHECK(sc.sim.attacker_mix.empty());

    CHECK(sc.det.rr_threshold == 0.5375);
    CHECK(sc.det.sr_threshold == 0.63);
    CHECK_FALSE(sc.det.fxs_threshold.has_value());
    CHECK(sc.det.window == seconds(3600));

    REQUIRE(sc.sweeps.size() == 4);
    CHECK(sc.sweeps[0].metric == SweepMetric::rr);
    CHECK(sc.sweeps[0].mode == SweepMode::individual);
    CHECK(sc.sweeps[0].thresholds == std::vector<double>{0.4375, 0.5375, 0.5875});
    CHECK(sc.sweeps[1].metric == SweepMetric::sr);
    CHECK(sc.sweeps[1].mode == SweepMode::individual);
    CHECK(sc.sweeps[1].thresholds == std::vector<double>{0.56, 0.63, 0.69});
    CHECK(sc.sweeps[2].metric == SweepMetric::rr);
    CHECK(sc.sweeps[2].mode == SweepMode::collusion);
    CHECK(sc.sweeps[2].thresholds == std::vector<double>{0.47, 0.52, 0.66});
    CHECK(sc.sweeps[3].metric == SweepMetric::sr);
    CHECK(sc.sweeps[3].mode == SweepMode::collusion);
    CHECK(sc.sweeps[3].thresholds == std::vector<double>{0.59, 0.65, 0.71});

    CHECK(sc.output_dir.empty());

    CHECK_NOTHROW(validate(sc.sim));
    CHECK_NOTHROW(validate(sc.det));
}

TEST_CASE("a full scenario file parses") {
    const std::string text = R"(# sized down for tests
[topology]
n_servers = 2
n_vms = 8

[traffic]
duration = 7200        ; two hours
msg_interval = 15 25
msg_scope = per_network
encounter_rate = 4.5
routing_copies = 2
ttl = 1800
forge_window = 900

[seed]
seed = 42

[attackers]
attacker = v3,v4 blackhole
attacker = v5 greyhole drop_every_n=3
attacker = v6 colluder drop_prob=0.9 partners=v7 target_rr=0.65 target_sr=0.4
attacker = v7 colluder drop_prob=0.0 partners=v6

[detection]
rr_threshold = 0.51
sr_threshold = 0.6
fxs_threshold = 7.5
window = 1800
reputation_step = 0.2
blacklist_reputation = 0.4

[sweep]
rr_individual = 0.3 0.5 0.7
sr_collusion = 0.55

[output]
dir = results/run1
)";
    const auto sc = parse(text);

    CHECK(sc.sim.n_servers == 2);
    CHECK(sc.sim.n_vms == 8);
    CHECK(sc.sim.duration == seconds(7200));
    CHECK(sc.sim.msg_interval_low == 15.0);
    CHECK(sc.sim.msg_interval_high == 25.0);
    CHECK(sc.sim.msg_scope == MsgScope::per_network);
    CHECK(sc.sim.encounter_rate == 4.5);
    CHECK(sc.sim.routing_copies == 2);
    CHECK(sc.sim.ttl == seconds(1800));
    CHECK(sc.sim.forge_window == seconds(900));
    CHECK(sc.sim.seed == 42);

    REQUIRE(sc.sim.attacker_mix.size() == 4);
    const auto& g0 = sc.sim.attacker_mix[0];
    CHECK(g0.nodes == std::set<NodeId>{vm(3), vm(4)});
    CHECK(g0.config.kind == AttackerKind::blackhole);
    const auto& g1 = sc.sim.attacker_mix[1];
    CHECK(g1.nodes == std::set<NodeId>{vm(5)});
    CHECK(g1.config.kind == AttackerKind::greyhole);
    CHECK(g1.config.drop_every_n == 3);
    CHECK_FALSE(g1.config.drop_prob.has_value());
    const auto& g2 = sc.sim.attacker_mix[2];
    CHECK(g2.config.kind == AttackerKind::colluder);
    CHECK(g2.config.drop_prob == 0.9);
    CHECK(g2.config.colluder_partners == std::set<NodeId>{vm(7)});
    CHECK(g2.config.target_rr == 0.65);
    CHECK(g2.config.target_sr == 0.4);
    const auto& g3 = sc.sim.attacker_mix[3];
    CHECK(g3.config.drop_prob == 0.0);
    CHECK(g3.config.colluder_partners == std::set<NodeId>{vm(6)});

    CHECK(sc.det.rr_threshold == 0.51);
    CHECK(sc.det.sr_threshold == 0.6);
    CHECK(sc.det.fxs_threshold == 7.5);
    CHECK(sc.det.window == seconds(1800));
    CHECK(sc.det.reputation_step == 0.2);
    CHECK(sc.det.blacklist_reputation == 0.4);

    REQUIRE(sc.sweeps.size() == 4);
    CHECK(sc.sweeps[0].thresholds == std::vector<double>{0.3, 0.5, 0.7});
    CHECK(sc.sweeps[1].thresholds == std::vector<double>{0.56, 0.63, 0.69});
    CHECK(sc.sweeps[2].thresholds == std::vector<double>{0.47, 0.52, 0.66});
    CHECK(sc.sweeps[3].thresholds == std::vector<double>{0.55});

    CHECK(sc.output_dir == "results/run1");

    SUBCASE("derived views agree with the mix") {
        const auto attackers = attacker_map(sc.sim);
        REQUIRE(attackers.size() == 5);
        CHECK(attackers.at(vm(3)).kind == AttackerKind::blackhole);
        CHECK(attackers.at(vm(5)).drop_every_n == 3);
        CHECK(attackers.at(vm(6)).colluder_partners.count(vm(7)) == 1);

        const auto labels = ground_truth_labels(sc.sim);
        REQUIRE(labels.size() == 10);
        CHECK(labels.at(srv(0)) == TruthRole::honest);
        CHECK(labels.at(srv(1)) == TruthRole::honest);
        CHECK(labels.at(vm(2)) == TruthRole::honest);
        CHECK(labels.at(vm(3)) == TruthRole::blackhole);
        CHECK(labels.at(vm(4)) == TruthRole::blackhole);
        CHECK(labels.at(vm(5)) == TruthRole::greyhole);
        CHECK(labels.at(vm(6)) == TruthRole::colluder);
        CHECK(labels.at(vm(7)) == TruthRole::colluder);
        CHECK(labels.at(vm(8)) == TruthRole::honest);
        CHECK(labels.at(vm(9)) == TruthRole::honest);
    }
}

TEST_CASE("fxs_threshold accepts a number or auto") {
    const auto sc = parse("[detection]\nfxs_threshold = 6.5\n");
    CHECK(sc.det.fxs_threshold == 6.5);

    const auto reset = parse("[detection]\nfxs_threshold = 6.5\nfxs_threshold = auto\n");
    CHECK_FALSE(reset.det.fxs_threshold.has_value());
}

TEST_CASE("parse errors cite the line") {
    auto fails_with = [](const std::string& text, const char* needle) {
        CHECK_THROWS_WITH_AS(parse(text), doctest::Contains(needle), ConfigError);
    };

    fails_with("[nonsense]\n", "scenario line 1");
    fails_with("[topology]\nwidth = 3\n", "scenario line 2");
    fails_with("[topology]\nn_servers = abc\n", "not a non-negative integer");
    fails_with("[topology]\nn_servers\n", "expected key = value");
    fails_with("[topology\n", "unterminated section header");
    fails_with("n_servers = 3\n", "key outside any section");
    fails_with("[traffic]\nmsg_interval = 20\n", "msg_interval needs two numbers");
    fails_with("[traffic]\nmsg_scope = broadcast\n", "per_node or per_network");
    fails_with("[traffic]\nduration = soon\n", "not a number");
    fails_with("[attackers]\nattacker = v3\n", "scenario line 2");
    fails_with("[attackers]\nattacker = v3 wormhole\n", "unknown attacker kind");
    fails_with("[attackers]\nattacker = v3 greyhole speed=9\n", "unknown parameter");
    fails_with("[attackers]\nattacker = v3 greyhole drop_prob\n", "expected key=value");
    fails_with("[sweep]\nrr_individual = \t\n", "expected key = value");
    fails_with("[detection]\nwindow = 60\nfxs = 2\n", "scenario line 3");
}

TEST_CASE("validation rejects inconsistent configs") {
    auto rejects = [](const std::string& text, const char* needle) {
        CHECK_THROWS_WITH_AS(parse(text), doctest::Contains(needle), ConfigError);
    };

    rejects("[topology]\nn_servers = 0\n", "n_servers must be positive");
    rejects("[attackers]\nattacker = v10,v11 blackhole\nattacker = v11 greyhole drop_prob=0.5\n",
            "more than one attacker group");
    rejects("[attackers]\nattacker = v99 blackhole\n", "not in topology");
    rejects("[attackers]\nattacker = v10 blackhole drop_prob=0.5\n", "no drop parameters");
    rejects("[attackers]\nattacker = v10 greyhole\n", "exactly one of");
    rejects("[attackers]\nattacker = v10 greyhole drop_prob=0.5 drop_every_n=2\n",
            "exactly one of");
    rejects("[attackers]\nattacker = v10 greyhole drop_prob=1.5\n", "must be in [0, 1]");
    rejects("[attackers]\nattacker = v10 colluder partners=v11\n",
            "drop_prob and no other drop mode");
    rejects("[attackers]\nattacker = v10 colluder drop_prob=0.9\n", "at least one partner");
    rejects("[attackers]\nattacker = v10 colluder drop_prob=0.9 partners=v10\n",
            "cannot partner with itself");
    rejects(
        "[attackers]\n"
        "attacker = v10 colluder drop_prob=0.9 partners=v11\n"
        "attacker = v11 greyhole drop_prob=0.5\n",
        "must itself be a colluder");
    rejects("[attackers]\nattacker = v10 colluder drop_prob=0.9 partners=v11\n",
            "must itself be a colluder");
    rejects(
        "[attackers]\nattacker = v10 colluder drop_prob=0.9 partners=v11 target_rr=0\n"
        "attacker = v11 colluder drop_prob=0.0 partners=v10\n",
        "targets must be in (0, 1]");

    SUBCASE("direct SimConfig validation") {
        SimConfig cfg;
        cfg.n_vms = 0;
        CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("n_vms"), ConfigError);

        cfg = SimConfig{};
        cfg.msg_interval_high = cfg.msg_interval_low - 1.0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);

        cfg = SimConfig{};
        cfg.encounter_rate = 0.0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);

        cfg = SimConfig{};
        cfg.routing_copies = 0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);

        cfg = SimConfig{};
        cfg.ttl = 0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);

        cfg = SimConfig{};
        cfg.forge_window = 0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);

        cfg = SimConfig{};
        cfg.duration = 0;
        CHECK_THROWS_AS(validate(cfg), ConfigError);

        cfg = SimConfig{};
        CHECK_NOTHROW(validate(cfg));
    }
}

TEST_CASE("load_scenario reads files and reports missing ones") {
    CHECK_THROWS_WITH_AS(load_scenario("/nonexistent/path.ini"),
                         doctest::Contains("cannot open"), ConfigError);

    const auto path = std::filesystem::temp_directory_path() / "ersentinel_scenario_test.ini";
    {
        std::ofstream out(path);
        out << "[topology]\nn_servers = 3\nn_vms = 9\n[seed]\nseed = 7\n";
    }
    const auto sc = load_scenario(path.string());
    CHECK(sc.sim.n_servers == 3);
    CHECK(sc.sim.n_vms == 9);
    CHECK(sc.sim.seed == 7);
    std::filesystem::remove(path);
}

TEST_CASE("node and attacker names roundtrip") {
    CHECK(parse_node_id("s3") == srv(3));
    CHECK(parse_node_id("v12") == vm(12));
    CHECK(to_string(srv(0)) == "s0");
    CHECK(to_string(vm(54)) == "v54");
    CHECK_THROWS_AS(parse_node_id("x9"), DataError);
    CHECK_THROWS_AS(parse_node_id("v"), DataError);
    CHECK_THROWS_AS(parse_node_id("v1x"), DataError);
    CHECK_THROWS_AS(parse_node_id(""), DataError);

    for (const auto kind :
         {AttackerKind::blackhole, AttackerKind::greyhole, AttackerKind::colluder}) {
        CHECK(parse_attacker_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(parse_attacker_kind("wormhole"), ConfigError);
}
