#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ersentinel/detector.hpp"
#include "ersentinel/evaluation.hpp"
#include "ersentinel/scenario.hpp"
#include "ersentinel/simulator.hpp"

namespace fs = std::filesystem;
using namespace ersentinel;

namespace {

struct Cli {
    std::string scenario;
    std::string out;
    std::string trace;
    std::string keys;
    std::string verdicts;
    std::string labels;
    std::uint64_t seed = 0;
    double rr = 0.0;
    double sr = 0.0;
    double fxs = 0.0;
    unsigned jobs = 1;
};

struct SubOpts {
    CLI::Option* seed = nullptr;
    CLI::Option* rr = nullptr;
    CLI::Option* sr = nullptr;
    CLI::Option* fxs = nullptr;
};

SubOpts add_common(CLI::App* cmd, Cli& c, bool thresholds, bool jobs) {
    SubOpts o;
    cmd->add_option("--scenario", c.scenario, "scenario file");
    cmd->add_option("--out", c.out, "output directory");
    o.seed = cmd->add_option("--seed", c.seed, "override the scenario seed");
    if (thresholds) {
        o.rr = cmd->add_option("--rr-threshold", c.rr, "override the RR threshold");
        o.sr = cmd->add_option("--sr-threshold", c.sr, "override the SR threshold");
        o.fxs = cmd->add_option("--fxs-threshold", c.fxs, "fixed FXS cutoff (default: auto)");
    }
    if (jobs) cmd->add_option("--jobs", c.jobs, "parallel sweep workers");
    return o;
}

Scenario load_config(const Cli& c, const SubOpts& o) {
    Scenario sc = c.scenario.empty() ? default_scenario() : load_scenario(c.scenario);
    if (o.seed && o.seed->count()) sc.sim.seed = c.seed;
    if (o.rr && o.rr->count()) sc.det.rr_threshold = c.rr;
    if (o.sr && o.sr->count()) sc.det.sr_threshold = c.sr;
    if (o.fxs && o.fxs->count()) sc.det.fxs_threshold = c.fxs;
    validate(sc.sim);
    validate(sc.det);
    return sc;
}

fs::path resolve_out(const Cli& c, const Scenario& sc) {
    if (!c.out.empty()) return c.out;
    if (!sc.output_dir.empty()) return sc.output_dir;
    if (const char* env = std::getenv("ER_SENTINEL_OUT"); env && *env) return env;
    return "out";
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    return f;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    return f;
}

std::string fmt(const char* pattern, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

SimResult simulate_to(const Scenario& sc, const fs::path& out) {
    fs::create_directories(out);
    SimResult res = run(sc.sim);
    {
        auto f = open_out(out / "trace.jsonl");
        write_trace(res.log, f);
    }
    {
        auto f = open_out(out / "labels.jsonl");
        write_labels(res.log.labels, f);
    }
    {
        auto f = open_out(out / "trace.keys");
        write_keys(res.ring, f);
    }
    const auto& s = res.summary;
    std::cout << "nodes      " << sc.sim.n_servers + sc.sim.n_vms << '\n'
              << "messages   " << s.messages_created << '\n'
              << "encounters " << s.encounters << '\n'
              << "records    " << s.encounter_records << '\n'
              << "delivered  " << s.delivered << '\n'
              << "dropped    " << s.dropped_malicious << " malicious, " << s.dropped_expired
              << " expired, " << s.in_flight << " in flight\n";
    if (s.forged_records > 0) {
        std::cout << "forged     " << s.forged_records << " records, " << s.forged_entries
                  << " entries";
        if (s.forge_unreachable > 0) {
            std::cout << " (" << s.forge_unreachable << " short of target)";
        }
        std::cout << '\n';
    }
    std::cout << "wrote " << (out / "trace.jsonl").string() << '\n';
    return res;
}

void report_detection(const DetectionResult& result, std::ostream& os) {
    os << "audit violations " << result.violations.size() << '\n';
    os << "blacklisted " << result.blacklist.size() << '\n';
    for (const auto& node : result.blacklist) {
        os << "  " << to_string(node) << ' '
           << to_string(result.nodes.at(node).classification) << '\n';
    }
}

DetectionScore evaluate_folded(const std::vector<NodeVerdict>& folded, const Labels& labels,
                               const fs::path& out) {
    for (const auto& [node, role] : labels) {
        const auto match = std::find_if(folded.begin(), folded.end(),
                                        [&](const NodeVerdict& v) { return v.node == node; });
        if (match == folded.end()) {
            throw DataError("no verdict for labeled node " + to_string(node));
        }
    }
    const auto counts = confusion(folded, labels);
    const auto s = score(counts);
    std::cout << "tp " << counts.tp << "  fp " << counts.fp << "  fn " << counts.fn << "  tn "
              << counts.tn << '\n'
              << "precision " << fmt("%.3f", s.precision) << '\n'
              << "recall    " << fmt("%.3f", s.recall) << '\n'
              << "f_score   " << fmt("%.3f", s.f_score) << '\n';
    auto f = open_out(out / "score.csv");
    f << "precision,recall,f_score\n"
      << fmt("%.3f", s.precision) << ',' << fmt("%.3f", s.recall) << ','
      << fmt("%.3f", s.f_score) << '\n';
    return s;
}

std::vector<SweepTable> sweep_to(const Scenario& sc, const DetectorView& view,
                                 const Labels& labels, const Keyring& ring, unsigned jobs,
                                 const fs::path& out) {
    fs::create_directories(out);
    std::vector<SweepTable> tables;
    tables.reserve(sc.sweeps.size());
    for (const auto& spec : sc.sweeps) {
        tables.push_back(threshold_sweep(view, labels, spec, sc.det, ring, jobs));
        const auto name = "sweep_" + to_string(spec.metric) + "_" + to_string(spec.mode) + ".csv";
        auto f = open_out(out / name);
        f << sweep_csv(tables.back());
        std::cout << "wrote " << (out / name).string() << '\n';
    }
    const auto rows = summarize(tables);
    {
        auto f = open_out(out / "summary.csv");
        f << summary_csv(rows);
    }
    for (const auto& r : rows) {
        std::cout << to_string(r.mode) << ' ' << to_string(r.metric) << " threshold "
                  << fmt("%.6g", r.threshold) << ": p " << fmt("%.3f", r.score.precision)
                  << "  r " << fmt("%.3f", r.score.recall) << "  f "
                  << fmt("%.3f", r.score.f_score) << '\n';
    }
    return tables;
}

int cmd_simulate(const Cli& c, const SubOpts& o) {
    const auto sc = load_config(c, o);
    simulate_to(sc, resolve_out(c, sc));
    return 0;
}

int cmd_detect(const Cli& c, const SubOpts& o) {
    const auto sc = load_config(c, o);
    const auto out = resolve_out(c, sc);
    const fs::path trace_path = c.trace.empty() ? out / "trace.jsonl" : fs::path(c.trace);
    fs::path keys_path = c.keys.empty() ? trace_path.parent_path() / "trace.keys"
                                        : fs::path(c.keys);

    DetectorView view;
    {
        auto f = open_in(trace_path);
        view = read_detector_view(f);
    }
    Keyring ring;
    if (fs::exists(keys_path)) {
        auto f = open_in(keys_path);
        ring = read_keys(f);
    } else if (!c.keys.empty()) {
        throw DataError("cannot open " + keys_path.string());
    } else {
        std::cout << "no keyring beside the trace, skipping signature audits\n";
    }

    const auto result = detect(view, ring, sc.det);
    fs::create_directories(out);
    {
        auto f = open_out(out / "verdicts.jsonl");
        write_verdicts(result, f);
    }
    report_detection(result, std::cout);
    std::cout << "wrote " << (out / "verdicts.jsonl").string() << '\n';
    return 0;
}

int cmd_evaluate(const Cli& c, const SubOpts& o) {
    const auto sc = load_config(c, o);
    const auto out = resolve_out(c, sc);
    const fs::path verdicts_path = c.verdicts.empty() ? out / "verdicts.jsonl"
                                                      : fs::path(c.verdicts);
    const fs::path labels_path = c.labels.empty() ? out / "labels.jsonl" : fs::path(c.labels);
    std::vector<Verdict> rows;
    {
        auto f = open_in(verdicts_path);
        rows = read_verdicts(f);
    }
    Labels labels;
    {
        auto f = open_in(labels_path);
        labels = read_labels(f);
    }
    fs::create_directories(out);
    evaluate_folded(fold_verdicts(rows), labels, out);
    return 0;
}

int cmd_sweep(const Cli& c, const SubOpts& o) {
    const auto sc = load_config(c, o);
    const auto out = resolve_out(c, sc);
    const auto res = run(sc.sim);
    sweep_to(sc, make_detector_view(res.log), res.log.labels, res.ring, c.jobs, out);
    return 0;
}

int cmd_run_all(const Cli& c, const SubOpts& o) {
    const auto sc = load_config(c, o);
    const auto out = resolve_out(c, sc);
    const auto res = simulate_to(sc, out);
    const auto view = make_detector_view(res.log);

    const auto result = detect(view, res.ring, sc.det);
    {
        auto f = open_out(out / "verdicts.jsonl");
        write_verdicts(result, f);
    }
    report_detection(result, std::cout);

    std::vector<NodeVerdict> folded;
    folded.reserve(result.nodes.size());
    for (const auto& [node, v] : result.nodes) folded.push_back(v);
    evaluate_folded(folded, res.log.labels, out);

    sweep_to(sc, view, res.log.labels, res.ring, c.jobs, out);
    return 0;
}

template <typename F>
int guarded(F&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relay mesh simulator with encounter-record misbehavior detection"};
    app.require_subcommand(1);
    Cli c;

    auto* sim_cmd = app.add_subcommand("simulate", "run the simulation, write trace and labels");
    const auto sim_opts = add_common(sim_cmd, c, false, false);

    auto* det_cmd = app.add_subcommand("detect", "audit a trace and write verdicts");
    const auto det_opts = add_common(det_cmd, c, true, false);
    det_cmd->add_option("--trace", c.trace, "trace file (default: <out>/trace.jsonl)");
    det_cmd->add_option("--keys", c.keys, "keyring file (default: trace.keys beside the trace)");

    auto* eval_cmd = app.add_subcommand("evaluate", "score verdicts against ground truth");
    const auto eval_opts = add_common(eval_cmd, c, false, false);
    eval_cmd->add_option("--verdicts", c.verdicts,
                         "verdicts file (default: <out>/verdicts.jsonl)");
    eval_cmd->add_option("--labels", c.labels, "labels file (default: <out>/labels.jsonl)");

    auto* sweep_cmd = app.add_subcommand("sweep", "simulate and sweep the threshold tables");
    const auto sweep_opts = add_common(sweep_cmd, c, true, true);

    auto* all_cmd = app.add_subcommand("run-all", "simulate, detect, evaluate, sweep");
    const auto all_opts = add_common(all_cmd, c, true, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (sim_cmd->parsed()) return guarded([&] { return cmd_simulate(c, sim_opts); });
    if (det_cmd->parsed()) return guarded([&] { return cmd_detect(c, det_opts); });
    if (eval_cmd->parsed()) return guarded([&] { return cmd_evaluate(c, eval_opts); });
    if (sweep_cmd->parsed()) return guarded([&] { return cmd_sweep(c, sweep_opts); });
    if (all_cmd->parsed()) return guarded([&] { return cmd_run_all(c, all_opts); });
    return 1;
}
