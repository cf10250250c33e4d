// Command-line front end: scenario runs, benchmark sweeps, break-even scans
// and a standalone proxy server.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "circulate/bench.hpp"
#include "circulate/config.hpp"
#include "circulate/net.hpp"

using namespace circulate;

namespace {

int cmd_run(const std::string& config_path, const std::string& mode_override,
            const std::string& case_override, bool print_trace) {
    Scenario s = load_scenario_file(config_path);
    if (!mode_override.empty())
        s.mode = mode_override == "circulate" ? Mode::Circulate : Mode::Centralized;
    if (!case_override.empty())
        s.kase = case_override == "best" ? Case::Best : Case::Worst;
    RunTrace trace =
        run_simulated(s.pattern, s.mode, s.kase, s.topology, s.behaviors, s.sim);
    if (print_trace) {
        std::cout << trace_to_json(trace).dump(2) << "\n";
        return 0;
    }
    std::cout << "mode:            " << to_string(s.mode) << " (" << to_string(s.kase)
              << " case)\n";
    std::cout << "elapsed_ms:      " << trace.elapsed_ms << "\n";
    std::cout << "final_size:      " << trace.final_size << "\n";
    if (trace.final_hash)
        std::cout << "final_hash:      " << *trace.final_hash << "\n";
    std::cout << "wan_bytes:       " << trace.per_class_bytes.bytes(LinkClass::Wan)
              << "\n";
    std::cout << "lan_bytes:       " << trace.per_class_bytes.bytes(LinkClass::Lan)
              << "\n";
    std::cout << "data_messages:   "
              << trace.per_class_bytes.messages(LinkClass::SameServer) +
                     trace.per_class_bytes.messages(LinkClass::Lan) +
                     trace.per_class_bytes.messages(LinkClass::Wan)
              << "\n";
    return 0;
}

std::vector<ExperimentConfig> load_experiments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<ExperimentConfig> out;
    if (doc.is_array()) {
        for (const auto& j : doc) out.push_back(experiment_config_from_json(j));
    } else if (doc.contains("experiments")) {
        for (const auto& j : doc.at("experiments"))
            out.push_back(experiment_config_from_json(j));
    } else {
        out.push_back(experiment_config_from_json(doc));
    }
    return out;
}

int cmd_bench_run(const std::string& config_path, const std::string& out_path,
                  bool check) {
    std::vector<ExperimentConfig> configs =
        config_path.empty() ? reference_configs() : load_experiments(config_path);
    StatsTable table;
    for (const ExperimentConfig& c : configs) {
        StatsTable part = run_experiment(c);
        table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
    }
    if (!out_path.empty()) emit_csv(table, out_path);
    std::cout << emit_summary(table);
    if (check) {
        double e2e = end_to_end_ratio(true, Case::Worst, reference_e2e_input());
        std::cout << "end_to_end remote WC ratio: " << e2e << "\n";
        OrderingCheck result = check_orderings(table, e2e);
        if (!result.ok()) {
            for (const std::string& f : result.failures)
                std::cerr << "ordering violation: " << f << "\n";
            return 1;
        }
        std::cout << "all ordering properties hold\n";
    }
    return 0;
}

int cmd_breakeven(bool local, long long lo, long long hi, double per_call) {
    BreakEvenConfig config;
    config.remote = !local;
    config.overhead.per_call_ms = per_call;
    BreakEvenReport report = break_even_scan(config, lo, hi);
    if (report.all_geq_one) {
        std::cout << "no sub-unity region: circulate wins at every scanned size\n";
        return 0;
    }
    if (!report.found) {
        std::cout << "no crossover inside [" << lo << ", " << hi << "] bytes\n";
        return 1;
    }
    std::cout << "break-even payload size: " << report.crossover << " bytes\n";
    std::cout << "  largest size with ratio < 1: " << report.largest_below << "\n";
    std::cout << "  smallest size with ratio > 1: " << report.smallest_above << "\n";
    return 0;
}

int cmd_summary(const std::string& csv_path) {
    std::cout << emit_summary(parse_csv_file(csv_path));
    return 0;
}

int cmd_proxy(int port, const std::string& spool) {
    Proxy proxy(spool);
    ProxyServer server(proxy, port);
    std::cout << "proxy listening on 127.0.0.1:" << server.port() << ", spool "
              << spool << std::endl;
    // serve until killed
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"circulate: workflow orchestration with decentralized data flow"};
    app.require_subcommand(1);

    std::string config_path, mode_override, case_override, out_path, csv_path,
        spool = "spool";
    bool print_trace = false, check = false, local = false;
    long long lo = 1000, hi = 10000000;
    double per_call = 5.0;
    int port = 0;

    auto* run = app.add_subcommand("run", "execute one scenario on the simulator");
    run->add_option("--config", config_path, "scenario JSON file")->required();
    run->add_option("--mode", mode_override, "centralized|circulate")
        ->check(CLI::IsMember({"centralized", "circulate"}));
    run->add_option("--case", case_override, "best|worst")
        ->check(CLI::IsMember({"best", "worst"}));
    run->add_flag("--trace", print_trace, "print the full event trace as JSON");

    auto* bench = app.add_subcommand("bench", "benchmark sweeps and reports");
    bench->require_subcommand(1);

    auto* bench_run = bench->add_subcommand(
        "run", "run experiment sweeps (the built-in reference suite by default)");
    bench_run->add_option("--config", config_path, "experiment JSON file");
    bench_run->add_option("--out", out_path, "write per-point results as CSV");
    bench_run->add_flag("--check", check,
                        "verify the ordering properties; nonzero exit on failure");

    auto* breakeven = bench->add_subcommand(
        "breakeven", "locate the payload size where circulate starts to win");
    breakeven->add_flag("--local", local, "engine on the LAN instead of the WAN");
    breakeven->add_option("--lo", lo, "scan lower bound, bytes");
    breakeven->add_option("--hi", hi, "scan upper bound, bytes");
    breakeven->add_option("--per-call", per_call, "proxy per-call overhead, ms");

    auto* summary = bench->add_subcommand("summary", "summarize a results CSV");
    summary->add_option("csv", csv_path, "CSV produced by bench run")->required();

    auto* proxy = app.add_subcommand("proxy", "serve a proxy on a TCP port");
    proxy->add_option("--listen", port, "port (0 = ephemeral, printed on start)");
    proxy->add_option("--spool", spool, "blob spool directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, mode_override, case_override, print_trace);
        if (bench_run->parsed()) return cmd_bench_run(config_path, out_path, check);
        if (breakeven->parsed()) return cmd_breakeven(local, lo, hi, per_call);
        if (summary->parsed()) return cmd_summary(csv_path);
        if (proxy->parsed()) return cmd_proxy(port, spool);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
