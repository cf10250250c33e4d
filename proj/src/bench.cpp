#include "circulate/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace circulate {

const char* to_string(PatternFamily f) {
    switch (f) {
        case PatternFamily::Sequence: return "sequence";
        case PatternFamily::FanIn: return "fan_in";
        case PatternFamily::FanOut: return "fan_out";
        case PatternFamily::EndToEnd: return "end_to_end";
    }
    return "?";
}

PatternFamily family_from_string(const std::string& s) {
    if (s == "sequence") return PatternFamily::Sequence;
    if (s == "fan_in") return PatternFamily::FanIn;
    if (s == "fan_out") return PatternFamily::FanOut;
    if (s == "end_to_end") return PatternFamily::EndToEnd;
    throw std::runtime_error("unknown pattern family '" + s + "'");
}

Topology bench_topology(bool remote, int n_hosts) {
    Topology t;
    t.engine_node = "engine";
    t.nodes.emplace_back("engine", NodeRole::Engine);
    LinkModel wan{50.0, 10000.0, 0.0, LinkClass::Wan};
    LinkModel lan{1.0, 100000.0, 0.0, LinkClass::Lan};
    for (int i = 0; i < n_hosts; ++i) {
        std::string host = "host" + std::to_string(i);
        t.nodes.emplace_back(host, NodeRole::ServiceHost);
        t.add_link("engine", host, remote ? wan : lan);
        for (int j = 0; j < i; ++j) t.add_link("host" + std::to_string(j), host, lan);
    }
    return t;
}

namespace {

void place(BenchScenario& s, const std::string& service_id, int host_index) {
    std::string host = "host" + std::to_string(host_index);
    std::string proxy = "proxy" + std::to_string(host_index);
    s.topology.service_nodes[service_id] = host;
    s.topology.proxy_nodes[proxy] = host;
    s.topology.proxy_of[service_id] = proxy;
}

ServiceBehavior make_behavior(const std::string& id, const std::string& op,
                              int arity, TransformSpec t) {
    ServiceBehavior b;
    b.spec.service_id = id;
    b.spec.operations.push_back({op, arity, t});
    return b;
}

}  // namespace

BenchScenario bench_scenario(PatternFamily family, int service_count, Bytes input) {
    if (service_count < 1) throw std::invalid_argument("service_count must be >= 1");
    BenchScenario s;
    s.pattern.initial_input_bytes = input;

    switch (family) {
        case PatternFamily::Sequence: {
            s.topology = bench_topology(true, service_count);
            s.pattern.kind = PatternKind::Sequence;
            for (int i = 0; i < service_count; ++i) {
                std::string id = "seq" + std::to_string(i);
                s.behaviors[id] =
                    make_behavior(id, "grow", 1, TransformSpec::ratio(6, 5));
                s.pattern.sequence.push_back({id, "grow"});
                place(s, id, i);
            }
            break;
        }
        case PatternFamily::FanIn: {
            if (service_count < 3)
                throw std::invalid_argument("fan-in needs >= 3 services");
            s.topology = bench_topology(true, service_count);
            s.pattern.kind = PatternKind::FanIn;
            for (int i = 0; i < service_count - 1; ++i) {
                std::string id = "src" + std::to_string(i);
                s.behaviors[id] =
                    make_behavior(id, "produce", 0, TransformSpec::identity());
                s.pattern.sources.push_back({id, "produce"});
                place(s, id, i);
            }
            s.behaviors["sink0"] = make_behavior("sink0", "compose", -1,
                                                 TransformSpec::ratio_of_concat(1, 5));
            s.pattern.sink = {"sink0", "compose"};
            place(s, "sink0", service_count - 1);
            break;
        }
        case PatternFamily::FanOut: {
            if (service_count < 3)
                throw std::invalid_argument("fan-out needs >= 3 services");
            s.topology = bench_topology(true, service_count);
            s.pattern.kind = PatternKind::FanOut;
            s.behaviors["src0"] =
                make_behavior("src0", "produce", 0, TransformSpec::identity());
            s.pattern.source = {"src0", "produce"};
            place(s, "src0", 0);
            for (int i = 1; i < service_count; ++i) {
                std::string id = "snk" + std::to_string(i - 1);
                // a thin filter: small result sizes keep the decentralized
                // delivery cost below the centralized distribution cost at
                // every branch count
                s.behaviors[id] =
                    make_behavior(id, "filter", 1, TransformSpec::ratio(1, 20));
                s.pattern.sinks.push_back({id, "filter"});
                place(s, id, i);
            }
            break;
        }
        case PatternFamily::EndToEnd: {
            s.pattern = end_to_end_pattern(input);
            s.behaviors = end_to_end_behaviors();
            s.topology = bench_topology(true, static_cast<int>(s.behaviors.size()));
            int idx = 0;
            for (const auto& [id, b] : s.behaviors) place(s, id, idx++);
            break;
        }
    }
    return s;
}

// --- statistics --------------------------------------------------------------

namespace {

double t99_quantile(int df) {
    // two-sided 99% Student-t critical values; df > 30 ~ normal
    static const double table[30] = {
        63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499, 3.355, 3.250, 3.169,
        3.106,  3.055, 3.012, 2.977, 2.947, 2.921, 2.898, 2.878, 2.861, 2.845,
        2.831,  2.819, 2.807, 2.797, 2.787, 2.779, 2.771, 2.763, 2.756, 2.750};
    if (df < 1) return 0.0;
    if (df <= 30) return table[df - 1];
    return 2.576;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

SampleStats compute_stats(const std::vector<double>& samples, bool student_t) {
    SampleStats st;
    if (samples.empty()) return st;
    double sum = 0.0;
    st.min = samples[0];
    st.max = samples[0];
    for (double x : samples) {
        sum += x;
        st.min = std::min(st.min, x);
        st.max = std::max(st.max, x);
    }
    const double n = static_cast<double>(samples.size());
    st.mean = sum / n;
    if (samples.size() >= 2) {
        double ss = 0.0;
        for (double x : samples) ss += (x - st.mean) * (x - st.mean);
        st.std_dev = std::sqrt(ss / (n - 1.0));
    }
    double q = student_t ? t99_quantile(static_cast<int>(samples.size()) - 1) : 2.576;
    double half = samples.size() >= 2 ? q * st.std_dev / std::sqrt(n) : 0.0;
    st.ci99_low = st.mean - half;
    st.ci99_high = st.mean + half;
    return st;
}

// --- experiment sweep --------------------------------------------------------

StatsTable run_experiment(const ExperimentConfig& config) {
    if (config.repetitions < 2)
        throw std::invalid_argument("repetitions must be >= 2");
    if (config.input_sizes.empty())
        throw std::invalid_argument("input_sizes must not be empty");
    StatsTable table;
    for (int count = config.count_min; count <= config.count_max;
         count += config.count_step) {
        for (Bytes size : config.input_sizes) {
            StatsRow row;
            row.family = config.family;
            row.remote = config.remote;
            row.kase = config.kase;
            row.service_count = count;
            row.input_bytes = size;
            row.repetitions = config.repetitions;
            try {
                BenchScenario placed = bench_scenario(config.family, count, size);
                if (!config.remote) {
                    // rebuild links with the local engine preset, keep placements
                    Topology topo = bench_topology(
                        false, static_cast<int>(placed.behaviors.size()));
                    topo.service_nodes = placed.topology.service_nodes;
                    topo.proxy_nodes = placed.topology.proxy_nodes;
                    topo.proxy_of = placed.topology.proxy_of;
                    placed.topology = std::move(topo);
                }

                std::vector<double> ratios;
                double sum_v = 0.0, sum_c = 0.0;
                for (int r = 0; r < config.repetitions; ++r) {
                    SimOptions opt;
                    opt.overhead = config.overhead;
                    opt.jitter = config.jitter;
                    opt.seed = mix(config.seed,
                                   mix(static_cast<std::uint64_t>(count),
                                       mix(static_cast<std::uint64_t>(size),
                                           static_cast<std::uint64_t>(r))));
                    RunTrace vanilla =
                        run_simulated(placed.pattern, Mode::Centralized, config.kase,
                                      placed.topology, placed.behaviors, opt);
                    RunTrace circulate =
                        run_simulated(placed.pattern, Mode::Circulate, config.kase,
                                      placed.topology, placed.behaviors, opt);
                    sum_v += vanilla.elapsed_ms;
                    sum_c += circulate.elapsed_ms;
                    ratios.push_back(vanilla.elapsed_ms / circulate.elapsed_ms);
                }
                row.mean_vanilla_ms = sum_v / config.repetitions;
                row.mean_circulate_ms = sum_c / config.repetitions;
                row.speedup_ratio = row.mean_vanilla_ms / row.mean_circulate_ms;
                SampleStats st = compute_stats(ratios, config.student_t);
                row.ratio_std_dev = st.std_dev;
                row.ci99_low = st.ci99_low;
                row.ci99_high = st.ci99_high;
                row.min_ratio = st.min;
                row.max_ratio = st.max;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

std::vector<SummaryRow> summarize(const StatsTable& table) {
    std::map<std::tuple<PatternFamily, bool, Case>, std::vector<double>> buckets;
    for (const StatsRow& r : table.rows) {
        if (!r.error.empty()) continue;
        buckets[{r.family, r.remote, r.kase}].push_back(r.speedup_ratio);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, ratios] : buckets) {
        SampleStats st = compute_stats(ratios);
        SummaryRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key),
                       st.mean,           st.std_dev,       st.min,
                       st.max,            static_cast<int>(ratios.size())};
        out.push_back(row);
    }
    return out;
}

// --- CSV ---------------------------------------------------------------------

namespace {
constexpr const char* kCsvHeader =
    "family,locality,case,service_count,input_bytes,repetitions,"
    "mean_vanilla_ms,mean_circulate_ms,speedup_ratio,ratio_std_dev,"
    "ci99_low,ci99_high,min_ratio,max_ratio,error";
}

std::string csv_string(const StatsTable& table) {
    std::ostringstream out;
    out.precision(17);
    out << kCsvHeader << "\n";
    for (const StatsRow& r : table.rows) {
        out << to_string(r.family) << ',' << (r.remote ? "remote" : "local") << ','
            << to_string(r.kase) << ',' << r.service_count << ',' << r.input_bytes
            << ',' << r.repetitions << ',' << r.mean_vanilla_ms << ','
            << r.mean_circulate_ms << ',' << r.speedup_ratio << ','
            << r.ratio_std_dev << ',' << r.ci99_low << ',' << r.ci99_high << ','
            << r.min_ratio << ',' << r.max_ratio << ',' << r.error << "\n";
    }
    return out.str();
}

void emit_csv(const StatsTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV to " + path);
    out << csv_string(table);
    if (!out) throw std::runtime_error("write failure on " + path);
}

StatsTable parse_csv(std::istream& in) {
    StatsTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
    if (line != kCsvHeader) throw std::runtime_error("unrecognized CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        while (cells.size() < 15) cells.emplace_back();
        StatsRow r;
        r.family = family_from_string(cells[0]);
        r.remote = cells[1] == "remote";
        r.kase = cells[2] == "best" ? Case::Best : Case::Worst;
        r.service_count = std::stoi(cells[3]);
        r.input_bytes = std::stoll(cells[4]);
        r.repetitions = std::stoi(cells[5]);
        r.mean_vanilla_ms = std::stod(cells[6]);
        r.mean_circulate_ms = std::stod(cells[7]);
        r.speedup_ratio = std::stod(cells[8]);
        r.ratio_std_dev = std::stod(cells[9]);
        r.ci99_low = std::stod(cells[10]);
        r.ci99_high = std::stod(cells[11]);
        r.min_ratio = std::stod(cells[12]);
        r.max_ratio = std::stod(cells[13]);
        r.error = cells[14];
        table.rows.push_back(std::move(r));
    }
    return table;
}

StatsTable parse_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV " + path);
    return parse_csv(in);
}

std::string emit_summary(const StatsTable& table) {
    std::ostringstream out;
    out << "Pattern     Config     Mean   Std Dev  Min    Max\n";
    out.setf(std::ios::fixed);
    out.precision(2);
    for (const SummaryRow& s : summarize(table)) {
        std::string config =
            std::string(s.remote ? "Remote " : "Local ") +
            (s.kase == Case::Best ? "BC" : "WC");
        out << to_string(s.family);
        for (std::size_t i = std::string(to_string(s.family)).size(); i < 12; ++i)
            out << ' ';
        out << config;
        for (std::size_t i = config.size(); i < 11; ++i) out << ' ';
        out << s.mean << "   " << s.std_dev << "     " << s.min << "   " << s.max
            << "\n";
    }
    return out.str();
}

// --- orderings ---------------------------------------------------------------

OrderingCheck check_orderings(const StatsTable& table,
                              double e2e_remote_worst_ratio) {
    OrderingCheck check;
    std::map<std::tuple<PatternFamily, bool, Case>, double> agg;
    for (const SummaryRow& s : summarize(table))
        agg[{s.family, s.remote, s.kase}] = s.mean;

    auto get = [&](PatternFamily f, bool remote, Case c) {
        auto it = agg.find({f, remote, c});
        if (it == agg.end()) {
            check.failures.push_back(std::string("missing sub-experiment: ") +
                                     to_string(f) + (remote ? " remote " : " local ") +
                                     to_string(c));
            return 0.0;
        }
        return it->second;
    };

    const PatternFamily families[] = {PatternFamily::Sequence, PatternFamily::FanIn,
                                      PatternFamily::FanOut};
    double max_remote_best = 0.0;
    for (PatternFamily f : families) {
        double rb = get(f, true, Case::Best);
        double rw = get(f, true, Case::Worst);
        double lb = get(f, false, Case::Best);
        double lw = get(f, false, Case::Worst);
        max_remote_best = std::max(max_remote_best, rb);
        auto fail = [&](const std::string& what) {
            check.failures.push_back(std::string(to_string(f)) + ": " + what);
        };
        if (!(rb > rw)) fail("remote best <= remote worst");
        if (!(rw > 1.0)) fail("remote worst <= 1");
        if (!(lb > lw)) fail("local best <= local worst");
        if (!(rb > lb)) fail("remote best <= local best");
        if (!(rw > lw)) fail("remote worst <= local worst");
        if (!(rb >= std::max({rw, lb, lw}))) fail("remote best is not the upper bound");
        if (!(lw <= std::min({rb, rw, lb}))) fail("local worst is not the lower bound");
    }
    if (!(e2e_remote_worst_ratio > max_remote_best))
        check.failures.push_back("end-to-end remote worst does not exceed the best "
                                 "isolated ratio");
    return check;
}

// --- break-even --------------------------------------------------------------

double single_invocation_ratio(const BreakEvenConfig& config, Bytes size) {
    // one identity invocation of `size` bytes against a host with a colocated
    // proxy; direct invocation round-trips the payload, proxied invocation
    // ships the payload once (the request doubles as the invocation) and only
    // a reference comes back
    Topology topo = bench_topology(config.remote, 1);
    topo.proxy_nodes["proxy0"] = "host0";

    SimulatedNetwork direct(topo, config.overhead, config.seed);
    double t = direct.send("engine", "host0", MsgKind::Data, size, 0.0);
    t = direct.send("host0", "engine", MsgKind::Data, size, t);
    double vanilla = t;

    SimulatedNetwork proxied(topo, config.overhead, config.seed);
    t = proxied.send("engine", "host0", MsgKind::Data, size, 0.0);
    t = proxied.proxy_call("proxy0", t);  // persist input, invoke the service
    t = proxied.proxy_call("proxy0", t);  // persist the result
    t = proxied.send("host0", "engine", MsgKind::Control, proxied.control_bytes(1), t);
    double circulate = t;

    return vanilla / circulate;
}

BreakEvenReport break_even_scan(const BreakEvenConfig& config, Bytes lo, Bytes hi) {
    if (lo <= 0 || hi <= lo) throw std::invalid_argument("bad break-even range");
    BreakEvenReport report;
    // geometric scan
    bool any_below = false, any_above = false;
    for (Bytes size = lo; size <= hi;
         size = std::max(size + 1, size * 5 / 4)) {
        double r = single_invocation_ratio(config, size);
        if (r < 1.0) {
            any_below = true;
            report.largest_below = size;
        } else if (r > 1.0 && !any_above) {
            any_above = true;
            report.smallest_above = size;
        }
    }
    if (!any_below) {
        report.all_geq_one = true;
        return report;
    }
    if (!any_above) return report;  // no crossover in range
    report.found = true;
    // bisection refinement between the bracketing sizes
    Bytes below = report.largest_below, above = report.smallest_above;
    if (above < below) std::swap(below, above);
    while (above - below > 1) {
        Bytes mid = below + (above - below) / 2;
        if (single_invocation_ratio(config, mid) < 1.0)
            below = mid;
        else
            above = mid;
    }
    report.crossover = above;
    return report;
}

// --- reference suite ---------------------------------------------------------

namespace {

constexpr Bytes kKb = 1000;
constexpr Bytes kMbB = 1000000;

ExperimentConfig reference_config(PatternFamily family, bool remote, Case kase) {
    ExperimentConfig c;
    c.family = family;
    c.remote = remote;
    c.kase = kase;
    c.repetitions = 2;  // deterministic simulator: both runs identical
    c.count_step = 2;
    // sizes are calibration parameters per family and locality: small enough
    // to keep latency in play for the fan patterns, large enough that the
    // sequence pattern's WAN savings dominate
    switch (family) {
        case PatternFamily::Sequence:
            c.input_sizes = remote ? std::vector<Bytes>{kMbB, 2 * kMbB}
                                   : std::vector<Bytes>{5 * kMbB, 10 * kMbB};
            break;
        case PatternFamily::FanIn:
            c.input_sizes = remote ? std::vector<Bytes>{500 * kKb, kMbB}
                                   : std::vector<Bytes>{5 * kMbB, 10 * kMbB};
            break;
        case PatternFamily::FanOut:
            c.input_sizes = remote ? std::vector<Bytes>{2 * kMbB, 5 * kMbB}
                                   : std::vector<Bytes>{50 * kMbB, 100 * kMbB};
            break;
        case PatternFamily::EndToEnd:
            c.input_sizes = {reference_e2e_input()};
            break;
    }
    return c;
}

}  // namespace

std::vector<ExperimentConfig> reference_configs() {
    std::vector<ExperimentConfig> out;
    for (PatternFamily f :
         {PatternFamily::Sequence, PatternFamily::FanIn, PatternFamily::FanOut})
        for (bool remote : {true, false})
            for (Case c : {Case::Best, Case::Worst})
                out.push_back(reference_config(f, remote, c));
    return out;
}

Bytes reference_e2e_input() { return 50 * kMbB; }

double end_to_end_ratio(bool remote, Case kase, Bytes input,
                        const OverheadModel& overhead) {
    BenchScenario s = bench_scenario(PatternFamily::EndToEnd, 9, input);
    Topology topo = bench_topology(remote, static_cast<int>(s.behaviors.size()));
    topo.service_nodes = s.topology.service_nodes;
    topo.proxy_nodes = s.topology.proxy_nodes;
    topo.proxy_of = s.topology.proxy_of;
    SimOptions opt;
    opt.overhead = overhead;
    RunTrace vanilla = run_simulated(s.pattern, Mode::Centralized, kase, topo,
                                     s.behaviors, opt);
    RunTrace circulate =
        run_simulated(s.pattern, Mode::Circulate, kase, topo, s.behaviors, opt);
    return vanilla.elapsed_ms / circulate.elapsed_ms;
}

// --- config (de)serialization ------------------------------------------------

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
    return nlohmann::json{{"family", to_string(c.family)},
                          {"locality", c.remote ? "remote" : "local"},
                          {"case", to_string(c.kase)},
                          {"count_min", c.count_min},
                          {"count_max", c.count_max},
                          {"count_step", c.count_step},
                          {"input_sizes", c.input_sizes},
                          {"repetitions", c.repetitions},
                          {"seed", c.seed},
                          {"jitter", c.jitter},
                          {"per_call_ms", c.overhead.per_call_ms},
                          {"per_ref_bytes", c.overhead.per_ref_bytes},
                          {"student_t", c.student_t}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.family = family_from_string(j.at("family").get<std::string>());
    c.remote = j.value("locality", "remote") == std::string("remote");
    c.kase = j.value("case", "worst") == std::string("best") ? Case::Best : Case::Worst;
    c.count_min = j.value("count_min", 3);
    c.count_max = j.value("count_max", 17);
    c.count_step = j.value("count_step", 1);
    c.input_sizes = j.at("input_sizes").get<std::vector<Bytes>>();
    c.repetitions = j.value("repetitions", 100);
    c.seed = j.value("seed", 0ULL);
    c.jitter = j.value("jitter", 0.0);
    c.overhead.per_call_ms = j.value("per_call_ms", 5.0);
    c.overhead.per_ref_bytes = j.value("per_ref_bytes", Bytes{64});
    c.student_t = j.value("student_t", false);
    return c;
}

}  // namespace circulate
