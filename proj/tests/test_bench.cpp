#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "circulate/bench.hpp"

using namespace circulate;

namespace {

bool within_rel(double actual, double expected, double tol = 1e-9) {
    double scale = std::max(1.0, std::fabs(expected));
    return std::fabs(actual - expected) <= tol * scale;
}

ExperimentConfig small_config(PatternFamily family, bool remote, Case kase) {
    ExperimentConfig c;
    c.family = family;
    c.remote = remote;
    c.kase = kase;
    c.count_min = 3;
    c.count_max = 7;
    c.count_step = 2;
    c.input_sizes = {1000000, 2000000};
    c.repetitions = 2;
    return c;
}

}  // namespace

TEST_CASE("statistics on a fixed 5-sample list match hand-computed values") {
    // samples chosen so mean and variance are exact decimals:
    // mean = 1.3, sum of squared deviations = 0.10, sample variance = 0.025
    std::vector<double> samples = {1.2, 1.5, 1.1, 1.4, 1.3};
    SampleStats st = compute_stats(samples);
    CHECK(within_rel(st.mean, 1.3));
    CHECK(within_rel(st.std_dev, std::sqrt(0.025)));
    const double half_normal = 2.576 * std::sqrt(0.025 / 5.0);
    CHECK(within_rel(st.ci99_low, 1.3 - half_normal));
    CHECK(within_rel(st.ci99_high, 1.3 + half_normal));
    CHECK(st.min == 1.1);
    CHECK(st.max == 1.5);

    // Student-t flag: 99% two-sided quantile at 4 degrees of freedom
    SampleStats t = compute_stats(samples, true);
    const double half_t = 4.604 * std::sqrt(0.025 / 5.0);
    CHECK(within_rel(t.ci99_low, 1.3 - half_t));
    CHECK(within_rel(t.ci99_high, 1.3 + half_t));
    CHECK(half_t > half_normal);
}

TEST_CASE("degenerate statistics") {
    CHECK(compute_stats({}).mean == 0.0);
    SampleStats one = compute_stats({2.5});
    CHECK(one.mean == 2.5);
    CHECK(one.std_dev == 0.0);
    CHECK(one.ci99_low == 2.5);
    CHECK(one.ci99_high == 2.5);
}

TEST_CASE("deterministic repetitions give zero deviation and zero CI width") {
    ExperimentConfig c = small_config(PatternFamily::Sequence, true, Case::Worst);
    StatsTable table = run_experiment(c);
    REQUIRE(table.rows.size() == 6);  // counts {3,5,7} x 2 sizes
    for (const StatsRow& r : table.rows) {
        CHECK(r.error.empty());
        CHECK(r.ratio_std_dev == 0.0);
        CHECK(r.ci99_low == r.ci99_high);
        CHECK(r.min_ratio == r.max_ratio);
        CHECK(r.speedup_ratio > 0.0);
        CHECK(within_rel(r.speedup_ratio, r.mean_vanilla_ms / r.mean_circulate_ms));
    }
}

TEST_CASE("experiment config validation") {
    ExperimentConfig c = small_config(PatternFamily::Sequence, true, Case::Worst);
    c.repetitions = 1;
    CHECK_THROWS(run_experiment(c));
    c.repetitions = 2;
    c.input_sizes.clear();
    CHECK_THROWS(run_experiment(c));
    CHECK_THROWS(bench_scenario(PatternFamily::FanIn, 2, 1000));
    CHECK_THROWS(bench_scenario(PatternFamily::FanOut, 2, 1000));
    CHECK_THROWS(bench_scenario(PatternFamily::Sequence, 0, 1000));
}

TEST_CASE("failed sweep points annotate the row and the sweep continues") {
    ExperimentConfig c = small_config(PatternFamily::FanIn, true, Case::Best);
    c.count_min = 2;  // fan-in needs >= 3 services, so count 2 must fail
    c.count_max = 4;
    c.count_step = 1;
    StatsTable table = run_experiment(c);
    REQUIRE(table.rows.size() == 6);
    CHECK(!table.rows[0].error.empty());
    CHECK(!table.rows[1].error.empty());
    for (std::size_t i = 2; i < table.rows.size(); ++i)
        CHECK(table.rows[i].error.empty());
}

TEST_CASE("empty table emits a header-only CSV") {
    std::string csv = csv_string(StatsTable{});
    CHECK(csv.find("family,locality,case") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
    std::istringstream in(csv);
    CHECK(parse_csv(in).rows.empty());
}

TEST_CASE("CSV round-trips losslessly") {
    ExperimentConfig c = small_config(PatternFamily::FanOut, false, Case::Best);
    StatsTable table = run_experiment(c);
    std::istringstream in(csv_string(table));
    StatsTable back = parse_csv(in);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const StatsRow& a = table.rows[i];
        const StatsRow& b = back.rows[i];
        CHECK(a.family == b.family);
        CHECK(a.remote == b.remote);
        CHECK(a.kase == b.kase);
        CHECK(a.service_count == b.service_count);
        CHECK(a.input_bytes == b.input_bytes);
        CHECK(a.mean_vanilla_ms == b.mean_vanilla_ms);  // %.17g is exact
        CHECK(a.mean_circulate_ms == b.mean_circulate_ms);
        CHECK(a.speedup_ratio == b.speedup_ratio);
        CHECK(a.error == b.error);
    }
    std::istringstream bad("not,a,csv\n");
    CHECK_THROWS(parse_csv(bad));
}

TEST_CASE("summary renders one row per sub-experiment") {
    StatsTable table;
    for (PatternFamily f : {PatternFamily::Sequence, PatternFamily::FanIn,
                            PatternFamily::FanOut, PatternFamily::EndToEnd})
        for (bool remote : {true, false})
            for (Case kase : {Case::Best, Case::Worst})
                for (int pt = 0; pt < 2; ++pt) {
                    StatsRow r;
                    r.family = f;
                    r.remote = remote;
                    r.kase = kase;
                    r.service_count = 3 + pt;
                    r.speedup_ratio = 2.0 + pt;
                    table.rows.push_back(r);
                }
    auto rows = summarize(table);
    CHECK(rows.size() == 16);
    for (const SummaryRow& s : rows) {
        CHECK(s.points == 2);
        CHECK(s.mean == doctest::Approx(2.5));
    }
    std::string text = emit_summary(table);
    CHECK(std::count(text.begin(), text.end(), '\n') == 17);  // header + 16 rows
    CHECK(text.find("2.50") != std::string::npos);
}

TEST_CASE("experiment config json round-trip") {
    ExperimentConfig c = small_config(PatternFamily::FanIn, false, Case::Best);
    c.seed = 42;
    c.student_t = true;
    c.overhead.per_call_ms = 7.5;
    ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(c));
    CHECK(back.family == c.family);
    CHECK(back.remote == c.remote);
    CHECK(back.kase == c.kase);
    CHECK(back.count_min == c.count_min);
    CHECK(back.count_max == c.count_max);
    CHECK(back.input_sizes == c.input_sizes);
    CHECK(back.seed == 42);
    CHECK(back.student_t);
    CHECK(back.overhead.per_call_ms == 7.5);
}

TEST_CASE("break-even scan finds a crossover between 10 KB and 1 MB") {
    BreakEvenConfig config;
    BreakEvenReport report = break_even_scan(config, 1000, 10000000);
    REQUIRE(report.found);
    CHECK(report.crossover >= 10000);
    CHECK(report.crossover <= 1000000);
    // the crossover is exactly where the single-invocation ratio crosses 1:
    // the bisection result agrees with direct evaluation on either side
    CHECK(single_invocation_ratio(config, report.crossover) >= 1.0);
    CHECK(single_invocation_ratio(config, report.crossover - 1) < 1.0);
    CHECK(single_invocation_ratio(config, report.crossover / 4) < 1.0);
    CHECK(single_invocation_ratio(config, report.crossover * 4) > 1.0);
    CHECK(report.largest_below < report.smallest_above);
}

TEST_CASE("zero proxy overhead leaves no sub-unity region") {
    BreakEvenConfig config;
    config.overhead = OverheadModel{0.0, 0};
    BreakEvenReport report = break_even_scan(config, 1000, 10000000);
    CHECK(report.all_geq_one);
    CHECK(!report.found);
    CHECK(single_invocation_ratio(config, 1000) >= 1.0);
    CHECK(single_invocation_ratio(config, 10000000) >= 1.0);
}

TEST_CASE("reference suite satisfies the ordering properties and ratio bands") {
    StatsTable table;
    for (const ExperimentConfig& c : reference_configs()) {
        StatsTable part = run_experiment(c);
        table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
    }
    for (const StatsRow& r : table.rows) CHECK(r.error.empty());

    double e2e = end_to_end_ratio(true, Case::Worst, reference_e2e_input());
    OrderingCheck check = check_orderings(table, e2e);
    for (const std::string& f : check.failures) MESSAGE(f);
    CHECK(check.ok());

    double max_isolated = 0.0;
    for (const SummaryRow& s : summarize(table)) {
        if (s.remote) {
            CHECK(s.mean >= 1.5);
            CHECK(s.mean <= 5.0);
            max_isolated = std::max(max_isolated, s.mean);
        } else {
            CHECK(s.mean >= 1.0);
            CHECK(s.mean <= 3.0);
        }
        if (s.family == PatternFamily::Sequence && s.remote && s.kase == Case::Worst) {
            CHECK(s.mean >= 1.5);
            CHECK(s.mean <= 3.0);
        }
    }
    CHECK(e2e > 1.5 * max_isolated);
}

TEST_CASE("speedup ratio is mildly size-sensitive at large payloads") {
    // well above the ~600 KB break-even, a 10x payload increase moves the
    // ratio by less than 20%
    for (PatternFamily f : {PatternFamily::Sequence, PatternFamily::FanIn,
                            PatternFamily::FanOut}) {
        ExperimentConfig c = small_config(f, true, Case::Worst);
        c.count_min = c.count_max = 9;
        c.count_step = 1;
        c.input_sizes = {50000000, 500000000};
        StatsTable table = run_experiment(c);
        REQUIRE(table.rows.size() == 2);
        double a = table.rows[0].speedup_ratio;
        double b = table.rows[1].speedup_ratio;
        CHECK(std::fabs(b - a) / a < 0.20);
    }
}

TEST_CASE("raw differential performance scales monotonically with payload size") {
    ExperimentConfig c = small_config(PatternFamily::Sequence, true, Case::Worst);
    c.count_min = c.count_max = 5;
    c.count_step = 1;
    c.input_sizes = {1000000, 2000000, 5000000, 10000000, 20000000, 50000000};
    StatsTable table = run_experiment(c);
    REQUIRE(table.rows.size() == 6);
    double prev = -1.0;
    for (const StatsRow& r : table.rows) {
        double diff = r.mean_vanilla_ms - r.mean_circulate_ms;
        CHECK(diff > prev);
        prev = diff;
    }
}

TEST_CASE("bench topology presets") {
    Topology remote = bench_topology(true, 3);
    Topology local = bench_topology(false, 3);
    CHECK(remote.link("engine", "host0").link_class == LinkClass::Wan);
    CHECK(local.link("engine", "host0").link_class == LinkClass::Lan);
    CHECK(remote.link("host0", "host2").link_class == LinkClass::Lan);
    CHECK(remote.link("engine", "host0").latency_ms == 50.0);
    CHECK(remote.link("engine", "host0").bandwidth_bytes_per_ms == 10000.0);
    CHECK(local.link("host1", "host2").latency_ms == 1.0);
    CHECK(local.link("host1", "host2").bandwidth_bytes_per_ms == 100000.0);
}
