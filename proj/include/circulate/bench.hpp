#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "circulate/engine.hpp"

namespace circulate {

enum class PatternFamily { Sequence, FanIn, FanOut, EndToEnd };

const char* to_string(PatternFamily f);
PatternFamily family_from_string(const std::string& s);

/// Engine plus one host per service; proxies colocated with their services.
/// Hosts interconnect over the LAN; the engine joins over the WAN (remote
/// preset) or the same LAN (local preset).
Topology bench_topology(bool remote, int n_hosts);

/// A ready-to-run benchmark scenario for one (family, count, size) point.
struct BenchScenario {
    WorkflowPattern pattern;
    BehaviorMap behaviors;
    Topology topology;
};

BenchScenario bench_scenario(PatternFamily family, int service_count, Bytes input);

struct ExperimentConfig {
    PatternFamily family = PatternFamily::Sequence;
    bool remote = true;
    Case kase = Case::Worst;
    int count_min = 3;
    int count_max = 17;
    int count_step = 1;
    std::vector<Bytes> input_sizes;
    int repetitions = 100;
    std::uint64_t seed = 0;
    double jitter = 0.0;  // 0 keeps the simulator fully deterministic
    OverheadModel overhead{5.0, 64};
    bool student_t = false;  // Student-t 99% CI instead of normal approximation
};

struct SampleStats {
    double mean = 0.0;
    double std_dev = 0.0;  // sample standard deviation (n-1)
    double ci99_low = 0.0;
    double ci99_high = 0.0;
    double min = 0.0;
    double max = 0.0;
};

SampleStats compute_stats(const std::vector<double>& samples, bool student_t = false);

/// One config point: a matched vanilla/circulate repetition series.
struct StatsRow {
    PatternFamily family = PatternFamily::Sequence;
    bool remote = true;
    Case kase = Case::Worst;
    int service_count = 0;
    Bytes input_bytes = 0;
    int repetitions = 0;
    double mean_vanilla_ms = 0.0;
    double mean_circulate_ms = 0.0;
    double speedup_ratio = 0.0;  // mean vanilla / mean circulate
    double ratio_std_dev = 0.0;  // statistics of the per-repetition ratio series
    double ci99_low = 0.0;
    double ci99_high = 0.0;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::string error;  // non-empty if this point failed; sweep continues
};

struct StatsTable {
    std::vector<StatsRow> rows;
};

StatsTable run_experiment(const ExperimentConfig& config);

/// Table-I style aggregate: one row per (family, locality, case), averaging
/// the per-point speedup ratios.
struct SummaryRow {
    PatternFamily family;
    bool remote;
    Case kase;
    double mean = 0.0;
    double std_dev = 0.0;
    double min = 0.0;
    double max = 0.0;
    int points = 0;
};

std::vector<SummaryRow> summarize(const StatsTable& table);

std::string csv_string(const StatsTable& table);
void emit_csv(const StatsTable& table, const std::string& path);
StatsTable parse_csv(std::istream& in);
StatsTable parse_csv_file(const std::string& path);

/// Human-readable Table-I style summary (Pattern, Config, Mean, Std Dev,
/// Min, Max), rounded to 2 decimals.
std::string emit_summary(const StatsTable& table);

struct OrderingCheck {
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// The five Table-I ordering properties over aggregate ratios, plus the
/// end-to-end comparison. `table` must cover the three isolated families in
/// all four locality/case sub-experiments.
OrderingCheck check_orderings(const StatsTable& table, double e2e_remote_worst_ratio);

// --- break-even -------------------------------------------------------------

struct BreakEvenConfig {
    bool remote = true;
    OverheadModel overhead{5.0, 64};
    std::uint64_t seed = 0;
};

struct BreakEvenReport {
    bool found = false;
    bool all_geq_one = false;  // zero-overhead regime: no sub-unity region
    Bytes largest_below = 0;   // largest scanned size with ratio < 1
    Bytes smallest_above = 0;  // smallest scanned size with ratio > 1
    Bytes crossover = 0;       // bisection estimate of the ratio = 1 point
};

/// Single identity invocation, circulate best case vs vanilla, scanned over
/// payload sizes in [lo, hi].
BreakEvenReport break_even_scan(const BreakEvenConfig& config, Bytes lo, Bytes hi);

/// ratio = vanilla elapsed / circulate best-case elapsed for one identity
/// invocation of `size` bytes.
double single_invocation_ratio(const BreakEvenConfig& config, Bytes size);

// --- calibrated reference suite ---------------------------------------------

/// The shipped calibration: per-(family, locality) sweeps whose aggregate
/// ratios satisfy the documented acceptance bands on this machine-independent
/// simulator. Sizes are artifact parameters chosen per family and locality.
std::vector<ExperimentConfig> reference_configs();
Bytes reference_e2e_input();
double end_to_end_ratio(bool remote, Case kase, Bytes input,
                        const OverheadModel& overhead = {5.0, 64});

nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

}  // namespace circulate
