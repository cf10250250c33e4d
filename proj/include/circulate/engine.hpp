#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "circulate/plan.hpp"
#include "circulate/services.hpp"
#include "circulate/sim.hpp"
#include "circulate/types.hpp"

namespace circulate {

using BehaviorMap = std::map<std::string, ServiceBehavior>;

inline Registry registry_of(const BehaviorMap& behaviors) {
    Registry reg;
    for (const auto& [id, b] : behaviors) reg.push_back(b.spec);
    return reg;
}

/// Full record of one workflow execution.
struct RunTrace {
    std::vector<TraceEvent> events;
    TransferAccounting per_class_bytes;
    double elapsed_ms = 0.0;
    Bytes final_size = 0;
    std::optional<std::uint64_t> final_hash;  // set when payloads materialize
    std::optional<Blob> final_payload;
};

struct SimOptions {
    OverheadModel overhead;
    std::uint64_t seed = 0;
    double jitter = 0.0;        // 0 => fully deterministic
    bool materialize = false;   // generate payload bytes and hash the result
};

/// Execute the pattern on the deterministic simulated network. Sequence runs
/// serially; fan branches dispatch in parallel and join; circulate mode
/// performs invoke -> deliver -> invoke chains with the engine exchanging
/// only references, and the worst case returns the final result to the
/// engine. Branch failures abort the run (fail-fast).
RunTrace run_simulated(const WorkflowPattern& pattern, Mode mode, Case kase,
                       const Topology& topology, const BehaviorMap& behaviors,
                       const SimOptions& options = {});

/// The fixed end-to-end composite: fan-in over three sources, a 20% filter,
/// fan-out to three identity services, concatenation, then two sequential
/// 50% reductions.
WorkflowPattern end_to_end_pattern(Bytes input_bytes);

/// Behaviors and a topology for the end-to-end composite (one host per
/// service, proxies colocated).
BehaviorMap end_to_end_behaviors();

RunTrace run_end_to_end(Bytes input_bytes, const Topology& topology, Mode mode,
                        Case kase, const SimOptions& options = {});

// --- socket transport -------------------------------------------------------

/// Where each proxy listens. Services execute inside their proxy's server.
struct ProxyEndpoint {
    std::string host;
    int port = 0;
};

/// Execute the pattern against live proxy servers over the wire protocol.
/// Timing is wall-clock; per-class byte accounting matches the simulated
/// transport for the same scenario.
RunTrace run_socket(const WorkflowPattern& pattern, Mode mode, Case kase,
                    const Topology& topology, const Registry& registry,
                    const std::map<std::string, ProxyEndpoint>& endpoints);

}  // namespace circulate
