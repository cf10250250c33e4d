#pragma once

#include <string>
#include <vector>

#include "circulate/types.hpp"

namespace circulate {

/// A pattern lowered to a flat stage list. Stages with no inputs are
/// generator stages: they receive the initial input size as a control-plane
/// hint and produce transform(hint) bytes without any data transfer in.
struct Stage {
    ServiceRef service;
    std::vector<int> inputs;  // stage indices, or kInitialInput
    bool generator = false;
};

struct StagePlan {
    std::vector<Stage> stages;
    std::vector<int> finals;  // stages whose outputs form the final result
    Bytes initial_input_bytes = 0;
    bool initial_consumed = false;  // any stage reads the initial payload
};

/// Lower any pattern variant to a stage plan. FanIn/FanOut sources take the
/// initial size as a hint; Sequence and Composite consume the payload itself.
StagePlan lower(const WorkflowPattern& pattern);

/// Output size of every stage plus the final result size (finals concatenated).
struct StageSizes {
    std::vector<Bytes> outputs;
    std::vector<Bytes> input_totals;
    Bytes final_bytes = 0;
};

StageSizes stage_sizes(const StagePlan& plan, const Registry& registry);

struct ValidationResult {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Structural and registry checks; violations are returned, never thrown.
ValidationResult validate_pattern(const WorkflowPattern& pattern,
                                  const Registry& registry);

/// Analytic per-link-class byte totals for an idealized execution.
/// In circulate mode the worst case adds the final result's transfer from
/// its home proxy to the engine; centralized ignores the case.
TransferAccounting expected_transfer(const WorkflowPattern& pattern,
                                     Mode mode,
                                     const Topology& topology,
                                     Case kase,
                                     const Registry& registry);

}  // namespace circulate
