#include "circulate/plan.hpp"

#include <map>
#include <set>

namespace circulate {

StagePlan lower(const WorkflowPattern& pattern) {
    StagePlan plan;
    plan.initial_input_bytes = pattern.initial_input_bytes;
    switch (pattern.kind) {
        case PatternKind::Sequence: {
            for (std::size_t i = 0; i < pattern.sequence.size(); ++i) {
                Stage st;
                st.service = pattern.sequence[i];
                st.inputs.push_back(i == 0 ? kInitialInput : static_cast<int>(i) - 1);
                plan.stages.push_back(std::move(st));
            }
            plan.initial_consumed = !pattern.sequence.empty();
            if (!plan.stages.empty())
                plan.finals.push_back(static_cast<int>(plan.stages.size()) - 1);
            break;
        }
        case PatternKind::FanIn: {
            std::vector<int> produced;
            for (const auto& src : pattern.sources) {
                Stage st;
                st.service = src;
                st.generator = true;
                produced.push_back(static_cast<int>(plan.stages.size()));
                plan.stages.push_back(std::move(st));
            }
            Stage sink;
            sink.service = pattern.sink;
            sink.inputs = produced;
            plan.finals.push_back(static_cast<int>(plan.stages.size()));
            plan.stages.push_back(std::move(sink));
            break;
        }
        case PatternKind::FanOut: {
            Stage src;
            src.service = pattern.source;
            src.generator = true;
            plan.stages.push_back(std::move(src));
            for (const auto& snk : pattern.sinks) {
                Stage st;
                st.service = snk;
                st.inputs.push_back(0);
                plan.finals.push_back(static_cast<int>(plan.stages.size()));
                plan.stages.push_back(std::move(st));
            }
            break;
        }
        case PatternKind::Composite: {
            for (const auto& cs : pattern.stages) {
                Stage st;
                st.service = cs.service;
                st.inputs = cs.inputs;
                st.generator = cs.inputs.empty();
                for (int in : cs.inputs)
                    if (in == kInitialInput) plan.initial_consumed = true;
                plan.stages.push_back(std::move(st));
            }
            plan.finals = pattern.final_stages;
            if (plan.finals.empty() && !plan.stages.empty())
                plan.finals.push_back(static_cast<int>(plan.stages.size()) - 1);
            break;
        }
    }
    return plan;
}

StageSizes stage_sizes(const StagePlan& plan, const Registry& registry) {
    StageSizes sz;
    sz.outputs.resize(plan.stages.size(), 0);
    sz.input_totals.resize(plan.stages.size(), 0);
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        const Stage& st = plan.stages[i];
        Bytes total = 0;
        if (st.generator) {
            total = plan.initial_input_bytes;
        } else {
            for (int in : st.inputs)
                total += in == kInitialInput ? plan.initial_input_bytes
                                             : sz.outputs[in];
        }
        const ServiceSpec* svc = find_service(registry, st.service.service_id);
        if (!svc)
            throw std::runtime_error("unknown service '" + st.service.service_id + "'");
        const OperationSpec* op = svc->find_op(st.service.op);
        if (!op)
            throw std::runtime_error("unknown operation '" + st.service.op +
                                     "' on service '" + st.service.service_id + "'");
        sz.input_totals[i] = st.generator ? 0 : total;
        sz.outputs[i] = op->transform.output_size(total);
    }
    for (int f : plan.finals) sz.final_bytes += sz.outputs[f];
    return sz;
}

namespace {

void check_ref(const ServiceRef& ref, const Registry& registry,
               const std::string& where, std::vector<std::string>& out) {
    const ServiceSpec* svc = find_service(registry, ref.service_id);
    if (!svc) {
        out.push_back(where + ": unknown service \"" + ref.service_id + "\"");
        return;
    }
    if (!svc->find_op(ref.op))
        out.push_back(where + ": service \"" + ref.service_id +
                      "\" has no operation \"" + ref.op + "\"");
}

}  // namespace

ValidationResult validate_pattern(const WorkflowPattern& pattern,
                                  const Registry& registry) {
    ValidationResult r;
    if (pattern.initial_input_bytes < 0)
        r.violations.push_back("initial_input_bytes must be non-negative");
    switch (pattern.kind) {
        case PatternKind::Sequence:
            if (pattern.sequence.empty())
                r.violations.push_back("Sequence requires >=1 service");
            for (std::size_t i = 0; i < pattern.sequence.size(); ++i)
                check_ref(pattern.sequence[i], registry,
                          "sequence stage " + std::to_string(i), r.violations);
            break;
        case PatternKind::FanIn:
            if (pattern.sources.size() < 2)
                r.violations.push_back("FanIn requires >=2 sources");
            for (std::size_t i = 0; i < pattern.sources.size(); ++i)
                check_ref(pattern.sources[i], registry,
                          "fan-in source " + std::to_string(i), r.violations);
            check_ref(pattern.sink, registry, "fan-in sink", r.violations);
            break;
        case PatternKind::FanOut:
            if (pattern.sinks.size() < 2)
                r.violations.push_back("FanOut requires >=2 sinks");
            check_ref(pattern.source, registry, "fan-out source", r.violations);
            for (std::size_t i = 0; i < pattern.sinks.size(); ++i)
                check_ref(pattern.sinks[i], registry,
                          "fan-out sink " + std::to_string(i), r.violations);
            break;
        case PatternKind::Composite: {
            for (std::size_t i = 0; i < pattern.stages.size(); ++i) {
                const auto& cs = pattern.stages[i];
                std::string where = "composite stage " + std::to_string(i);
                check_ref(cs.service, registry, where, r.violations);
                for (int in : cs.inputs) {
                    // acyclic by construction: inputs must come from earlier stages
                    if (in != kInitialInput &&
                        (in < 0 || in >= static_cast<int>(i)))
                        r.violations.push_back(
                            where + ": input " + std::to_string(in) +
                            " is not an earlier stage or the initial input");
                }
            }
            for (int f : pattern.final_stages)
                if (f < 0 || f >= static_cast<int>(pattern.stages.size()))
                    r.violations.push_back("final stage index " +
                                           std::to_string(f) + " out of range");
            break;
        }
    }
    return r;
}

TransferAccounting expected_transfer(const WorkflowPattern& pattern,
                                     Mode mode,
                                     const Topology& topology,
                                     Case kase,
                                     const Registry& registry) {
    StagePlan plan = lower(pattern);
    StageSizes sz = stage_sizes(plan, registry);
    TransferAccounting acc;

    if (mode == Mode::Centralized) {
        // Every stage: request carries the inputs, response carries the output.
        for (std::size_t i = 0; i < plan.stages.size(); ++i) {
            const std::string& host =
                topology.node_of_service(plan.stages[i].service.service_id);
            LinkClass cls = topology.link(topology.engine_node, host).link_class;
            acc.record(cls, sz.input_totals[i]);
            acc.record(cls, sz.outputs[i]);
        }
        return acc;
    }

    // Circulate: payloads move proxy-to-proxy; the engine exchanges refs.
    // home[i] = proxy holding stage i's output; initial payload uploaded once
    // to the first consumer's proxy.
    std::vector<std::string> home(plan.stages.size());
    std::string initial_home;
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        const Stage& st = plan.stages[i];
        const std::string& proxy = topology.proxy_for(st.service.service_id);
        const std::string& pnode = topology.node_of_proxy(proxy);
        const std::string& snode = topology.node_of_service(st.service.service_id);

        if (!st.generator) {
            // Deliver inputs not already at this proxy, batched per source proxy.
            std::map<std::string, Bytes> batches;  // source proxy -> bytes
            for (int in : st.inputs) {
                if (in == kInitialInput) {
                    if (initial_home.empty()) {
                        // engine uploads the initial payload
                        LinkClass cls =
                            topology.link(topology.engine_node, pnode).link_class;
                        acc.record(cls, plan.initial_input_bytes);
                        initial_home = proxy;
                    } else if (initial_home != proxy) {
                        batches[initial_home] += plan.initial_input_bytes;
                    }
                } else if (home[in] != proxy) {
                    batches[home[in]] += sz.outputs[in];
                }
            }
            for (const auto& [src_proxy, n] : batches) {
                LinkClass cls =
                    topology.link(topology.node_of_proxy(src_proxy), pnode).link_class;
                acc.record(cls, n);
            }
        }
        // proxy <-> service round trip
        LinkClass svc_cls = topology.link(pnode, snode).link_class;
        acc.record(svc_cls, sz.input_totals[i]);
        acc.record(svc_cls, sz.outputs[i]);
        home[i] = proxy;
    }
    if (kase == Case::Worst) {
        for (int f : plan.finals) {
            const std::string& pnode = topology.node_of_proxy(home[f]);
            LinkClass cls = topology.link(pnode, topology.engine_node).link_class;
            acc.record(cls, sz.outputs[f]);
        }
    }
    return acc;
}

}  // namespace circulate
