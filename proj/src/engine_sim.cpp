#include <algorithm>
#include <stdexcept>

#include "circulate/engine.hpp"

namespace circulate {

namespace {

const ServiceBehavior& behavior_of(const BehaviorMap& behaviors,
                                   const std::string& id) {
    auto it = behaviors.find(id);
    if (it == behaviors.end())
        throw std::runtime_error("no behavior registered for service '" + id + "'");
    return it->second;
}

}  // namespace

RunTrace run_simulated(const WorkflowPattern& pattern, Mode mode, Case kase,
                       const Topology& topology, const BehaviorMap& behaviors,
                       const SimOptions& options) {
    Registry registry = registry_of(behaviors);
    ValidationResult valid = validate_pattern(pattern, registry);
    if (!valid.ok())
        throw std::invalid_argument("invalid pattern: " + valid.violations.front());

    StagePlan plan = lower(pattern);
    SimulatedNetwork net(topology, options.overhead, options.seed, options.jitter);
    const std::string& engine = topology.engine_node;

    std::vector<double> done(plan.stages.size(), 0.0);
    std::vector<Bytes> out_size(plan.stages.size(), 0);
    std::vector<Blob> out_blob(options.materialize ? plan.stages.size() : 0);
    std::vector<std::string> home(plan.stages.size());  // circulate: owning proxy

    Blob initial_blob;
    if (options.materialize && plan.initial_consumed)
        initial_blob = generate_payload(options.seed ^ 0x5bd1e995u,
                                        plan.initial_input_bytes);
    std::string initial_home;   // proxy holding the uploaded initial payload
    double initial_ready = 0.0;

    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        const Stage& st = plan.stages[i];
        const ServiceBehavior& behavior =
            behavior_of(behaviors, st.service.service_id);
        const std::string& snode = topology.node_of_service(st.service.service_id);

        double ready = 0.0;
        Bytes in_total = 0;
        std::vector<const Blob*> in_blobs;
        std::vector<Bytes> in_sizes;
        if (!st.generator) {
            for (int in : st.inputs) {
                Bytes n = in == kInitialInput ? plan.initial_input_bytes : out_size[in];
                in_total += n;
                in_sizes.push_back(n);
                if (in != kInitialInput) ready = std::max(ready, done[in]);
                if (options.materialize)
                    in_blobs.push_back(in == kInitialInput ? &initial_blob
                                                           : &out_blob[in]);
            }
        }

        Bytes output = options.materialize
                           ? 0
                           : apply_size(behavior, st.service.op, in_sizes,
                                        plan.initial_input_bytes);
        Blob result;
        if (options.materialize) {
            result = apply(behavior, st.service.op, in_blobs,
                           plan.initial_input_bytes);
            output = static_cast<Bytes>(result.size());
        }

        if (mode == Mode::Centralized) {
            // request carries the inputs, response carries the output
            double t = net.send(engine, snode, MsgKind::Data, in_total, ready);
            t += behavior.synthetic_compute_delay_ms;
            done[i] = net.send(snode, engine, MsgKind::Data, output, t);
        } else {
            const std::string& proxy = topology.proxy_for(st.service.service_id);
            const std::string& pnode = topology.node_of_proxy(proxy);

            if (!st.generator) {
                // upload the initial payload to its first consumer's proxy
                bool wants_initial = false;
                for (int in : st.inputs) wants_initial |= in == kInitialInput;
                if (wants_initial && initial_home.empty()) {
                    double t = net.send(engine, pnode, MsgKind::Data,
                                        plan.initial_input_bytes, ready);
                    initial_ready = net.proxy_call(proxy, t);
                    initial_home = proxy;
                }
                if (wants_initial) ready = std::max(ready, initial_ready);

                // deliver inputs held elsewhere, batched per source proxy
                std::map<std::string, std::pair<Bytes, int>> batches;
                for (int in : st.inputs) {
                    const std::string& h =
                        in == kInitialInput ? initial_home : home[in];
                    Bytes n =
                        in == kInitialInput ? plan.initial_input_bytes : out_size[in];
                    if (h != proxy) {
                        batches[h].first += n;
                        batches[h].second += 1;
                    }
                }
                double delivered = ready;
                for (const auto& [src_proxy, batch] : batches) {
                    const std::string& qnode = topology.node_of_proxy(src_proxy);
                    double t = net.send(engine, qnode, MsgKind::Control,
                                        net.control_bytes(batch.second), ready);
                    t = net.proxy_call(src_proxy, t);
                    t = net.send(qnode, pnode, MsgKind::Data, batch.first, t);
                    t = net.proxy_call(proxy, t);  // stage() at the recipient
                    t = net.send(pnode, qnode, MsgKind::Control,
                                 net.control_bytes(0), t);
                    t = net.send(qnode, engine, MsgKind::Control,
                                 net.control_bytes(0), t);
                    delivered = std::max(delivered, t);
                }
                ready = delivered;
            }

            // invoke via the proxy
            double t = net.send(engine, pnode, MsgKind::Control,
                                net.control_bytes(static_cast<int>(st.inputs.size())),
                                ready);
            t = net.proxy_call(proxy, t);
            t = net.send(pnode, snode, MsgKind::Data, in_total, t);
            t += behavior.synthetic_compute_delay_ms;
            t = net.send(snode, pnode, MsgKind::Data, output, t);
            done[i] = net.send(pnode, engine, MsgKind::Control,
                               net.control_bytes(1), t);
            home[i] = proxy;
        }

        out_size[i] = output;
        if (options.materialize) out_blob[i] = std::move(result);
    }

    RunTrace trace;
    double elapsed = 0.0;
    for (double d : done) elapsed = std::max(elapsed, d);
    for (int f : plan.finals) {
        trace.final_size += out_size[f];
        if (mode == Mode::Circulate && kase == Case::Worst) {
            const std::string& pnode = topology.node_of_proxy(home[f]);
            double t = net.send(engine, pnode, MsgKind::Control,
                                net.control_bytes(1), done[f]);
            t = net.proxy_call(home[f], t);
            t = net.send(pnode, engine, MsgKind::Data, out_size[f], t);
            elapsed = std::max(elapsed, t);
        }
    }
    if (options.materialize) {
        Blob final_payload;
        for (int f : plan.finals)
            final_payload.insert(final_payload.end(), out_blob[f].begin(),
                                 out_blob[f].end());
        trace.final_hash = content_hash(final_payload);
        trace.final_payload = std::move(final_payload);
    }
    trace.events = net.events();
    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) {
                         return a.depart_ms < b.depart_ms;
                     });
    trace.per_class_bytes = net.accounting();
    trace.elapsed_ms = elapsed;
    return trace;
}

WorkflowPattern end_to_end_pattern(Bytes input_bytes) {
    if (input_bytes <= 0)
        throw std::invalid_argument("end-to-end input must be positive");
    WorkflowPattern p;
    p.kind = PatternKind::Composite;
    p.initial_input_bytes = input_bytes;
    auto stage = [&](const std::string& svc, const std::string& op,
                     std::vector<int> inputs) {
        p.stages.push_back({{svc, op}, std::move(inputs)});
    };
    stage("e2e_src_0", "generate", {});
    stage("e2e_src_1", "generate", {});
    stage("e2e_src_2", "generate", {});
    stage("e2e_filter", "compose", {0, 1, 2});   // 20% of the gathered data
    stage("e2e_relay_0", "copy", {3});
    stage("e2e_relay_1", "copy", {3});
    stage("e2e_relay_2", "copy", {3});
    stage("e2e_half_0", "reduce", {4, 5, 6});    // concatenation, then 50%
    stage("e2e_half_1", "reduce", {7});
    return p;
}

BehaviorMap end_to_end_behaviors() {
    BehaviorMap m;
    auto add = [&](const std::string& id, const std::string& op, int arity,
                   TransformSpec t) {
        ServiceBehavior b;
        b.spec.service_id = id;
        b.spec.operations.push_back({op, arity, t});
        m[id] = b;
    };
    for (int i = 0; i < 3; ++i)
        add("e2e_src_" + std::to_string(i), "generate", 0, TransformSpec::identity());
    add("e2e_filter", "compose", 3, TransformSpec::ratio_of_concat(1, 5));
    for (int i = 0; i < 3; ++i)
        add("e2e_relay_" + std::to_string(i), "copy", 1, TransformSpec::identity());
    add("e2e_half_0", "reduce", 3, TransformSpec::ratio_of_concat(1, 2));
    add("e2e_half_1", "reduce", 1, TransformSpec::ratio(1, 2));
    return m;
}

RunTrace run_end_to_end(Bytes input_bytes, const Topology& topology, Mode mode,
                        Case kase, const SimOptions& options) {
    return run_simulated(end_to_end_pattern(input_bytes), mode, kase, topology,
                         end_to_end_behaviors(), options);
}

}  // namespace circulate
