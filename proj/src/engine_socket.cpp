#include <algorithm>
#include <chrono>
#include <map>
#include <memory>

#include "circulate/engine.hpp"
#include "circulate/net.hpp"

namespace circulate {

namespace {

// Initial payloads must hash identically to a materialized simulated run
// with seed 0, so socket and simulated transports are cross-checkable.
constexpr std::uint64_t kInitialSeed = 0x5bd1e995u;

struct SocketRun {
    const Topology& topology;
    const std::map<std::string, ProxyEndpoint>& endpoints;
    std::map<std::string, std::unique_ptr<ProxyClient>> clients;
    RunTrace trace;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    ProxyClient& client(const std::string& proxy_id) {
        auto it = clients.find(proxy_id);
        if (it != clients.end()) return *it->second;
        auto ep = endpoints.find(proxy_id);
        if (ep == endpoints.end())
            throw std::runtime_error("no endpoint for proxy '" + proxy_id + "'");
        auto c = std::make_unique<ProxyClient>(ep->second.host, ep->second.port);
        return *clients.emplace(proxy_id, std::move(c)).first->second;
    }

    double now() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }

    /// Log one logical data transfer between nodes and charge its bytes to
    /// the link class the topology assigns to that hop.
    void data_hop(const std::string& from, const std::string& to, Bytes bytes,
                  double depart) {
        LinkClass c = topology.link(from, to).link_class;
        trace.per_class_bytes.record(c, bytes);
        trace.events.push_back({depart, now(), from, to, MsgKind::Data, bytes, c});
    }
};

}  // namespace

RunTrace run_socket(const WorkflowPattern& pattern, Mode mode, Case kase,
                    const Topology& topology, const Registry& registry,
                    const std::map<std::string, ProxyEndpoint>& endpoints) {
    ValidationResult valid = validate_pattern(pattern, registry);
    if (!valid.ok())
        throw std::invalid_argument("invalid pattern: " + valid.violations.front());

    StagePlan plan = lower(pattern);
    SocketRun run{topology, endpoints, {}, {}, std::chrono::steady_clock::now()};
    const std::string& engine = topology.engine_node;

    // make sure every proxy maintains the services routed through it
    for (const ServiceSpec& spec : registry) {
        ServiceBehavior b;
        b.spec = spec;
        try {
            run.client(topology.proxy_for(spec.service_id)).add_service(b);
        } catch (const ProxyError& e) {
            if (e.kind != ErrorKind::ProxyAdminError) throw;
        }
    }

    Blob initial_blob;
    if (plan.initial_consumed)
        initial_blob = generate_payload(kInitialSeed, plan.initial_input_bytes);

    std::vector<Bytes> out_size(plan.stages.size(), 0);
    std::vector<Blob> central_out(plan.stages.size());
    std::vector<std::string> ref(plan.stages.size());   // circulate DataRef ids
    std::vector<std::string> home(plan.stages.size());  // owning proxy
    std::map<std::string, std::vector<std::string>> temp_refs;  // proxy -> ids
    std::string initial_ref, initial_home;

    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        const Stage& st = plan.stages[i];
        const std::string& sid = st.service.service_id;
        const std::string& snode = topology.node_of_service(sid);
        const std::string& proxy = topology.proxy_for(sid);
        const std::string& pnode = topology.node_of_proxy(proxy);

        Bytes in_total = 0;
        for (int in : st.inputs)
            in_total += in == kInitialInput ? plan.initial_input_bytes : out_size[in];

        if (mode == Mode::Centralized) {
            // vanilla path: payloads make the round trip through the engine
            std::vector<Blob> inputs;
            for (int in : st.inputs)
                inputs.push_back(in == kInitialInput ? initial_blob : central_out[in]);

            ProxyClient& c = run.client(proxy);
            double depart = run.now();
            std::vector<std::string> ids;
            if (!inputs.empty()) ids = c.upload(inputs);
            run.data_hop(engine, snode, in_total, depart);

            std::string result_id =
                c.invoke(sid, st.service.op, ids, plan.initial_input_bytes);

            depart = run.now();
            Blob result = c.return_data({result_id})[0];
            run.data_hop(snode, engine, static_cast<Bytes>(result.size()), depart);

            ids.push_back(result_id);
            c.flush_temp_data(ids);
            out_size[i] = static_cast<Bytes>(result.size());
            central_out[i] = std::move(result);
            continue;
        }

        // circulate: references only; proxies move the payloads
        if (!st.generator) {
            bool wants_initial = false;
            for (int in : st.inputs) wants_initial |= in == kInitialInput;
            if (wants_initial && initial_home.empty()) {
                double depart = run.now();
                initial_ref = run.client(proxy).upload({initial_blob})[0];
                run.data_hop(engine, pnode, plan.initial_input_bytes, depart);
                initial_home = proxy;
                temp_refs[proxy].push_back(initial_ref);
            }

            // pull inputs held elsewhere, one deliver batch per source proxy
            std::map<std::string, std::pair<std::vector<std::string>, Bytes>> batches;
            for (int in : st.inputs) {
                const std::string& h = in == kInitialInput ? initial_home : home[in];
                const std::string& r = in == kInitialInput ? initial_ref : ref[in];
                Bytes n = in == kInitialInput ? plan.initial_input_bytes : out_size[in];
                if (h != proxy) {
                    auto& batch = batches[h];
                    // bytes count per occurrence (a twice-used input is
                    // staged once but accounted per use, as in simulation)
                    batch.second += n;
                    if (std::find(batch.first.begin(), batch.first.end(), r) ==
                        batch.first.end())
                        batch.first.push_back(r);
                }
            }
            const ProxyEndpoint& dst = endpoints.at(proxy);
            for (const auto& [src_proxy, batch] : batches) {
                double depart = run.now();
                run.client(src_proxy).deliver(dst.host, dst.port, batch.first);
                run.data_hop(topology.node_of_proxy(src_proxy), pnode, batch.second,
                             depart);
                for (const auto& r : batch.first) temp_refs[proxy].push_back(r);
            }
        }

        std::vector<std::string> param_ids;
        for (int in : st.inputs)
            param_ids.push_back(in == kInitialInput ? initial_ref : ref[in]);

        double depart = run.now();
        auto [result_id, output] = run.client(proxy).invoke_sized(
            sid, st.service.op, param_ids, plan.initial_input_bytes);
        // the proxy<->service round trip happens inside the proxy host
        run.data_hop(pnode, snode, in_total, depart);
        run.data_hop(snode, pnode, output, depart);

        ref[i] = result_id;
        home[i] = proxy;
        out_size[i] = output;
        temp_refs[proxy].push_back(result_id);
    }

    Blob final_payload;
    bool have_payload = mode == Mode::Centralized ||
                        (mode == Mode::Circulate && kase == Case::Worst);
    for (int f : plan.finals) {
        run.trace.final_size += out_size[f];
        if (mode == Mode::Centralized) {
            final_payload.insert(final_payload.end(), central_out[f].begin(),
                                 central_out[f].end());
        } else if (kase == Case::Worst) {
            double depart = run.now();
            Blob b = run.client(home[f]).return_data({ref[f]})[0];
            run.data_hop(topology.node_of_proxy(home[f]), engine,
                         static_cast<Bytes>(b.size()), depart);
            final_payload.insert(final_payload.end(), b.begin(), b.end());
        }
    }
    if (have_payload) {
        run.trace.final_hash = content_hash(final_payload);
        run.trace.final_payload = std::move(final_payload);
    }

    // housekeeping: flush everything this run spooled
    for (const auto& [proxy, ids] : temp_refs)
        if (!ids.empty()) run.client(proxy).flush_temp_data(ids);

    run.trace.elapsed_ms = run.now();
    return run.trace;
}

}  // namespace circulate
