#pragma once

// Brute-force transfer oracle: walks a pattern hop by hop, emitting every
// data transfer as an explicit (from, to, bytes) record, then classifies
// them against the topology. Kept deliberately flat and variant-by-variant,
// independent of the stage-plan machinery it checks.

#include <map>
#include <string>
#include <vector>

#include "circulate/types.hpp"

namespace circulate::testing {

struct Hop {
    std::string from;
    std::string to;
    Bytes bytes;
};

inline Bytes oracle_out(const Registry& reg, const ServiceRef& ref, Bytes in) {
    const ServiceSpec* s = find_service(reg, ref.service_id);
    const OperationSpec* o = s->find_op(ref.op);
    switch (o->transform.kind) {
        case TransformKind::Identity: return in;
        case TransformKind::Constant: return o->transform.constant_bytes;
        default:
            return static_cast<Bytes>(
                (static_cast<unsigned __int128>(in) *
                 static_cast<unsigned __int128>(o->transform.ratio_num)) /
                static_cast<unsigned __int128>(o->transform.ratio_den));
    }
}

inline std::vector<Hop> enumerate_hops(const WorkflowPattern& p, Mode mode,
                                       Case kase, const Topology& topo,
                                       const Registry& reg) {
    std::vector<Hop> hops;
    const std::string& eng = topo.engine_node;
    auto svc_node = [&](const ServiceRef& r) { return topo.node_of_service(r.service_id); };
    auto proxy_id = [&](const ServiceRef& r) { return topo.proxy_for(r.service_id); };
    auto proxy_node = [&](const ServiceRef& r) {
        return topo.node_of_proxy(topo.proxy_for(r.service_id));
    };

    if (p.kind == PatternKind::Sequence) {
        Bytes cur = p.initial_input_bytes;
        if (mode == Mode::Centralized) {
            for (const auto& ref : p.sequence) {
                hops.push_back({eng, svc_node(ref), cur});
                cur = oracle_out(reg, ref, cur);
                hops.push_back({svc_node(ref), eng, cur});
            }
        } else {
            if (!p.sequence.empty())
                hops.push_back({eng, proxy_node(p.sequence[0]), cur});
            for (std::size_t i = 0; i < p.sequence.size(); ++i) {
                const auto& ref = p.sequence[i];
                if (i > 0 && proxy_id(p.sequence[i - 1]) != proxy_id(ref))
                    hops.push_back({proxy_node(p.sequence[i - 1]), proxy_node(ref), cur});
                hops.push_back({proxy_node(ref), svc_node(ref), cur});
                cur = oracle_out(reg, ref, cur);
                hops.push_back({svc_node(ref), proxy_node(ref), cur});
            }
            if (kase == Case::Worst && !p.sequence.empty())
                hops.push_back({proxy_node(p.sequence.back()), eng, cur});
        }
        return hops;
    }

    if (p.kind == PatternKind::FanIn) {
        std::vector<Bytes> outs;
        Bytes sum = 0;
        for (const auto& src : p.sources) {
            outs.push_back(oracle_out(reg, src, p.initial_input_bytes));
            sum += outs.back();
        }
        Bytes sink_out = oracle_out(reg, p.sink, sum);
        if (mode == Mode::Centralized) {
            for (std::size_t i = 0; i < p.sources.size(); ++i) {
                hops.push_back({eng, svc_node(p.sources[i]), 0});
                hops.push_back({svc_node(p.sources[i]), eng, outs[i]});
            }
            hops.push_back({eng, svc_node(p.sink), sum});
            hops.push_back({svc_node(p.sink), eng, sink_out});
        } else {
            for (std::size_t i = 0; i < p.sources.size(); ++i) {
                hops.push_back({proxy_node(p.sources[i]), svc_node(p.sources[i]), 0});
                hops.push_back({svc_node(p.sources[i]), proxy_node(p.sources[i]), outs[i]});
            }
            // one deliver batch per distinct source proxy, skipping data
            // already at the sink's proxy
            std::map<std::string, Bytes> batches;
            for (std::size_t i = 0; i < p.sources.size(); ++i)
                if (proxy_id(p.sources[i]) != proxy_id(p.sink))
                    batches[proxy_id(p.sources[i])] += outs[i];
            for (const auto& [q, n] : batches)
                hops.push_back({topo.node_of_proxy(q), proxy_node(p.sink), n});
            hops.push_back({proxy_node(p.sink), svc_node(p.sink), sum});
            hops.push_back({svc_node(p.sink), proxy_node(p.sink), sink_out});
            if (kase == Case::Worst)
                hops.push_back({proxy_node(p.sink), eng, sink_out});
        }
        return hops;
    }

    if (p.kind == PatternKind::FanOut) {
        Bytes src_out = oracle_out(reg, p.source, p.initial_input_bytes);
        if (mode == Mode::Centralized) {
            hops.push_back({eng, svc_node(p.source), 0});
            hops.push_back({svc_node(p.source), eng, src_out});
            for (const auto& snk : p.sinks) {
                hops.push_back({eng, svc_node(snk), src_out});
                hops.push_back({svc_node(snk), eng, oracle_out(reg, snk, src_out)});
            }
        } else {
            hops.push_back({proxy_node(p.source), svc_node(p.source), 0});
            hops.push_back({svc_node(p.source), proxy_node(p.source), src_out});
            for (const auto& snk : p.sinks) {
                if (proxy_id(snk) != proxy_id(p.source))
                    hops.push_back({proxy_node(p.source), proxy_node(snk), src_out});
                hops.push_back({proxy_node(snk), svc_node(snk), src_out});
                Bytes out = oracle_out(reg, snk, src_out);
                hops.push_back({svc_node(snk), proxy_node(snk), out});
                if (kase == Case::Worst)
                    hops.push_back({proxy_node(snk), eng, out});
            }
        }
        return hops;
    }

    // Composite: per-stage walk, data pulled from the producing stage's proxy.
    std::vector<Bytes> out(p.stages.size(), 0);
    std::vector<std::string> owner(p.stages.size());
    std::string initial_owner;
    for (std::size_t i = 0; i < p.stages.size(); ++i) {
        const auto& st = p.stages[i];
        Bytes total = 0;
        bool generator = st.inputs.empty();
        if (mode == Mode::Centralized) {
            for (int in : st.inputs)
                total += in == kInitialInput ? p.initial_input_bytes : out[in];
            hops.push_back({eng, svc_node(st.service), generator ? 0 : total});
            out[i] = oracle_out(reg, st.service, generator ? p.initial_input_bytes : total);
            hops.push_back({svc_node(st.service), eng, out[i]});
            continue;
        }
        std::string me = proxy_id(st.service);
        std::map<std::string, Bytes> batches;
        for (int in : st.inputs) {
            if (in == kInitialInput) {
                if (initial_owner.empty()) {
                    hops.push_back({eng, proxy_node(st.service), p.initial_input_bytes});
                    initial_owner = me;
                } else if (initial_owner != me) {
                    batches[initial_owner] += p.initial_input_bytes;
                }
                total += p.initial_input_bytes;
            } else {
                total += out[in];
                if (owner[in] != me) batches[owner[in]] += out[in];
            }
        }
        for (const auto& [q, n] : batches)
            hops.push_back({topo.node_of_proxy(q), proxy_node(st.service), n});
        hops.push_back({proxy_node(st.service), svc_node(st.service),
                        generator ? 0 : total});
        out[i] = oracle_out(reg, st.service, generator ? p.initial_input_bytes : total);
        hops.push_back({svc_node(st.service), proxy_node(st.service), out[i]});
        owner[i] = me;
    }
    if (mode == Mode::Circulate && kase == Case::Worst) {
        std::vector<int> finals = p.final_stages;
        if (finals.empty() && !p.stages.empty())
            finals.push_back(static_cast<int>(p.stages.size()) - 1);
        for (int f : finals)
            hops.push_back({topo.node_of_proxy(owner[f]), eng, out[f]});
    }
    return hops;
}

inline TransferAccounting classify(const std::vector<Hop>& hops,
                                   const Topology& topo) {
    TransferAccounting acc;
    for (const auto& h : hops)
        acc.record(topo.link(h.from, h.to).link_class, h.bytes);
    return acc;
}

inline TransferAccounting oracle_transfer(const WorkflowPattern& p, Mode mode,
                                          Case kase, const Topology& topo,
                                          const Registry& reg) {
    return classify(enumerate_hops(p, mode, kase, topo, reg), topo);
}

}  // namespace circulate::testing
