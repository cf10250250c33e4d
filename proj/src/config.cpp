#include "circulate/config.hpp"

#include <cmath>
#include <fstream>
#include <numeric>


namespace circulate {

using nlohmann::json;

namespace {

std::pair<std::int64_t, std::int64_t> parse_ratio(const json& j) {
    if (j.is_array()) {
        if (j.size() != 2) throw std::runtime_error("ratio array must be [num, den]");
        return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
    }
    std::string text = j.is_string() ? j.get<std::string>() : j.dump();
    // exact decimal -> rational
    auto dot = text.find('.');
    std::int64_t den = 1;
    if (dot != std::string::npos) {
        den = 1;
        for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
        text.erase(dot, 1);
    }
    std::int64_t num = std::stoll(text);
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
    return {num, den};
}

ServiceRef parse_service_ref(const json& j) {
    return {j.at("service").get<std::string>(), j.at("op").get<std::string>()};
}

json service_ref_json(const ServiceRef& r) {
    return json{{"service", r.service_id}, {"op", r.op}};
}

LinkClass parse_link_class(const std::string& s) {
    if (s == "same_server") return LinkClass::SameServer;
    if (s == "lan") return LinkClass::Lan;
    if (s == "wan") return LinkClass::Wan;
    throw std::runtime_error("unknown link class '" + s + "'");
}

NodeRole parse_role(const std::string& s) {
    if (s == "engine") return NodeRole::Engine;
    if (s == "proxy") return NodeRole::Proxy;
    if (s == "service_host") return NodeRole::ServiceHost;
    throw std::runtime_error("unknown node role '" + s + "'");
}

}  // namespace

TransformSpec parse_transform(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return TransformSpec::identity();
    if (kind == "constant")
        return TransformSpec::constant(j.at("constant_bytes").get<Bytes>());
    auto [num, den] = parse_ratio(j.at("ratio"));
    if (kind == "ratio") return TransformSpec::ratio(num, den);
    if (kind == "ratio_of_concat") return TransformSpec::ratio_of_concat(num, den);
    throw std::runtime_error("unknown transform kind '" + kind + "'");
}

BehaviorMap parse_registry(const json& j) {
    BehaviorMap out;
    for (const auto& e : j) {
        ServiceBehavior b;
        b.spec.service_id = e.at("service_id").get<std::string>();
        b.spec.host_node = e.value("host_node", "");
        b.synthetic_compute_delay_ms = e.value("compute_delay_ms", 0.0);
        for (const auto& op : e.at("operations")) {
            OperationSpec o;
            o.name = op.at("name").get<std::string>();
            o.arity = op.value("arity", 1);
            o.transform = parse_transform(op.at("transform"));
            b.spec.operations.push_back(std::move(o));
        }
        if (out.count(b.spec.service_id))
            throw std::runtime_error("duplicate service_id '" + b.spec.service_id + "'");
        out[b.spec.service_id] = std::move(b);
    }
    return out;
}

WorkflowPattern parse_pattern(const json& j) {
    WorkflowPattern p;
    std::string kind = j.at("kind").get<std::string>();
    p.initial_input_bytes = j.value("initial_input_bytes", Bytes{0});
    if (kind == "sequence") {
        p.kind = PatternKind::Sequence;
        for (const auto& s : j.at("services")) p.sequence.push_back(parse_service_ref(s));
    } else if (kind == "fan_in") {
        p.kind = PatternKind::FanIn;
        for (const auto& s : j.at("sources")) p.sources.push_back(parse_service_ref(s));
        p.sink = parse_service_ref(j.at("sink"));
    } else if (kind == "fan_out") {
        p.kind = PatternKind::FanOut;
        p.source = parse_service_ref(j.at("source"));
        for (const auto& s : j.at("sinks")) p.sinks.push_back(parse_service_ref(s));
    } else if (kind == "composite") {
        p.kind = PatternKind::Composite;
        for (const auto& s : j.at("stages")) {
            CompositeStage cs;
            cs.service = parse_service_ref(s);
            for (const auto& in : s.value("inputs", json::array()))
                cs.inputs.push_back(in.get<int>());
            p.stages.push_back(std::move(cs));
        }
        for (const auto& f : j.value("finals", json::array()))
            p.final_stages.push_back(f.get<int>());
    } else {
        throw std::runtime_error("unknown pattern kind '" + kind + "'");
    }
    return p;
}

Topology parse_topology(const json& j) {
    Topology t;
    t.engine_node = j.value("engine_node", "engine");
    for (const auto& n : j.at("nodes"))
        t.nodes.emplace_back(n.at("id").get<std::string>(),
                             parse_role(n.value("role", "service_host")));
    for (const auto& l : j.at("links")) {
        LinkModel m;
        m.link_class = parse_link_class(l.at(2).get<std::string>());
        m.latency_ms = l.at(3).get<double>();
        m.bandwidth_bytes_per_ms = l.at(4).get<double>();
        m.per_message_overhead_ms = l.size() > 5 ? l.at(5).get<double>() : 0.0;
        t.add_link(l.at(0).get<std::string>(), l.at(1).get<std::string>(), m);
    }
    for (const auto& [svc, node] : j.at("services").items())
        t.service_nodes[svc] = node.get<std::string>();
    // keep the json::value copies alive for the duration of the iteration
    const json proxies = j.value("proxies", json::object());
    for (const auto& [proxy, node] : proxies.items())
        t.proxy_nodes[proxy] = node.get<std::string>();
    const json proxy_of = j.value("proxy_of", json::object());
    for (const auto& [svc, proxy] : proxy_of.items())
        t.proxy_of[svc] = proxy.get<std::string>();
    return t;
}

Scenario load_scenario(const json& doc) {
    Scenario s;
    s.behaviors = parse_registry(doc.at("registry"));
    s.pattern = parse_pattern(doc.at("pattern"));
    s.topology = parse_topology(doc.at("topology"));
    // hosts in the registry also feed placement
    for (auto& [id, b] : s.behaviors)
        if (!b.spec.host_node.empty() && !s.topology.service_nodes.count(id))
            s.topology.service_nodes[id] = b.spec.host_node;
    std::string mode = doc.value("mode", "centralized");
    s.mode = mode == "circulate" ? Mode::Circulate : Mode::Centralized;
    s.kase = doc.value("case", "worst") == std::string("best") ? Case::Best : Case::Worst;
    if (doc.contains("transport")) {
        const json& t = doc["transport"];
        s.sim.seed = t.value("seed", 0ULL);
        s.sim.jitter = t.value("jitter", 0.0);
        s.sim.materialize = t.value("materialize", false);
        s.sim.overhead.per_call_ms = t.value("per_call_ms", 0.0);
        s.sim.overhead.per_ref_bytes = t.value("per_ref_bytes", Bytes{0});
    }
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json doc = json::parse(in);
    return load_scenario(doc);
}

nlohmann::json scenario_to_json(const Scenario& s) {
    json reg = json::array();
    for (const auto& [id, b] : s.behaviors) {
        json ops = json::array();
        for (const auto& o : b.spec.operations) {
            json t;
            switch (o.transform.kind) {
                case TransformKind::Identity: t = {{"kind", "identity"}}; break;
                case TransformKind::Constant:
                    t = {{"kind", "constant"}, {"constant_bytes", o.transform.constant_bytes}};
                    break;
                case TransformKind::Ratio:
                    t = {{"kind", "ratio"},
                         {"ratio", {o.transform.ratio_num, o.transform.ratio_den}}};
                    break;
                case TransformKind::RatioOfConcat:
                    t = {{"kind", "ratio_of_concat"},
                         {"ratio", {o.transform.ratio_num, o.transform.ratio_den}}};
                    break;
            }
            ops.push_back({{"name", o.name}, {"arity", o.arity}, {"transform", t}});
        }
        reg.push_back({{"service_id", id},
                       {"host_node", b.spec.host_node},
                       {"compute_delay_ms", b.synthetic_compute_delay_ms},
                       {"operations", ops}});
    }

    json pat{{"initial_input_bytes", s.pattern.initial_input_bytes}};
    switch (s.pattern.kind) {
        case PatternKind::Sequence: {
            pat["kind"] = "sequence";
            json svcs = json::array();
            for (const auto& r : s.pattern.sequence) svcs.push_back(service_ref_json(r));
            pat["services"] = svcs;
            break;
        }
        case PatternKind::FanIn: {
            pat["kind"] = "fan_in";
            json srcs = json::array();
            for (const auto& r : s.pattern.sources) srcs.push_back(service_ref_json(r));
            pat["sources"] = srcs;
            pat["sink"] = service_ref_json(s.pattern.sink);
            break;
        }
        case PatternKind::FanOut: {
            pat["kind"] = "fan_out";
            pat["source"] = service_ref_json(s.pattern.source);
            json snks = json::array();
            for (const auto& r : s.pattern.sinks) snks.push_back(service_ref_json(r));
            pat["sinks"] = snks;
            break;
        }
        case PatternKind::Composite: {
            pat["kind"] = "composite";
            json stages = json::array();
            for (const auto& cs : s.pattern.stages) {
                json st = service_ref_json(cs.service);
                st["inputs"] = cs.inputs;
                stages.push_back(st);
            }
            pat["stages"] = stages;
            pat["finals"] = s.pattern.final_stages;
            break;
        }
    }

    json nodes = json::array();
    for (const auto& [id, role] : s.topology.nodes) {
        const char* r = role == NodeRole::Engine ? "engine"
                        : role == NodeRole::Proxy ? "proxy"
                                                  : "service_host";
        nodes.push_back({{"id", id}, {"role", r}});
    }
    json links = json::array();
    for (const auto& [key, m] : s.topology.links)
        links.push_back({key.first, key.second, to_string(m.link_class), m.latency_ms,
                         m.bandwidth_bytes_per_ms, m.per_message_overhead_ms});
    json topo{{"engine_node", s.topology.engine_node},
              {"nodes", nodes},
              {"links", links},
              {"services", s.topology.service_nodes},
              {"proxies", s.topology.proxy_nodes},
              {"proxy_of", s.topology.proxy_of}};

    return json{{"registry", reg},
                {"pattern", pat},
                {"topology", topo},
                {"mode", to_string(s.mode)},
                {"case", to_string(s.kase)},
                {"transport",
                 {{"kind", "simulated"},
                  {"seed", s.sim.seed},
                  {"jitter", s.sim.jitter},
                  {"materialize", s.sim.materialize},
                  {"per_call_ms", s.sim.overhead.per_call_ms},
                  {"per_ref_bytes", s.sim.overhead.per_ref_bytes}}}};
}

nlohmann::json trace_to_json(const RunTrace& trace) {
    json events = json::array();
    for (const auto& e : trace.events)
        events.push_back({{"depart_ms", e.depart_ms},
                          {"arrive_ms", e.arrive_ms},
                          {"from", e.from},
                          {"to", e.to},
                          {"kind", e.kind == MsgKind::Data ? "data" : "control"},
                          {"bytes", e.bytes},
                          {"link_class", to_string(e.link_class)}});
    json acc;
    for (int c = 0; c < 3; ++c) {
        const char* name = to_string(static_cast<LinkClass>(c));
        acc[name] = {{"bytes", trace.per_class_bytes.bytes_by_class[c]},
                     {"messages", trace.per_class_bytes.messages_by_class[c]}};
    }
    acc["total_bytes"] = trace.per_class_bytes.total_bytes();
    json out{{"events", events},
             {"accounting", acc},
             {"elapsed_ms", trace.elapsed_ms},
             {"final_size", trace.final_size}};
    if (trace.final_hash) out["final_hash"] = *trace.final_hash;
    return out;
}

}  // namespace circulate
