#pragma once

// Shared scenario builders for the test suites.

#include <random>
#include <string>

#include "circulate/engine.hpp"
#include "circulate/types.hpp"

namespace circulate::testing {

inline constexpr Bytes kMb = 1000000;  // the walkthrough's "Mb" unit

struct Fig45 {
    BehaviorMap behaviors;
    WorkflowPattern pattern;
    Topology topology;
};

/// The fan-in walkthrough: three sources producing 100 Mb each feed a sink
/// returning 100 Mb. Source proxies share the sources' server; the sink
/// proxy sits on a separate LAN node next to the sink; the engine and the
/// two sites are WAN apart.
inline Fig45 fig45_scenario() {
    Fig45 f;
    auto add = [&](const std::string& id, const std::string& op, int arity,
                   TransformSpec t, const std::string& node) {
        ServiceBehavior b;
        b.spec.service_id = id;
        b.spec.host_node = node;
        b.spec.operations.push_back({op, arity, t});
        f.behaviors[id] = b;
        f.topology.service_nodes[id] = node;
    };
    for (int i = 1; i <= 3; ++i)
        add("source" + std::to_string(i), "query", 0, TransformSpec::identity(),
            "src_host");
    add("sink", "compose", 3, TransformSpec::ratio_of_concat(1, 3), "sink_host");

    f.pattern.kind = PatternKind::FanIn;
    f.pattern.initial_input_bytes = 100 * kMb;
    for (int i = 1; i <= 3; ++i)
        f.pattern.sources.push_back({"source" + std::to_string(i), "query"});
    f.pattern.sink = {"sink", "compose"};

    Topology& t = f.topology;
    t.engine_node = "engine";
    t.nodes = {{"engine", NodeRole::Engine},
               {"src_host", NodeRole::ServiceHost},
               {"sink_host", NodeRole::ServiceHost},
               {"sink_proxy_host", NodeRole::Proxy}};
    LinkModel wan{50.0, 10000.0, 0.0, LinkClass::Wan};
    LinkModel lan{1.0, 100000.0, 0.0, LinkClass::Lan};
    t.add_link("engine", "src_host", wan);
    t.add_link("engine", "sink_host", wan);
    t.add_link("engine", "sink_proxy_host", wan);
    t.add_link("src_host", "sink_proxy_host", wan);
    t.add_link("src_host", "sink_host", wan);
    t.add_link("sink_proxy_host", "sink_host", lan);
    t.proxy_nodes["source-proxy"] = "src_host";
    t.proxy_nodes["sink-proxy"] = "sink_proxy_host";
    for (int i = 1; i <= 3; ++i)
        t.proxy_of["source" + std::to_string(i)] = "source-proxy";
    t.proxy_of["sink"] = "sink-proxy";
    return f;
}

/// A sequence of n services on separate hosts of one LAN, each service
/// colocated with its proxy, engine across a WAN.
struct SeqScenario {
    BehaviorMap behaviors;
    WorkflowPattern pattern;
    Topology topology;
};

inline SeqScenario sequence_scenario(int n, TransformSpec law, Bytes input,
                                     bool remote_engine = true) {
    SeqScenario s;
    s.pattern.kind = PatternKind::Sequence;
    s.pattern.initial_input_bytes = input;
    Topology& t = s.topology;
    t.engine_node = "engine";
    t.nodes.emplace_back("engine", NodeRole::Engine);
    LinkModel wan{50.0, 10000.0, 0.0, LinkClass::Wan};
    LinkModel lan{1.0, 100000.0, 0.0, LinkClass::Lan};
    for (int i = 0; i < n; ++i) {
        std::string id = "svc" + std::to_string(i);
        std::string host = "host" + std::to_string(i);
        ServiceBehavior b;
        b.spec.service_id = id;
        b.spec.host_node = host;
        b.spec.operations.push_back({"apply", 1, law});
        s.behaviors[id] = b;
        s.pattern.sequence.push_back({id, "apply"});
        t.nodes.emplace_back(host, NodeRole::ServiceHost);
        t.service_nodes[id] = host;
        t.proxy_nodes["proxy" + std::to_string(i)] = host;
        t.proxy_of[id] = "proxy" + std::to_string(i);
        t.add_link("engine", host, remote_engine ? wan : lan);
        for (int j = 0; j < i; ++j)
            t.add_link("host" + std::to_string(j), host, lan);
    }
    return s;
}

/// Seeded random scenario: random pattern shape, size laws and placements.
struct RandomScenario {
    BehaviorMap behaviors;
    WorkflowPattern pattern;
    Topology topology;
};

inline RandomScenario random_scenario(std::uint64_t seed, Bytes max_input = 200000) {
    std::mt19937_64 rng(seed);
    RandomScenario s;
    Topology& t = s.topology;
    t.engine_node = "engine";
    t.nodes.emplace_back("engine", NodeRole::Engine);
    LinkModel wan{50.0, 10000.0, 0.0, LinkClass::Wan};
    LinkModel lan{1.0, 100000.0, 0.0, LinkClass::Lan};

    int n_services = std::uniform_int_distribution<int>(2, 6)(rng);
    int n_hosts = std::uniform_int_distribution<int>(1, n_services)(rng);
    for (int h = 0; h < n_hosts; ++h) {
        std::string host = "host" + std::to_string(h);
        t.nodes.emplace_back(host, NodeRole::ServiceHost);
        t.add_link("engine", host, wan);
        for (int j = 0; j < h; ++j) t.add_link("host" + std::to_string(j), host, lan);
        t.proxy_nodes["proxy" + std::to_string(h)] = host;
    }

    auto random_transform = [&]() -> TransformSpec {
        switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
            case 0: return TransformSpec::identity();
            case 1: return TransformSpec::ratio(std::uniform_int_distribution<int>(1, 30)(rng), 10);
            case 2: return TransformSpec::constant(std::uniform_int_distribution<Bytes>(0, max_input)(rng));
            default: return TransformSpec::ratio_of_concat(std::uniform_int_distribution<int>(1, 20)(rng), 10);
        }
    };
    std::vector<std::string> ids;
    for (int i = 0; i < n_services; ++i) {
        std::string id = "svc" + std::to_string(i);
        int host = std::uniform_int_distribution<int>(0, n_hosts - 1)(rng);
        ServiceBehavior b;
        b.spec.service_id = id;
        b.spec.host_node = "host" + std::to_string(host);
        b.spec.operations.push_back({"apply", -1, random_transform()});
        s.behaviors[id] = b;
        t.service_nodes[id] = b.spec.host_node;
        t.proxy_of[id] = "proxy" + std::to_string(host);
        ids.push_back(id);
    }

    WorkflowPattern& p = s.pattern;
    p.initial_input_bytes =
        std::uniform_int_distribution<Bytes>(0, max_input)(rng);
    auto pick = [&]() -> ServiceRef {
        return {ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)],
                "apply"};
    };
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: {
            p.kind = PatternKind::Sequence;
            int k = std::uniform_int_distribution<int>(1, 5)(rng);
            for (int i = 0; i < k; ++i) p.sequence.push_back(pick());
            break;
        }
        case 1: {
            p.kind = PatternKind::FanIn;
            int k = std::uniform_int_distribution<int>(2, 5)(rng);
            for (int i = 0; i < k; ++i) p.sources.push_back(pick());
            p.sink = pick();
            break;
        }
        case 2: {
            p.kind = PatternKind::FanOut;
            p.source = pick();
            int k = std::uniform_int_distribution<int>(2, 5)(rng);
            for (int i = 0; i < k; ++i) p.sinks.push_back(pick());
            break;
        }
        default: {
            p.kind = PatternKind::Composite;
            int k = std::uniform_int_distribution<int>(1, 7)(rng);
            for (int i = 0; i < k; ++i) {
                CompositeStage cs;
                cs.service = pick();
                int n_in = std::uniform_int_distribution<int>(0, std::min(i + 1, 3))(rng);
                for (int j = 0; j < n_in; ++j)
                    cs.inputs.push_back(
                        std::uniform_int_distribution<int>(kInitialInput, i - 1)(rng));
                p.stages.push_back(std::move(cs));
            }
            break;
        }
    }
    return s;
}

}  // namespace circulate::testing
