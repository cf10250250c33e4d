#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace circulate {

using Bytes = std::int64_t;

// ---------------------------------------------------------------------------
// Data references

/// UUID handle to a stored blob: the unit of "pass references, not data".
struct DataRef {
    std::string id;          // canonical hex UUID text
    Bytes size_bytes = 0;
    std::string home_proxy;  // proxy that stores the blob
};

// ---------------------------------------------------------------------------
// Size laws

enum class TransformKind { Ratio, Identity, Constant, RatioOfConcat };

/// Deterministic output-size law. Ratios are exact rationals so
/// floor(ratio * n) has no floating point ambiguity.
struct TransformSpec {
    TransformKind kind = TransformKind::Identity;
    std::int64_t ratio_num = 1;
    std::int64_t ratio_den = 1;
    Bytes constant_bytes = 0;

    static TransformSpec identity() { return {}; }
    static TransformSpec ratio(std::int64_t num, std::int64_t den) {
        return {TransformKind::Ratio, num, den, 0};
    }
    static TransformSpec constant(Bytes n) {
        return {TransformKind::Constant, 1, 1, n};
    }
    static TransformSpec ratio_of_concat(std::int64_t num, std::int64_t den) {
        return {TransformKind::RatioOfConcat, num, den, 0};
    }

    /// Output size for a given total input size.
    Bytes output_size(Bytes total_input) const {
        switch (kind) {
            case TransformKind::Identity: return total_input;
            case TransformKind::Constant: return constant_bytes;
            case TransformKind::Ratio:
            case TransformKind::RatioOfConcat: {
                unsigned __int128 p =
                    static_cast<unsigned __int128>(total_input) *
                    static_cast<unsigned __int128>(ratio_num);
                return static_cast<Bytes>(p / static_cast<unsigned __int128>(ratio_den));
            }
        }
        return total_input;
    }
};

// ---------------------------------------------------------------------------
// Service registry

struct OperationSpec {
    std::string name;
    int arity = 1;  // -1 means variadic
    TransformSpec transform;
};

struct ServiceSpec {
    std::string service_id;
    std::string host_node;
    std::vector<OperationSpec> operations;

    const OperationSpec* find_op(const std::string& op) const {
        for (const auto& o : operations)
            if (o.name == op) return &o;
        return nullptr;
    }
};

using Registry = std::vector<ServiceSpec>;

inline const ServiceSpec* find_service(const Registry& reg, const std::string& id) {
    for (const auto& s : reg)
        if (s.service_id == id) return &s;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Workflow patterns

struct ServiceRef {
    std::string service_id;
    std::string op;
};

/// One composite stage: invoke `service.op` on the concatenation of the
/// listed inputs. An input index of kInitialInput names the workflow's
/// initial payload; other indices name earlier stage outputs.
struct CompositeStage {
    ServiceRef service;
    std::vector<int> inputs;
};

inline constexpr int kInitialInput = -1;

enum class PatternKind { Sequence, FanIn, FanOut, Composite };

struct WorkflowPattern {
    PatternKind kind = PatternKind::Sequence;
    Bytes initial_input_bytes = 0;

    // Sequence
    std::vector<ServiceRef> sequence;
    // FanIn
    std::vector<ServiceRef> sources;
    ServiceRef sink;
    // FanOut
    ServiceRef source;
    std::vector<ServiceRef> sinks;
    // Composite
    std::vector<CompositeStage> stages;
    std::vector<int> final_stages;  // empty => last stage
};

// ---------------------------------------------------------------------------
// Topology

enum class LinkClass { SameServer = 0, Lan = 1, Wan = 2 };

inline const char* to_string(LinkClass c) {
    switch (c) {
        case LinkClass::SameServer: return "same_server";
        case LinkClass::Lan: return "lan";
        case LinkClass::Wan: return "wan";
    }
    return "?";
}

/// transfer time of n bytes = latency + per-message overhead + n / bandwidth.
struct LinkModel {
    double latency_ms = 0.0;
    double bandwidth_bytes_per_ms = 1.0;
    double per_message_overhead_ms = 0.0;
    LinkClass link_class = LinkClass::Lan;
};

enum class NodeRole { Engine, Proxy, ServiceHost };

struct Topology {
    std::vector<std::pair<std::string, NodeRole>> nodes;
    // symmetric links, keyed on an ordered node pair
    std::map<std::pair<std::string, std::string>, LinkModel> links;
    std::map<std::string, std::string> service_nodes;  // service id -> node
    std::map<std::string, std::string> proxy_nodes;    // proxy id -> node
    std::map<std::string, std::string> proxy_of;       // service id -> proxy id
    std::string engine_node = "engine";

    void add_link(std::string a, std::string b, LinkModel m) {
        if (b < a) std::swap(a, b);
        links[{a, b}] = m;
    }

    bool has_node(const std::string& id) const {
        for (const auto& [n, r] : nodes)
            if (n == id) return true;
        return false;
    }

    const LinkModel* find_link(std::string a, std::string b) const {
        if (b < a) std::swap(a, b);
        auto it = links.find({a, b});
        return it == links.end() ? nullptr : &it->second;
    }

    /// Same-node traffic is free; otherwise a link must exist.
    LinkModel link(const std::string& a, const std::string& b) const {
        if (a == b)
            return LinkModel{0.0, 1.0, 0.0, LinkClass::SameServer};
        if (const LinkModel* m = find_link(a, b)) return *m;
        throw std::runtime_error("no link between '" + a + "' and '" + b + "'");
    }

    const std::string& node_of_service(const std::string& service) const {
        auto it = service_nodes.find(service);
        if (it == service_nodes.end())
            throw std::runtime_error("service '" + service + "' has no host node");
        return it->second;
    }

    const std::string& node_of_proxy(const std::string& proxy) const {
        auto it = proxy_nodes.find(proxy);
        if (it == proxy_nodes.end())
            throw std::runtime_error("proxy '" + proxy + "' has no node");
        return it->second;
    }

    const std::string& proxy_for(const std::string& service) const {
        auto it = proxy_of.find(service);
        if (it == proxy_of.end())
            throw std::runtime_error("service '" + service + "' has no proxy");
        return it->second;
    }
};

// ---------------------------------------------------------------------------
// Transfer accounting

/// Per-link-class byte and message totals for one run. Data-plane only:
/// control messages never appear here.
struct TransferAccounting {
    std::array<Bytes, 3> bytes_by_class{0, 0, 0};
    std::array<std::int64_t, 3> messages_by_class{0, 0, 0};

    Bytes total_bytes() const {
        return bytes_by_class[0] + bytes_by_class[1] + bytes_by_class[2];
    }
    Bytes bytes(LinkClass c) const { return bytes_by_class[static_cast<int>(c)]; }
    std::int64_t messages(LinkClass c) const {
        return messages_by_class[static_cast<int>(c)];
    }

    /// Same-server transfers contribute zero bytes to every class; the
    /// message is still counted.
    void record(LinkClass c, Bytes n) {
        int i = static_cast<int>(c);
        messages_by_class[i] += 1;
        if (c != LinkClass::SameServer) bytes_by_class[i] += n;
    }

    bool operator==(const TransferAccounting&) const = default;
};

enum class Mode { Centralized, Circulate };
enum class Case { Best, Worst };

inline const char* to_string(Mode m) {
    return m == Mode::Centralized ? "centralized" : "circulate";
}
inline const char* to_string(Case c) { return c == Case::Best ? "best" : "worst"; }

}  // namespace circulate
