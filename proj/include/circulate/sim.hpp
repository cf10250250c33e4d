#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "circulate/types.hpp"

namespace circulate {

enum class MsgKind { Control, Data };

struct TraceEvent {
    double depart_ms = 0.0;
    double arrive_ms = 0.0;
    std::string from;
    std::string to;
    MsgKind kind = MsgKind::Data;
    Bytes bytes = 0;
    LinkClass link_class = LinkClass::SameServer;
};

/// Proxy hop costs: per_call_ms covers disk write and bookkeeping per proxy
/// operation; per_ref_bytes is the control-plane weight of each reference
/// carried in a message.
struct OverheadModel {
    double per_call_ms = 0.0;
    Bytes per_ref_bytes = 0;
};

/// Deterministic virtual-clock network. A transfer occupies the sender's tx
/// interface and the receiver's rx interface for its serialization time, so
/// sends on the same link are serialized and fan-in to one node contends on
/// that node's interface; transfers between fully disjoint endpoints overlap.
class SimulatedNetwork {
public:
    SimulatedNetwork(const Topology& topology, OverheadModel overhead = {},
                     std::uint64_t seed = 0, double jitter = 0.0)
        : topo_(&topology), overhead_(overhead), rng_state_(seed ^ 0x6a09e667f3bcc909ULL),
          jitter_(jitter) {}

    const Topology& topology() const { return *topo_; }
    const OverheadModel& overhead() const { return overhead_; }

    /// Nominal size of a control message carrying `refs` data references.
    Bytes control_bytes(int refs) const {
        return kControlBaseBytes + overhead_.per_ref_bytes * refs;
    }

    /// Schedule a transfer departing at `depart`; returns the arrival time
    /// and records the event. Same-node sends are free and instantaneous.
    double send(const std::string& from, const std::string& to, MsgKind kind,
                Bytes bytes, double depart);

    /// Serial per-proxy processing cost: returns the completion time of a
    /// proxy operation requested at `t`.
    double proxy_call(const std::string& proxy, double t);

    const std::vector<TraceEvent>& events() const { return events_; }
    const TransferAccounting& accounting() const { return acc_; }

    static constexpr Bytes kControlBaseBytes = 256;

private:
    double noise();

    const Topology* topo_;
    OverheadModel overhead_;
    std::uint64_t rng_state_;
    double jitter_;
    std::map<std::string, double> tx_free_;
    std::map<std::string, double> rx_free_;
    std::map<std::string, double> proxy_free_;
    std::vector<TraceEvent> events_;
    TransferAccounting acc_;
};

}  // namespace circulate
