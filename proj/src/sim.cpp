#include "circulate/sim.hpp"

#include <algorithm>

namespace circulate {

double SimulatedNetwork::noise() {
    if (jitter_ <= 0.0) return 1.0;
    // splitmix64 -> uniform in [1 - jitter, 1 + jitter]
    std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    double u = static_cast<double>(z >> 11) / 9007199254740992.0;  // [0,1)
    return 1.0 + jitter_ * (2.0 * u - 1.0);
}

double SimulatedNetwork::send(const std::string& from, const std::string& to,
                              MsgKind kind, Bytes bytes, double depart) {
    TraceEvent ev;
    ev.depart_ms = depart;
    ev.from = from;
    ev.to = to;
    ev.kind = kind;
    ev.bytes = bytes;
    if (from == to) {
        ev.arrive_ms = depart;
        ev.link_class = LinkClass::SameServer;
        events_.push_back(ev);
        if (kind == MsgKind::Data) acc_.record(LinkClass::SameServer, bytes);
        return depart;
    }
    LinkModel link = topo_->link(from, to);
    if (link.link_class == LinkClass::SameServer) {
        // distinct endpoints declared same-server: zero transfer cost
        ev.arrive_ms = depart;
        ev.link_class = LinkClass::SameServer;
        events_.push_back(ev);
        if (kind == MsgKind::Data) acc_.record(LinkClass::SameServer, bytes);
        return depart;
    }
    double xfer = static_cast<double>(bytes) / link.bandwidth_bytes_per_ms;
    double start = std::max({depart, tx_free_[from], rx_free_[to]});
    tx_free_[from] = rx_free_[to] = start + xfer;
    double arrive = start + (link.latency_ms + link.per_message_overhead_ms + xfer) * noise();
    ev.arrive_ms = arrive;
    ev.link_class = link.link_class;
    events_.push_back(ev);
    if (kind == MsgKind::Data) acc_.record(link.link_class, bytes);
    return arrive;
}

double SimulatedNetwork::proxy_call(const std::string& proxy, double t) {
    double start = std::max(t, proxy_free_[proxy]);
    double done = start + overhead_.per_call_ms;
    proxy_free_[proxy] = done;
    return done;
}

}  // namespace circulate
