#include "circulate/wire.hpp"

#include <random>
#include <stdexcept>

#include "circulate/config.hpp"

namespace circulate::wire {

using nlohmann::json;

std::array<std::uint8_t, 16> fresh_correlation_id() {
    static std::mt19937_64 rng{std::random_device{}()};
    std::array<std::uint8_t, 16> id;
    for (int half = 0; half < 2; ++half) {
        std::uint64_t w = rng();
        for (int k = 0; k < 8; ++k)
            id[static_cast<std::size_t>(8 * half + k)] =
                static_cast<std::uint8_t>(w >> (8 * k));
    }
    return id;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Reader {
    const std::uint8_t* p;
    std::size_t left;
    std::uint8_t u8() {
        if (left < 1) throw std::runtime_error("truncated frame");
        --left;
        return *p++;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | u8();
        return v;
    }
    const std::uint8_t* take(std::size_t n) {
        if (left < n) throw std::runtime_error("truncated frame");
        const std::uint8_t* at = p;
        p += n;
        left -= n;
        return at;
    }
};

}  // namespace

std::vector<std::uint8_t> encode(const Message& m, bool is_response) {
    std::vector<std::uint8_t> out;
    std::string body = m.body.dump();
    std::size_t blob_bytes = 0;
    for (const Blob& b : m.blobs) blob_bytes += b.size() + 8;
    out.reserve(1 + 1 + 16 + (is_response ? 1 : 0) + 4 + body.size() + blob_bytes);

    out.push_back(m.version);
    out.push_back(static_cast<std::uint8_t>(m.op));
    out.insert(out.end(), m.correlation.begin(), m.correlation.end());
    if (is_response) out.push_back(m.status);
    put_u32(out, static_cast<std::uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
    for (const Blob& b : m.blobs) {
        put_u64(out, b.size());
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

Message decode(const std::uint8_t* data, std::size_t n, bool is_response) {
    Reader r{data, n};
    Message m;
    m.version = r.u8();
    if (m.version != kVersion)
        throw std::runtime_error("unsupported protocol version " +
                                 std::to_string(m.version));
    std::uint8_t op = r.u8();
    if (op < 1 || op > 12) throw std::runtime_error("unknown opcode");
    m.op = static_cast<Op>(op);
    const std::uint8_t* corr = r.take(16);
    std::copy(corr, corr + 16, m.correlation.begin());
    if (is_response) m.status = r.u8();
    std::uint32_t body_len = r.u32();
    const std::uint8_t* body = r.take(body_len);
    m.body = json::parse(body, body + body_len);
    while (r.left > 0) {
        std::uint64_t len = r.u64();
        const std::uint8_t* at = r.take(static_cast<std::size_t>(len));
        m.blobs.emplace_back(at, at + len);
    }
    return m;
}

json spec_to_json(const ServiceSpec& spec, double compute_delay_ms) {
    json ops = json::array();
    for (const auto& o : spec.operations) {
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
    return json{{"service_id", spec.service_id},
                {"host_node", spec.host_node},
                {"compute_delay_ms", compute_delay_ms},
                {"operations", ops}};
}

ServiceSpec spec_from_json(const json& j, double* compute_delay_ms) {
    ServiceSpec spec;
    spec.service_id = j.at("service_id").get<std::string>();
    spec.host_node = j.value("host_node", "");
    if (compute_delay_ms) *compute_delay_ms = j.value("compute_delay_ms", 0.0);
    for (const auto& op : j.at("operations")) {
        OperationSpec o;
        o.name = op.at("name").get<std::string>();
        o.arity = op.value("arity", 1);
        o.transform = parse_transform(op.at("transform"));
        spec.operations.push_back(std::move(o));
    }
    return spec;
}

}  // namespace circulate::wire
