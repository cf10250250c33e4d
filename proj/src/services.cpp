#include "circulate/services.hpp"

#include <stdexcept>

namespace circulate {

std::uint64_t content_hash(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_string(std::uint64_t h, const std::string& s) {
    return content_hash(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()) ^
           (h * 0x9e3779b97f4a7c15ULL);
}

const OperationSpec& require_op(const ServiceBehavior& b, const std::string& op,
                                std::size_t n_inputs) {
    const OperationSpec* spec = b.spec.find_op(op);
    if (!spec)
        throw std::runtime_error("service '" + b.spec.service_id +
                                 "' has no operation '" + op + "'");
    if (spec->arity >= 0 && static_cast<std::size_t>(spec->arity) != n_inputs)
        throw std::runtime_error("operation '" + op + "' expects " +
                                 std::to_string(spec->arity) + " parameters, got " +
                                 std::to_string(n_inputs));
    return *spec;
}

}  // namespace

Blob generate_payload(std::uint64_t seed, Bytes n) {
    Blob out(static_cast<std::size_t>(n));
    std::uint64_t state = seed;
    std::size_t i = 0;
    while (i + 8 <= out.size()) {
        std::uint64_t w = splitmix64(state);
        for (int k = 0; k < 8; ++k) out[i++] = static_cast<std::uint8_t>(w >> (8 * k));
    }
    if (i < out.size()) {
        std::uint64_t w = splitmix64(state);
        for (int k = 0; i < out.size(); ++k) out[i++] = static_cast<std::uint8_t>(w >> (8 * k));
    }
    return out;
}

Blob apply(const ServiceBehavior& behavior, const std::string& op,
           const std::vector<const Blob*>& inputs, Bytes size_hint) {
    const OperationSpec& spec = require_op(behavior, op, inputs.size());
    Bytes total = 0;
    std::uint64_t digest = mix_string(mix_string(0, behavior.spec.service_id), op);
    for (const Blob* in : inputs) {
        total += static_cast<Bytes>(in->size());
        digest = digest * 0x100000001b3ULL + content_hash(*in);
    }
    if (inputs.empty()) {
        total = size_hint;
        digest = digest * 0x100000001b3ULL + static_cast<std::uint64_t>(size_hint);
    }
    return generate_payload(digest, spec.transform.output_size(total));
}

Bytes apply_size(const ServiceBehavior& behavior, const std::string& op,
                 const std::vector<Bytes>& input_sizes, Bytes size_hint) {
    const OperationSpec& spec = require_op(behavior, op, input_sizes.size());
    Bytes total = 0;
    for (Bytes n : input_sizes) total += n;
    if (input_sizes.empty()) total = size_hint;
    return spec.transform.output_size(total);
}

namespace {

ServiceBehavior make(const std::string& id, const std::string& op, int arity,
                     TransformSpec t) {
    ServiceBehavior b;
    b.spec.service_id = id;
    b.spec.operations.push_back({op, arity, t});
    return b;
}

}  // namespace

std::vector<ServiceBehavior> preset_registry(const std::string& name) {
    std::vector<ServiceBehavior> out;
    if (name == "patterns") {
        // grow feeds the sequence pattern, sink the fan-in, identity the
        // fan-out, half the tail of the end-to-end composite.
        out.push_back(make("grow", "grow", 1, TransformSpec::ratio(6, 5)));
        out.push_back(make("sink", "compose", -1, TransformSpec::ratio_of_concat(1, 5)));
        out.push_back(make("identity", "copy", 1, TransformSpec::identity()));
        out.push_back(make("half", "reduce", -1, TransformSpec::ratio_of_concat(1, 2)));
        return out;
    }
    if (name == "montage") {
        out.push_back(make("mProject", "reproject", 1, TransformSpec::identity()));
        // mDiff/mFitPlane: midpoint of the 15-20% output range
        out.push_back(make("mDiffFit", "diff_fit", -1, TransformSpec::ratio(7, 40)));
        out.push_back(make("mConcatFit", "concat_fit", -1,
                           TransformSpec::ratio_of_concat(1, 5)));
        out.push_back(make("mBgModel", "model", -1, TransformSpec::ratio_of_concat(1, 5)));
        out.push_back(make("mBackground", "rectify", 1, TransformSpec::identity()));
        // mAdd: midpoint of the 70-90% co-addition range
        out.push_back(make("mAdd", "coadd", -1, TransformSpec::ratio_of_concat(4, 5)));
        return out;
    }
    throw std::runtime_error("unknown preset registry '" + name + "'");
}

}  // namespace circulate
