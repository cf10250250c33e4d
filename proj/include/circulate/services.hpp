#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circulate/types.hpp"

namespace circulate {

using Blob = std::vector<std::uint8_t>;

/// FNV-1a, used for integrity checks and to seed payload generation.
std::uint64_t content_hash(const std::uint8_t* data, std::size_t n);
inline std::uint64_t content_hash(const Blob& b) {
    return content_hash(b.data(), b.size());
}

/// n pseudorandom bytes from a 64-bit seed (splitmix64 stream).
Blob generate_payload(std::uint64_t seed, Bytes n);

/// A mock "vanilla" service: pure size transform, pseudorandom content.
struct ServiceBehavior {
    ServiceSpec spec;
    double synthetic_compute_delay_ms = 0.0;
};

/// Execute one operation. Output length obeys the operation's transform on
/// the summed input length; with no inputs the size hint stands in for the
/// input total. Content depends only on (service, op, inputs), never on the
/// execution mode, so result hashes are comparable across runs.
Blob apply(const ServiceBehavior& behavior, const std::string& op,
           const std::vector<const Blob*>& inputs, Bytes size_hint = 0);

/// Size-only flavour of apply, for simulated runs that never materialize
/// payload bytes.
Bytes apply_size(const ServiceBehavior& behavior, const std::string& op,
                 const std::vector<Bytes>& input_sizes, Bytes size_hint = 0);

/// Built-in behavior sets: "patterns" carries the benchmark size laws
/// (grow 1.2, sink 0.2, identity, half 0.5); "montage" carries the mosaic
/// pipeline laws (mProject, mDiffFit, mConcatFit, mBgModel, mBackground, mAdd).
std::vector<ServiceBehavior> preset_registry(const std::string& name);

}  // namespace circulate
