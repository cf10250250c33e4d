#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "circulate/services.hpp"
#include "circulate/types.hpp"

namespace circulate::wire {

inline constexpr std::uint8_t kVersion = 1;

enum class Op : std::uint8_t {
    Invoke = 1,
    Upload = 2,
    Deliver = 3,
    Stage = 4,
    ReturnData = 5,
    FlushTempData = 6,
    AddService = 7,
    RemoveService = 8,
    ListServices = 9,
    ListOperations = 10,
    ListOpParameters = 11,
    ListOpReturnType = 12,
};

/// One protocol frame. Layout on the wire, after an 8-byte big-endian
/// length prefix covering everything below:
///   version: u8 | opcode: u8 | correlation id: 16 bytes
///   [status: u8 — responses only; 0 = ok, 1..4 = ProxyError kind]
///   json length: u32 be | json body | blobs, each u64 be length + bytes
struct Message {
    std::uint8_t version = kVersion;
    Op op = Op::Invoke;
    std::array<std::uint8_t, 16> correlation{};
    std::uint8_t status = 0;
    nlohmann::json body = nlohmann::json::object();
    std::vector<Blob> blobs;
};

std::array<std::uint8_t, 16> fresh_correlation_id();

/// Encode the frame payload (without the 8-byte length prefix).
std::vector<std::uint8_t> encode(const Message& m, bool is_response);
Message decode(const std::uint8_t* data, std::size_t n, bool is_response);

/// JSON round-trip for service specs carried by add_service.
nlohmann::json spec_to_json(const ServiceSpec& spec, double compute_delay_ms = 0.0);
ServiceSpec spec_from_json(const nlohmann::json& j, double* compute_delay_ms = nullptr);

}  // namespace circulate::wire
