#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evsoar/learn.hpp"
#include "evsoar/types.hpp"

namespace evsoar::wire {

// Frame layout (all integers big-endian):
//   magic 0x45 0x56 | version u8 | kind u8 | length u32 | payload | crc32 u32
// crc32 is IEEE 802.3 (poly 0xEDB88320, reflected) over the payload bytes.
// Payloads start with the session id (u64) for every kind except HELLO and
// DISCONNECT; see README for the per-kind body layouts.
enum class MessageKind : uint8_t {
    hello = 0x01,
    auth_ok = 0x02,
    log_batch = 0x03,
    fl_params = 0x04,
    model_update = 0x05,
    alert = 0x06,
    response_action = 0x07,
    ack = 0x08,
    disconnect = 0x09,
};

constexpr uint8_t kMagic0 = 0x45;
constexpr uint8_t kMagic1 = 0x56;
constexpr uint8_t kVersion = 1;
constexpr size_t kFrameOverhead = 12; // magic(2) + version + kind + length(4) + crc(4)

struct Hello {
    uint64_t vehicle_id = 0;
    uint32_t oem_id = 0;
    std::array<uint8_t, 16> token{};
    bool operator==(const Hello&) const = default;
};
struct AuthOk {
    bool operator==(const AuthOk&) const = default;
};
struct LogBatch {
    std::vector<LogRecord> records;
    bool operator==(const LogBatch&) const = default;
};
struct FlParams {
    learn::ModelParams params;
    bool operator==(const FlParams&) const = default;
};
struct ModelUpdate {
    uint32_t version = 0;
    std::variant<learn::CentralModel, learn::ModelParams> model;
    bool operator==(const ModelUpdate&) const = default;
};
struct AlertBody {
    Alert alert;
    bool operator==(const AlertBody&) const = default;
};
struct ResponseActionBody {
    ResponseAction action;
    bool operator==(const ResponseActionBody&) const = default;
};
struct Ack {
    bool operator==(const Ack&) const = default;
};
struct Disconnect {
    bool operator==(const Disconnect&) const = default;
};

using Body = std::variant<Hello, AuthOk, LogBatch, FlParams, ModelUpdate, AlertBody,
                          ResponseActionBody, Ack, Disconnect>;

struct Message {
    uint8_t version = kVersion;
    uint64_t session_id = 0;
    Body body;

    MessageKind kind() const;
    bool operator==(const Message&) const = default;
};

enum class DecodeStatus { ok, protocol_error, corruption, unsupported };

struct DecodeResult {
    DecodeStatus status = DecodeStatus::protocol_error;
    std::string detail;
    Message message;

    bool ok() const { return status == DecodeStatus::ok; }
};

uint32_t crc32(std::span<const uint8_t> data);

// throws std::length_error if the body exceeds the u32 length field
std::vector<uint8_t> encode(const Message& msg);
DecodeResult decode(std::span<const uint8_t> frame);

const char* to_string(MessageKind k);
const char* to_string(DecodeStatus s);

// convenience constructors
Message make_hello(uint64_t vehicle_id, uint32_t oem_id, const std::array<uint8_t, 16>& token);
Message make_auth_ok(uint64_t session);
Message make_log_batch(uint64_t session, std::vector<LogRecord> records);
Message make_fl_params(uint64_t session, learn::ModelParams params);
Message make_model_update(uint64_t session, uint32_t version,
                          std::variant<learn::CentralModel, learn::ModelParams> model);
Message make_alert(uint64_t session, const Alert& alert);
Message make_response_action(uint64_t session, const ResponseAction& action);
Message make_ack(uint64_t session);
Message make_disconnect();

} // namespace evsoar::wire
