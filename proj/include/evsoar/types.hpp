#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace evsoar {

enum class AttackTag : uint8_t { none = 0, dos = 1, fuzzing = 2, spoofing = 3, tamper = 4 };

struct LogRecord {
    uint64_t timestamp_us = 0;
    uint32_t component_id = 0;
    uint32_t message_id = 0;
    std::array<uint8_t, 8> payload{};
    AttackTag attack_tag = AttackTag::none;

    bool operator==(const LogRecord&) const = default;
};

enum class AlertKind : uint8_t { dos = 1, fuzzing = 2, spoofing = 3, tamper = 4, anomaly = 5 };
enum class Severity : uint8_t { low = 0, medium = 1, high = 2 };
enum class AlertSource : uint8_t { edge_ml = 0, agent_fl = 1, rule = 2 };

struct Alert {
    uint64_t vehicle_id = 0;
    uint32_t component_id = 0;
    AlertKind kind = AlertKind::anomaly;
    Severity severity = Severity::low;
    float score = 0.0f;
    AlertSource source = AlertSource::edge_ml;

    bool operator==(const Alert&) const = default;
};

enum class ActionKind : uint8_t {
    DeactivateComponent = 1,
    IsolateComponent = 2,
    ApplyPatch = 3,
    RollbackUpdate = 4,
    UpdateFirmware = 5,
    NotifyCentral = 6,
};

struct ResponseAction {
    ActionKind kind = ActionKind::NotifyCentral;
    uint32_t component_id = 0;
    std::string rationale; // rule id that fired

    bool operator==(const ResponseAction&) const = default;
};

const char* to_string(AttackTag t);
const char* to_string(AlertKind k);
const char* to_string(Severity s);
const char* to_string(AlertSource s);
const char* to_string(ActionKind k);

} // namespace evsoar
