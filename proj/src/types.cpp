#include "evsoar/types.hpp"

namespace evsoar {

const char* to_string(AttackTag t) {
    switch (t) {
        case AttackTag::none: return "none";
        case AttackTag::dos: return "dos";
        case AttackTag::fuzzing: return "fuzzing";
        case AttackTag::spoofing: return "spoofing";
        case AttackTag::tamper: return "tamper";
    }
    return "?";
}

const char* to_string(AlertKind k) {
    switch (k) {
        case AlertKind::dos: return "dos";
        case AlertKind::fuzzing: return "fuzzing";
        case AlertKind::spoofing: return "spoofing";
        case AlertKind::tamper: return "tamper";
        case AlertKind::anomaly: return "anomaly";
    }
    return "?";
}

const char* to_string(Severity s) {
    switch (s) {
        case Severity::low: return "low";
        case Severity::medium: return "medium";
        case Severity::high: return "high";
    }
    return "?";
}

const char* to_string(AlertSource s) {
    switch (s) {
        case AlertSource::edge_ml: return "edge_ml";
        case AlertSource::agent_fl: return "agent_fl";
        case AlertSource::rule: return "rule";
    }
    return "?";
}

const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::DeactivateComponent: return "DeactivateComponent";
        case ActionKind::IsolateComponent: return "IsolateComponent";
        case ActionKind::ApplyPatch: return "ApplyPatch";
        case ActionKind::RollbackUpdate: return "RollbackUpdate";
        case ActionKind::UpdateFirmware: return "UpdateFirmware";
        case ActionKind::NotifyCentral: return "NotifyCentral";
    }
    return "?";
}

} // namespace evsoar
