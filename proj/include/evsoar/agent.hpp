#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "evsoar/learn.hpp"
#include "evsoar/types.hpp"

namespace evsoar::agent {

enum class ComponentStatus : uint8_t { active, isolated, deactivated, patched, rolled_back };
const char* to_string(ComponentStatus s);

enum class Mode { ml_logs, fl_params };

struct PolicyConfig {
    size_t max_buffer = 200000;
    Mode mode = Mode::ml_logs;
    uint32_t local_epochs = 1;
    double local_learning_rate = 0.08;
    double alert_threshold = 0.9; // probability at or above which an alert fires
};

struct AgentState {
    uint64_t vehicle_id = 0;
    uint32_t oem_id = 0;
    std::deque<LogRecord> pending_logs;
    std::vector<Alert> pending_alerts;
    learn::ModelParams local_params;
    uint32_t params_version = 0;
    bool has_new_params = false;        // trained, upload not yet acknowledged
    bool trained_since_update = false;  // one local pass per received global
    std::vector<learn::FeatureVector> training_windows;
    std::map<uint32_t, ComponentStatus> component_status;
    std::map<uint32_t, uint32_t> patch_level; // symbolic version per component
    PolicyConfig policy;
    std::array<uint8_t, 16> token{};

    // buffer conservation accounting: buffered + uploaded + evicted
    uint64_t records_evicted = 0;
    uint64_t records_uploaded = 0;
};

AgentState make_agent(uint64_t vehicle_id, uint32_t oem_id, uint32_t component_count,
                      const PolicyConfig& policy);

// append; FIFO eviction once the buffer is at policy.max_buffer
void record(AgentState& agent, const LogRecord& rec);

// fl_params mode only (throws std::logic_error otherwise); alert fires iff
// predicted probability >= policy.alert_threshold
std::optional<Alert> local_infer(AgentState& agent, std::span<const LogRecord> window);

enum class ApplyOutcome { applied, unchanged, rejected };

// Component transition table (see README): each action kind maps the
// component to a fixed status, so re-applying is idempotent.
//   DeactivateComponent -> deactivated    IsolateComponent -> isolated
//   ApplyPatch          -> patched        RollbackUpdate   -> rolled_back
//   UpdateFirmware      -> patched (version bump)
//   NotifyCentral       -> no state change
ApplyOutcome apply_response(AgentState& agent, const ResponseAction& action);

} // namespace evsoar::agent
