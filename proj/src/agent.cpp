#include "evsoar/agent.hpp"

#include <algorithm>
#include <stdexcept>

#include "evsoar/edge.hpp" // auth_token

namespace evsoar::agent {

const char* to_string(ComponentStatus s) {
    switch (s) {
        case ComponentStatus::active: return "active";
        case ComponentStatus::isolated: return "isolated";
        case ComponentStatus::deactivated: return "deactivated";
        case ComponentStatus::patched: return "patched";
        case ComponentStatus::rolled_back: return "rolled_back";
    }
    return "?";
}

AgentState make_agent(uint64_t vehicle_id, uint32_t oem_id, uint32_t component_count,
                      const PolicyConfig& policy) {
    AgentState a;
    a.vehicle_id = vehicle_id;
    a.oem_id = oem_id;
    a.policy = policy;
    a.token = edge::auth_token(vehicle_id);
    for (uint32_t c = 0; c < component_count; ++c) a.component_status[c] = ComponentStatus::active;
    return a;
}

void record(AgentState& agent, const LogRecord& rec) {
    if (agent.pending_logs.size() >= agent.policy.max_buffer) {
        agent.pending_logs.pop_front();
        ++agent.records_evicted;
    }
    agent.pending_logs.push_back(rec);
}

std::optional<Alert> local_infer(AgentState& agent, std::span<const LogRecord> window) {
    if (agent.policy.mode != Mode::fl_params)
        throw std::logic_error("local_infer: agent not in fl_params mode");
    const auto fv = learn::extract_features(window);
    const double score = learn::ffnn_predict(agent.local_params, fv);
    if (score < agent.policy.alert_threshold) return std::nullopt;

    std::map<uint32_t, uint32_t> counts;
    for (const auto& r : window) ++counts[r.component_id];
    uint32_t suspect = 0, best = 0;
    for (const auto& [comp, c] : counts) {
        if (c > best) {
            best = c;
            suspect = comp;
        }
    }
    Alert a;
    a.vehicle_id = agent.vehicle_id;
    a.component_id = suspect;
    a.kind = AlertKind::anomaly;
    a.severity = edge::severity_from_score(score);
    a.score = static_cast<float>(score);
    a.source = AlertSource::agent_fl;
    return a;
}

ApplyOutcome apply_response(AgentState& agent, const ResponseAction& action) {
    if (action.kind == ActionKind::NotifyCentral) return ApplyOutcome::unchanged;
    auto it = agent.component_status.find(action.component_id);
    if (it == agent.component_status.end()) return ApplyOutcome::rejected;

    ComponentStatus target = it->second;
    switch (action.kind) {
        case ActionKind::DeactivateComponent: target = ComponentStatus::deactivated; break;
        case ActionKind::IsolateComponent: target = ComponentStatus::isolated; break;
        case ActionKind::ApplyPatch: target = ComponentStatus::patched; break;
        case ActionKind::RollbackUpdate: target = ComponentStatus::rolled_back; break;
        case ActionKind::UpdateFirmware: target = ComponentStatus::patched; break;
        case ActionKind::NotifyCentral: break;
    }
    if (it->second == target) return ApplyOutcome::unchanged;
    if (target == ComponentStatus::patched) ++agent.patch_level[action.component_id];
    it->second = target;
    return ApplyOutcome::applied;
}

} // namespace evsoar::agent
