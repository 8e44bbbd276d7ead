#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evsoar/central.hpp"
#include "evsoar/learn.hpp"
#include "evsoar/netlink.hpp"
#include "evsoar/types.hpp"
#include "evsoar/wire.hpp"

namespace evsoar::edge {

// score bands: < 0.7 low, < 0.9 medium, >= 0.9 high
Severity severity_from_score(double score);

struct Rule {
    std::string rule_id;
    AlertKind kind = AlertKind::anomaly;
    Severity min_severity = Severity::low;
    std::vector<ActionKind> actions;
};

struct RuleSet {
    std::vector<Rule> rules; // first match by declaration order
    std::string fallback_rule_id = "fallback-notify";
};

RuleSet default_ruleset();
RuleSet load_rules_config(const std::string& path);

struct HistoryEntry {
    double time_ms = 0.0;
    uint64_t vehicle_id = 0;
    AlertKind kind = AlertKind::anomaly;
    Severity severity = Severity::low;
    std::string rule_id;
    ActionKind action = ActionKind::NotifyCentral;
};

struct RelayFailure {
    double time_ms = 0.0;
    wire::MessageKind kind = wire::MessageKind::ack;
};

struct EdgeNode {
    uint32_t edge_id = 0;
    netlink::LinkConfig vehicle_link;
    netlink::LinkConfig central_link;
    RuleSet rules;
    central::CentralState* central = nullptr;
    central::PoolKey pool = central::PoolKey::mix(); // where relayed FL params land

    std::optional<learn::CentralModel> model; // assessment model, never trained here
    uint32_t model_version = 0;
    uint64_t window_gap_us = 100000; // idle gap that separates analysis windows

    // downlink queues drained at the vehicle's next session
    std::map<uint64_t, std::vector<wire::Message>> queued_downlinks;

    uint64_t next_session = 1;
    std::vector<HistoryEntry> history;
    std::vector<RelayFailure> relay_failures;
    uint64_t relay_count = 0;

    int corrupt_next_relays = 0; // fault injection on the central link
};

EdgeNode make_edge(uint32_t edge_id, const netlink::LinkConfig& vehicle_link,
                   const netlink::LinkConfig& central_link, central::CentralState* central);

// shared-secret session token; both sides derive it from the vehicle id
std::array<uint8_t, 16> auth_token(uint64_t vehicle_id);

// one alert per analysis window scoring >= the decision threshold; empty when
// no model is installed (the batch is relayed unassessed)
std::vector<Alert> assess_logs(const EdgeNode& edge, std::span<const LogRecord> batch,
                               uint64_t vehicle_id);

std::vector<ResponseAction> apply_rules(const Alert& alert, const RuleSet& rules);

struct RelayResult {
    bool delivered = false;
    double elapsed_ms = 0.0;
    uint64_t bytes = 0;
};

// forwards an upstream message to the Central SOAR over the central link;
// corrupted delivery is retransmitted once, then dropped and logged
RelayResult relay_to_central(EdgeNode& edge, const wire::Message& msg, uint32_t oem_id,
                             uint64_t seed, double now_ms);

enum class Delivery { queued, replaced_older, ignored_stale };
// queues a MODEL_UPDATE for a vehicle's next session; an older version never
// replaces a newer queued or installed one
Delivery distribute_model(EdgeNode& edge, uint64_t vehicle_id, const wire::ModelUpdate& update);

// install the assessment model at this edge (central -> edge push)
bool set_model(EdgeNode& edge, const learn::CentralModel& model, uint32_t version);

std::string history_csv(const EdgeNode& edge);

} // namespace evsoar::edge
