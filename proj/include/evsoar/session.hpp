#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "evsoar/agent.hpp"
#include "evsoar/edge.hpp"
#include "evsoar/netlink.hpp"
#include "evsoar/wire.hpp"

namespace evsoar::session {

struct TranscriptEntry {
    bool uplink = false; // vehicle -> edge
    wire::MessageKind kind = wire::MessageKind::ack;
    uint64_t frame_bytes = 0;
    double t_send_ms = 0.0;
    double t_recv_ms = 0.0;
};

// transfer indices (counting every transmission, retries included) whose
// delivered frame gets one byte flipped
struct FaultPlan {
    std::set<uint64_t> corrupt_transfers;
};

struct SessionReport {
    bool authenticated = false;
    bool aborted = false;
    std::string abort_reason;
    uint64_t session_id = 0;
    uint64_t bytes_up = 0;
    uint64_t bytes_down = 0;
    double start_ms = 0.0;
    double end_ms = 0.0;
    std::vector<TranscriptEntry> transcript;
    uint64_t log_records_uploaded = 0;
    uint32_t actions_applied = 0;
    uint32_t actions_rejected = 0;
    bool model_updated = false;
    // first alert handled at the edge -> last response action acked; negative
    // when the session produced no agent-directed response
    double response_latency_ms = -1.0;

    double elapsed_ms() const { return end_ms - start_ms; }
    uint64_t count_kind(wire::MessageKind k, bool uplink) const;
};

// One charging-cable session following the fixed order
// HELLO -> AUTH_OK -> uploads (ALERTs, then LOG_BATCH or FL_PARAMS) ->
// downloads (RESPONSE_ACTIONs, then MODEL_UPDATEs) -> DISCONNECT.
// Every upload/download is acknowledged. A corrupted frame is retransmitted
// once; a second corruption aborts the session with unacked buffers retained.
SessionReport charge_session(agent::AgentState& agent, edge::EdgeNode& edge,
                             const netlink::LinkConfig& link, double start_ms, uint64_t seed,
                             const FaultPlan* faults = nullptr);

} // namespace evsoar::session
