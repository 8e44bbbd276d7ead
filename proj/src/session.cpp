#include "evsoar/session.hpp"

#include <algorithm>

#include "evsoar/central.hpp"

namespace evsoar::session {

uint64_t SessionReport::count_kind(wire::MessageKind k, bool up) const {
    uint64_t n = 0;
    for (const auto& e : transcript)
        if (e.kind == k && e.uplink == up) ++n;
    return n;
}

namespace {

class Channel {
public:
    Channel(const netlink::LinkConfig& link, uint64_t seed, const FaultPlan* faults,
            SessionReport& report, double start_ms)
        : link_(link), seed_(seed), faults_(faults), report_(report), now_(start_ms) {}

    double now() const { return now_; }

    // delivers msg, retransmitting once on corruption; false = aborted
    bool send(const wire::Message& msg, bool uplink, wire::Message* out = nullptr) {
        const auto frame = wire::encode(msg);
        for (int attempt = 0; attempt < 2; ++attempt) {
            Rng rng(seed_, transfer_index_);
            ++transfer_index_;
            const double t_send = now_;
            now_ += netlink::transfer_time(link_, frame.size(), rng).total_ms;

            TranscriptEntry e;
            e.uplink = uplink;
            e.kind = msg.kind();
            e.frame_bytes = frame.size();
            e.t_send_ms = t_send;
            e.t_recv_ms = now_;
            report_.transcript.push_back(e);
            (uplink ? report_.bytes_up : report_.bytes_down) += frame.size();

            auto delivered = frame;
            if (faults_ && faults_->corrupt_transfers.contains(transfer_index_ - 1))
                delivered[delivered.size() / 2] ^= 0x01;
            const auto decoded = wire::decode(delivered);
            if (decoded.status == wire::DecodeStatus::corruption) continue;
            if (!decoded.ok()) return false;
            if (out) *out = decoded.message;
            return true;
        }
        return false;
    }

private:
    const netlink::LinkConfig& link_;
    uint64_t seed_;
    const FaultPlan* faults_;
    SessionReport& report_;
    double now_;
    uint64_t transfer_index_ = 0;
};

} // namespace

SessionReport charge_session(agent::AgentState& agent, edge::EdgeNode& edge,
                             const netlink::LinkConfig& link, double start_ms, uint64_t seed,
                             const FaultPlan* faults) {
    SessionReport report;
    report.start_ms = start_ms;
    Channel ch(link, seed, faults, report, start_ms);

    auto abort = [&](const std::string& why) {
        report.aborted = true;
        report.abort_reason = why;
        report.end_ms = ch.now();
        return report;
    };

    // handshake
    wire::Message hello_rx;
    if (!ch.send(wire::make_hello(agent.vehicle_id, agent.oem_id, agent.token), true, &hello_rx))
        return abort("hello undeliverable");
    const auto& hello = std::get<wire::Hello>(hello_rx.body);
    if (hello.token != edge::auth_token(hello.vehicle_id)) {
        ch.send(wire::make_disconnect(), false);
        return abort("authentication failed");
    }
    const uint64_t sid = edge.next_session++;
    if (!ch.send(wire::make_auth_ok(sid), false)) return abort("auth_ok undeliverable");
    report.authenticated = true;
    report.session_id = sid;

    double first_alert_ms = -1.0;
    double last_action_ack_ms = -1.0;
    std::vector<ResponseAction> session_actions;

    auto handle_alert = [&](const Alert& alert) {
        if (first_alert_ms < 0.0) first_alert_ms = ch.now();
        const auto actions = edge::apply_rules(alert, edge.rules);
        for (const auto& act : actions) {
            edge.history.push_back(
                {ch.now(), alert.vehicle_id, alert.kind, alert.severity, act.rationale, act.kind});
            if (act.kind == ActionKind::NotifyCentral) {
                edge::relay_to_central(edge, wire::make_alert(sid, alert), agent.oem_id, seed,
                                       ch.now());
            } else {
                session_actions.push_back(act);
            }
        }
    };

    // uploads: alerts first
    while (!agent.pending_alerts.empty()) {
        const Alert alert = agent.pending_alerts.front();
        wire::Message rx;
        if (!ch.send(wire::make_alert(sid, alert), true, &rx)) return abort("alert undeliverable");
        handle_alert(std::get<wire::AlertBody>(rx.body).alert);
        if (!ch.send(wire::make_ack(sid), false)) return abort("alert ack undeliverable");
        agent.pending_alerts.erase(agent.pending_alerts.begin());
    }

    if (agent.policy.mode == agent::Mode::ml_logs) {
        if (!agent.pending_logs.empty()) {
            std::vector<LogRecord> records(agent.pending_logs.begin(), agent.pending_logs.end());
            const auto msg = wire::make_log_batch(sid, records);
            wire::Message rx;
            if (!ch.send(msg, true, &rx)) return abort("log batch undeliverable");
            const auto& batch = std::get<wire::LogBatch>(rx.body).records;
            for (const auto& alert : edge::assess_logs(edge, batch, agent.vehicle_id))
                handle_alert(alert);
            edge::relay_to_central(edge, rx, agent.oem_id, seed, ch.now());
            if (!ch.send(wire::make_ack(sid), false)) return abort("log ack undeliverable");
            report.log_records_uploaded = records.size();
            agent.records_uploaded += records.size();
            agent.pending_logs.clear();
        }
    } else {
        if (!agent.training_windows.empty() && agent.policy.local_epochs > 0) {
            const uint64_t train_seed = Rng(seed, 0xF17F17ull).next_u64();
            agent.local_params =
                learn::ffnn_train(agent.local_params, agent.training_windows,
                                  agent.policy.local_epochs, agent.policy.local_learning_rate,
                                  train_seed);
            agent.has_new_params = true;
        }
        if (agent.has_new_params) {
            wire::Message rx;
            if (!ch.send(wire::make_fl_params(sid, agent.local_params), true, &rx))
                return abort("fl params undeliverable");
            edge::relay_to_central(edge, rx, agent.oem_id, seed, ch.now());
            if (!ch.send(wire::make_ack(sid), false)) return abort("params ack undeliverable");
            agent.has_new_params = false;
        }
    }

    // downloads: queued response actions first, then model updates
    std::vector<wire::Message> queued;
    if (auto it = edge.queued_downlinks.find(agent.vehicle_id);
        it != edge.queued_downlinks.end()) {
        queued = std::move(it->second);
        edge.queued_downlinks.erase(it);
    }
    for (const auto& m : queued) {
        if (std::holds_alternative<wire::ResponseActionBody>(m.body))
            session_actions.push_back(std::get<wire::ResponseActionBody>(m.body).action);
    }

    for (const auto& action : session_actions) {
        wire::Message rx;
        if (!ch.send(wire::make_response_action(sid, action), false, &rx))
            return abort("response action undeliverable");
        const auto outcome =
            agent::apply_response(agent, std::get<wire::ResponseActionBody>(rx.body).action);
        if (outcome == agent::ApplyOutcome::rejected) ++report.actions_rejected;
        else ++report.actions_applied;
        if (!ch.send(wire::make_ack(sid), true)) return abort("action ack undeliverable");
        last_action_ack_ms = ch.now();
    }

    for (auto& m : queued) {
        if (!std::holds_alternative<wire::ModelUpdate>(m.body)) continue;
        m.session_id = sid;
        wire::Message rx;
        if (!ch.send(m, false, &rx)) return abort("model update undeliverable");
        const auto& update = std::get<wire::ModelUpdate>(rx.body);
        if (std::holds_alternative<learn::ModelParams>(update.model) &&
            update.version > agent.params_version) {
            agent.local_params = std::get<learn::ModelParams>(update.model);
            agent.params_version = update.version;
            report.model_updated = true;
        }
        if (!ch.send(wire::make_ack(sid), true)) return abort("update ack undeliverable");
    }

    if (!ch.send(wire::make_disconnect(), true)) return abort("disconnect undeliverable");
    report.end_ms = ch.now();
    if (first_alert_ms >= 0.0 && last_action_ack_ms >= 0.0)
        report.response_latency_ms = last_action_ack_ms - first_alert_ms;
    return report;
}

} // namespace evsoar::session
