#include "evsoar/edge.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evsoar::edge {

Severity severity_from_score(double score) {
    if (score < 0.7) return Severity::low;
    if (score < 0.9) return Severity::medium;
    return Severity::high;
}

RuleSet default_ruleset() {
    RuleSet rs;
    rs.rules = {
        {"dos-isolate", AlertKind::dos, Severity::medium,
         {ActionKind::IsolateComponent, ActionKind::NotifyCentral}},
        {"spoof-patch", AlertKind::spoofing, Severity::high,
         {ActionKind::IsolateComponent, ActionKind::ApplyPatch}},
        {"tamper-rollback", AlertKind::tamper, Severity::medium,
         {ActionKind::RollbackUpdate, ActionKind::NotifyCentral}},
        {"fuzz-deactivate", AlertKind::fuzzing, Severity::medium,
         {ActionKind::DeactivateComponent, ActionKind::NotifyCentral}},
    };
    return rs;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

AlertKind parse_alert_kind(const std::string& s) {
    if (s == "dos") return AlertKind::dos;
    if (s == "fuzzing") return AlertKind::fuzzing;
    if (s == "spoofing") return AlertKind::spoofing;
    if (s == "tamper") return AlertKind::tamper;
    if (s == "anomaly") return AlertKind::anomaly;
    throw std::runtime_error("unknown alert kind: " + s);
}

Severity parse_severity(const std::string& s) {
    if (s == "low") return Severity::low;
    if (s == "medium") return Severity::medium;
    if (s == "high") return Severity::high;
    throw std::runtime_error("unknown severity: " + s);
}

ActionKind parse_action(const std::string& s) {
    if (s == "DeactivateComponent") return ActionKind::DeactivateComponent;
    if (s == "IsolateComponent") return ActionKind::IsolateComponent;
    if (s == "ApplyPatch") return ActionKind::ApplyPatch;
    if (s == "RollbackUpdate") return ActionKind::RollbackUpdate;
    if (s == "UpdateFirmware") return ActionKind::UpdateFirmware;
    if (s == "NotifyCentral") return ActionKind::NotifyCentral;
    throw std::runtime_error("unknown action: " + s);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

} // namespace

RuleSet load_rules_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rules config: " + path);
    RuleSet rs;
    Rule* cur = nullptr;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad section");
            std::string section = trim(line.substr(1, line.size() - 2));
            const std::string prefix = "rule ";
            if (section.rfind(prefix, 0) != 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected [rule <id>]");
            Rule r;
            r.rule_id = trim(section.substr(prefix.size()));
            rs.rules.push_back(r);
            cur = &rs.rules.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || cur == nullptr)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "match") {
            const auto toks = split_ws(val);
            if (toks.size() != 2)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": match wants '<kind> <min severity>'");
            cur->kind = parse_alert_kind(toks[0]);
            cur->min_severity = parse_severity(toks[1]);
        } else if (key == "actions") {
            cur->actions.clear();
            for (const auto& t : split_ws(val)) cur->actions.push_back(parse_action(t));
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key " + key);
        }
    }
    return rs;
}

EdgeNode make_edge(uint32_t edge_id, const netlink::LinkConfig& vehicle_link,
                   const netlink::LinkConfig& central_link, central::CentralState* central) {
    EdgeNode e;
    e.edge_id = edge_id;
    e.vehicle_link = vehicle_link;
    e.central_link = central_link;
    e.central = central;
    e.rules = default_ruleset();
    return e;
}

std::array<uint8_t, 16> auth_token(uint64_t vehicle_id) {
    std::array<uint8_t, 16> t{};
    const uint64_t a = Rng::mix(vehicle_id ^ 0xE5504AA6u);
    const uint64_t b = Rng::mix(a + Rng::kGamma);
    for (int i = 0; i < 8; ++i) {
        t[i] = static_cast<uint8_t>(a >> (8 * i));
        t[8 + i] = static_cast<uint8_t>(b >> (8 * i));
    }
    return t;
}

std::vector<Alert> assess_logs(const EdgeNode& edge, std::span<const LogRecord> batch,
                               uint64_t vehicle_id) {
    std::vector<Alert> alerts;
    if (!edge.model.has_value() || batch.empty()) return alerts;
    for (const auto window : learn::split_windows(batch, edge.window_gap_us)) {
        const auto fv = learn::extract_features(window);
        const double score = learn::predict_central(*edge.model, fv);
        if (score < learn::kDecisionThreshold) continue;
        // dominant component of the window is the suspect
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
        a.vehicle_id = vehicle_id;
        a.component_id = suspect;
        a.kind = AlertKind::anomaly;
        a.severity = severity_from_score(score);
        a.score = static_cast<float>(score);
        a.source = AlertSource::edge_ml;
        alerts.push_back(a);
    }
    return alerts;
}

std::vector<ResponseAction> apply_rules(const Alert& alert, const RuleSet& rules) {
    for (const auto& r : rules.rules) {
        if (r.kind != alert.kind) continue;
        if (static_cast<int>(alert.severity) < static_cast<int>(r.min_severity)) continue;
        std::vector<ResponseAction> out;
        for (ActionKind k : r.actions) out.push_back({k, alert.component_id, r.rule_id});
        return out;
    }
    return {{ActionKind::NotifyCentral, alert.component_id, rules.fallback_rule_id}};
}

RelayResult relay_to_central(EdgeNode& edge, const wire::Message& msg, uint32_t oem_id,
                             uint64_t seed, double now_ms) {
    RelayResult res;
    if (edge.central == nullptr) return res;

    auto frame = wire::encode(msg);
    res.bytes = frame.size();
    Rng rng(seed, 0xED6E0000ull + edge.relay_count++);

    for (int attempt = 0; attempt < 2; ++attempt) {
        res.elapsed_ms += netlink::transfer_time(edge.central_link, frame.size(), rng).total_ms;
        auto delivered = frame;
        if (edge.corrupt_next_relays > 0) {
            --edge.corrupt_next_relays;
            delivered[delivered.size() / 2] ^= 0x01;
        }
        const auto decoded = wire::decode(delivered);
        if (decoded.status == wire::DecodeStatus::corruption) continue;
        if (!decoded.ok()) break;

        const auto& m = decoded.message;
        if (std::holds_alternative<wire::LogBatch>(m.body)) {
            central::ingest_logs(*edge.central, oem_id,
                                 std::get<wire::LogBatch>(m.body).records);
        } else if (std::holds_alternative<wire::FlParams>(m.body)) {
            const auto pool = edge.pool.kind == central::PoolKey::Kind::single
                                  ? central::PoolKey::single(oem_id)
                                  : central::PoolKey::mix();
            central::submit_params(*edge.central, oem_id,
                                   std::get<wire::FlParams>(m.body).params, pool);
        } else if (std::holds_alternative<wire::AlertBody>(m.body)) {
            central::note_alert(*edge.central, std::get<wire::AlertBody>(m.body).alert);
        }
        res.delivered = true;
        // ack travels back over the same link
        Rng ack_rng(seed, 0xAC6E0000ull + edge.relay_count);
        res.elapsed_ms +=
            netlink::transfer_time(edge.central_link, wire::kFrameOverhead + 8, ack_rng).total_ms;
        return res;
    }
    edge.relay_failures.push_back({now_ms + res.elapsed_ms, msg.kind()});
    return res;
}

Delivery distribute_model(EdgeNode& edge, uint64_t vehicle_id, const wire::ModelUpdate& update) {
    auto& queue = edge.queued_downlinks[vehicle_id];
    for (auto& m : queue) {
        if (!std::holds_alternative<wire::ModelUpdate>(m.body)) continue;
        auto& existing = std::get<wire::ModelUpdate>(m.body);
        if (update.version <= existing.version) return Delivery::ignored_stale;
        existing = update;
        return Delivery::replaced_older;
    }
    wire::Message m;
    m.body = update;
    queue.push_back(std::move(m));
    return Delivery::queued;
}

bool set_model(EdgeNode& edge, const learn::CentralModel& model, uint32_t version) {
    if (version <= edge.model_version && edge.model.has_value()) return false;
    edge.model = model;
    edge.model_version = version;
    return true;
}

std::string history_csv(const EdgeNode& edge) {
    std::ostringstream out;
    out << "time_ms,vehicle_id,kind,severity,rule_id,action\n";
    for (const auto& h : edge.history) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", h.time_ms);
        out << buf << ',' << h.vehicle_id << ',' << to_string(h.kind) << ','
            << to_string(h.severity) << ',' << h.rule_id << ',' << to_string(h.action) << '\n';
    }
    return out.str();
}

} // namespace evsoar::edge
