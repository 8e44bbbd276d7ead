#include "evsoar/central.hpp"

#include <sstream>
#include <stdexcept>

namespace evsoar::central {

std::string to_string(const PoolKey& key) {
    if (key.kind == PoolKey::Kind::mix) return "mix";
    return "single:" + std::to_string(key.oem_id);
}

void register_oem(CentralState& state, uint32_t oem_id, uint32_t component_count) {
    state.oem_registry[oem_id] = component_count;
}

void ingest(CentralState& state, uint32_t oem_id, std::span<const learn::FeatureVector> batch) {
    if (!state.oem_registry.contains(oem_id))
        throw std::invalid_argument("ingest: unregistered OEM " + std::to_string(oem_id));
    for (const auto& fv : batch) state.log_store.emplace_back(oem_id, fv);
}

void ingest_logs(CentralState& state, uint32_t oem_id, std::span<const LogRecord> records) {
    if (!state.oem_registry.contains(oem_id))
        throw std::invalid_argument("ingest_logs: unregistered OEM " + std::to_string(oem_id));
    std::vector<learn::FeatureVector> batch;
    for (const auto window : learn::split_windows(records, state.window_gap_us))
        batch.push_back(learn::extract_features(window));
    ingest(state, oem_id, batch);
}

bool retrain(CentralState& state) {
    if (state.log_store.empty()) return false;
    std::vector<learn::FeatureVector> data;
    data.reserve(state.log_store.size());
    for (const auto& [oem, fv] : state.log_store) data.push_back(fv);
    learn::CentralModel model;
    try {
        model = learn::train_central(data, state.train_rounds, state.train_learning_rate);
    } catch (const learn::degenerate_data_error&) {
        return false;
    }
    state.current_model = std::move(model);
    ++state.model_version;
    state.model_dirty = true;
    state.version_history.push_back(
        {state.model_version, "central", static_cast<uint64_t>(data.size())});
    return true;
}

void submit_params(CentralState& state, uint32_t oem_id, learn::ModelParams params, PoolKey pool) {
    if (!state.oem_registry.contains(oem_id))
        throw std::invalid_argument("submit_params: unregistered OEM");
    if (pool.kind == PoolKey::Kind::single && pool.oem_id != oem_id)
        throw std::invalid_argument("submit_params: params from OEM " + std::to_string(oem_id) +
                                    " offered to pool " + to_string(pool));
    state.param_pool[pool].push_back({oem_id, std::move(params)});
}

std::optional<VersionedParams> aggregate_pool(CentralState& state, PoolKey pool) {
    auto it = state.param_pool.find(pool);
    if (it == state.param_pool.end() || it->second.empty()) return std::nullopt;
    std::vector<learn::ModelParams> updates;
    updates.reserve(it->second.size());
    for (const auto& e : it->second) {
        if (pool.kind == PoolKey::Kind::single && e.oem_id != pool.oem_id)
            throw std::logic_error("aggregate_pool: foreign params in single pool");
        updates.push_back(e.params);
    }
    VersionedParams vp;
    vp.params = learn::fedavg(updates);
    vp.version = state.next_param_version++;
    state.global_params[pool] = vp;
    it->second.clear();
    state.version_history.push_back({vp.version, to_string(pool), vp.params.sample_count});
    return vp;
}

PatchOutcome issue_patch(CentralState& state, const PatchNotice& notice) {
    auto oem = state.oem_registry.find(notice.oem_id);
    if (oem == state.oem_registry.end()) return PatchOutcome::rejected;
    if (notice.component_id >= oem->second) return PatchOutcome::rejected;
    const auto key = std::make_pair(notice.oem_id, notice.component_id);
    auto it = state.issued_patches.find(key);
    if (it != state.issued_patches.end()) {
        if (notice.patch_version == it->second) return PatchOutcome::duplicate;
        if (notice.patch_version < it->second) return PatchOutcome::rejected;
    }
    state.issued_patches[key] = notice.patch_version;
    state.pending_patches.push_back(notice);
    return PatchOutcome::queued;
}

void note_alert(CentralState& state, const Alert& alert) { state.alert_ledger.push_back(alert); }

std::string alert_ledger_csv(const CentralState& state) {
    std::ostringstream out;
    out << "vehicle_id,component_id,kind,severity,score,source\n";
    for (const auto& a : state.alert_ledger) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(a.score));
        out << a.vehicle_id << ',' << a.component_id << ',' << to_string(a.kind) << ','
            << to_string(a.severity) << ',' << buf << ',' << to_string(a.source) << '\n';
    }
    return out.str();
}

std::string version_history_csv(const CentralState& state) {
    std::ostringstream out;
    out << "version,what,trained_on\n";
    for (const auto& e : state.version_history)
        out << e.version << ',' << e.what << ',' << e.trained_on << '\n';
    return out.str();
}

} // namespace evsoar::central
