#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "evsoar/learn.hpp"
#include "evsoar/types.hpp"

namespace evsoar::central {

struct PoolKey {
    enum class Kind { single, mix } kind = Kind::mix;
    uint32_t oem_id = 0; // meaningful for single only

    static PoolKey single(uint32_t oem) { return {Kind::single, oem}; }
    static PoolKey mix() { return {Kind::mix, 0}; }
    auto operator<=>(const PoolKey&) const = default;
};

std::string to_string(const PoolKey& key);

struct PoolEntry {
    uint32_t oem_id = 0;
    learn::ModelParams params;
};

struct VersionedParams {
    uint32_t version = 0;
    learn::ModelParams params;
};

struct PatchNotice {
    uint32_t oem_id = 0;
    uint32_t component_id = 0;
    uint32_t patch_version = 0;
};

struct ModelVersionEvent {
    uint32_t version = 0;
    std::string what; // "central" or pool key
    uint64_t trained_on = 0;
};

struct CentralState {
    std::map<uint32_t, uint32_t> oem_registry; // oem_id -> component count
    std::vector<std::pair<uint32_t, learn::FeatureVector>> log_store;
    std::map<PoolKey, std::vector<PoolEntry>> param_pool;
    learn::CentralModel current_model;
    uint32_t model_version = 0;
    bool model_dirty = false; // new version awaiting distribution to edges
    std::map<PoolKey, VersionedParams> global_params;
    uint32_t next_param_version = 1;
    std::vector<PatchNotice> pending_patches;
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> issued_patches; // (oem, component) -> version
    std::vector<Alert> alert_ledger;
    std::vector<ModelVersionEvent> version_history;

    uint32_t train_rounds = 200;
    float train_learning_rate = 0.1f;
    uint64_t window_gap_us = 100000; // idle gap that separates analysis windows
};

void register_oem(CentralState& state, uint32_t oem_id, uint32_t component_count);

// throws std::invalid_argument for an unregistered OEM
void ingest(CentralState& state, uint32_t oem_id, std::span<const learn::FeatureVector> batch);
// preprocessing entry point: windows raw logs and extracts features first
void ingest_logs(CentralState& state, uint32_t oem_id, std::span<const LogRecord> records);

// trains on the full log store; returns false (warning, version unchanged) on
// degenerate single-class data or an empty store
bool retrain(CentralState& state);

void submit_params(CentralState& state, uint32_t oem_id, learn::ModelParams params, PoolKey pool);

// FedAvg over the pool; clears it and bumps the pool's param version.
// Empty pool is a no-op returning nullopt. Single pools reject foreign params
// at submit time, and aggregation re-checks the invariant.
std::optional<VersionedParams> aggregate_pool(CentralState& state, PoolKey pool);

enum class PatchOutcome { queued, duplicate, rejected };
PatchOutcome issue_patch(CentralState& state, const PatchNotice& notice);

void note_alert(CentralState& state, const Alert& alert);

std::string alert_ledger_csv(const CentralState& state);
std::string version_history_csv(const CentralState& state);

} // namespace evsoar::central
