#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "evsoar/learn.hpp"
#include "evsoar/rng.hpp"
#include "evsoar/types.hpp"

namespace evsoar::datagen {

using learn::FeatureVector;
using netlink::Exec;

struct OemProfile {
    uint32_t oem_id = 0;
    // entries 6..13 shift the mean of payload byte b in byte units; the other
    // entries are reserved (timing heterogeneity is not exercised by default)
    std::array<double, learn::kFeatureCount> feature_shift{};
    uint32_t component_count = 8;
    double traffic_rate_hz = 150.0; // records per second per vehicle
};

struct FleetConfig {
    uint32_t n_oems = 3;
    uint32_t vehicles_per_oem = 20;
    uint32_t windows_per_vehicle = 500;
    uint32_t records_per_window = 150;
    double imbalance_ratio = 4.8; // benign : attacked windows
    double attack_intensity = 0.3;
    double oem_shift_step = 30.0; // heterogeneity magnitude, payload-byte units
};

struct VehicleData {
    std::vector<FeatureVector> windows;
};

struct OemDataset {
    uint32_t oem_id = 0;
    std::vector<VehicleData> vehicles;

    std::vector<FeatureVector> flat() const;
};

OemProfile default_profile(const FleetConfig& cfg, uint32_t oem_id);

// benign periodic traffic with Gaussian timing noise, timestamps sorted
std::vector<LogRecord> benign_window(const OemProfile& profile, uint32_t records, uint64_t t0_us,
                                     Rng& rng);

// throws std::invalid_argument on empty trace, AttackTag::none, or intensity
// outside (0,1]
std::vector<LogRecord> inject_attack(std::vector<LogRecord> trace, AttackTag kind,
                                     double intensity, Rng& rng);

// per-vehicle attack plan: which windows are attacked and with what kind;
// quota = round(windows * 1/(1+imbalance_ratio)), positions shuffled per seed
std::vector<AttackTag> vehicle_plan(const FleetConfig& cfg, uint32_t oem, uint32_t vehicle,
                                    uint64_t seed);

// one window of one vehicle, reproducible in isolation
std::vector<LogRecord> vehicle_window(const FleetConfig& cfg, uint32_t oem, uint32_t vehicle,
                                      uint32_t window, AttackTag attack, uint64_t seed);

std::vector<OemDataset> gen_fleet(const FleetConfig& cfg, uint64_t seed,
                                  Exec exec = Exec::parallel);
std::vector<OemDataset> gen_fleet_serial(const FleetConfig& cfg, uint64_t seed);

// line-delimited export, one record per line, comma-separated fields
void write_trace(std::ostream& out, std::span<const LogRecord> trace);

} // namespace evsoar::datagen
