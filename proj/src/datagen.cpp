#include "evsoar/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace evsoar::datagen {

namespace {

constexpr double kBaseByteMean[8] = {40, 58, 76, 94, 112, 130, 148, 166};
constexpr double kByteSigma = 18.0;

uint8_t clip_byte(double v) {
    if (v < 0.0) return 0;
    if (v > 255.0) return 255;
    return static_cast<uint8_t>(std::lround(v));
}

uint64_t vehicle_index(const FleetConfig& cfg, uint32_t oem, uint32_t vehicle) {
    return static_cast<uint64_t>(oem) * cfg.vehicles_per_oem + vehicle;
}

// streams: one per (vehicle, window), plus one per vehicle for the plan shuffle
uint64_t window_stream(const FleetConfig& cfg, uint32_t oem, uint32_t vehicle, uint32_t window) {
    return vehicle_index(cfg, oem, vehicle) * (static_cast<uint64_t>(cfg.windows_per_vehicle) + 1) +
           window;
}

uint64_t plan_stream(const FleetConfig& cfg, uint32_t oem, uint32_t vehicle) {
    return vehicle_index(cfg, oem, vehicle) * (static_cast<uint64_t>(cfg.windows_per_vehicle) + 1) +
           cfg.windows_per_vehicle;
}

} // namespace

std::vector<FeatureVector> OemDataset::flat() const {
    std::vector<FeatureVector> out;
    for (const auto& v : vehicles) out.insert(out.end(), v.windows.begin(), v.windows.end());
    return out;
}

OemProfile default_profile(const FleetConfig& cfg, uint32_t oem_id) {
    OemProfile p;
    p.oem_id = oem_id;
    const uint32_t n = std::max(1u, cfg.n_oems);
    for (uint32_t b = 0; b < 8; ++b) {
        if (b % n == oem_id % n) p.feature_shift[6 + b] = cfg.oem_shift_step;
        else if ((b + 1) % n == oem_id % n) p.feature_shift[6 + b] = -cfg.oem_shift_step;
    }
    return p;
}

std::vector<LogRecord> benign_window(const OemProfile& profile, uint32_t records, uint64_t t0_us,
                                     Rng& rng) {
    if (records == 0) throw std::invalid_argument("benign_window: records must be >= 1");
    const double period_us = 1e6 / profile.traffic_rate_hz;
    std::vector<LogRecord> out(records);
    for (uint32_t k = 0; k < records; ++k) {
        LogRecord& r = out[k];
        const double noise = rng.gaussian(0.0, 0.1 * period_us);
        const double t = static_cast<double>(k) * period_us + noise;
        r.timestamp_us = t0_us + static_cast<uint64_t>(std::max(0.0, t));
        r.component_id = k % profile.component_count;
        r.message_id = r.component_id * 8 + (k / profile.component_count) % 4;
        for (size_t b = 0; b < 8; ++b)
            r.payload[b] =
                clip_byte(rng.gaussian(kBaseByteMean[b] + profile.feature_shift[6 + b], kByteSigma));
        r.attack_tag = AttackTag::none;
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const LogRecord& a, const LogRecord& b) {
                         return a.timestamp_us < b.timestamp_us;
                     });
    return out;
}

std::vector<LogRecord> inject_attack(std::vector<LogRecord> trace, AttackTag kind,
                                     double intensity, Rng& rng) {
    if (trace.empty()) throw std::invalid_argument("inject_attack: empty trace");
    if (!(intensity > 0.0 && intensity <= 1.0))
        throw std::invalid_argument("inject_attack: intensity must be in (0,1]");
    const size_t n = trace.size();
    const uint64_t t_min = trace.front().timestamp_us;
    const uint64_t t_max = trace.back().timestamp_us;
    const uint64_t span = t_max > t_min ? t_max - t_min : 1;

    switch (kind) {
        case AttackTag::dos: {
            // burst of duplicated high-rate messages from one component
            const size_t extra =
                std::max<size_t>(1, static_cast<size_t>(std::ceil(intensity * 1.25 * n)));
            const LogRecord& model = trace[rng.next_below(n)];
            uint64_t burst_len = static_cast<uint64_t>(extra) * 50;
            uint64_t start = t_min;
            if (span > burst_len) start = t_min + rng.next_below(span - burst_len);
            for (size_t i = 0; i < extra; ++i) {
                LogRecord r = model;
                r.timestamp_us = start + i * 50;
                r.attack_tag = AttackTag::dos;
                trace.push_back(r);
            }
            break;
        }
        case AttackTag::fuzzing: {
            const size_t extra =
                std::max<size_t>(1, static_cast<size_t>(std::ceil(intensity * 0.5 * n)));
            for (size_t i = 0; i < extra; ++i) {
                LogRecord r;
                r.timestamp_us = t_min + rng.next_below(span);
                r.component_id = static_cast<uint32_t>(rng.next_below(64));
                r.message_id = static_cast<uint32_t>(rng.next_below(0x10000));
                for (auto& b : r.payload) b = static_cast<uint8_t>(rng.next_below(256));
                r.attack_tag = AttackTag::fuzzing;
                trace.push_back(r);
            }
            break;
        }
        case AttackTag::spoofing: {
            // legitimate id replayed at the wrong cadence
            const size_t extra =
                std::max<size_t>(1, static_cast<size_t>(std::ceil(intensity * 0.5 * n)));
            const LogRecord& model = trace[rng.next_below(n)];
            const uint64_t cadence = std::max<uint64_t>(1, span / (3 * extra));
            uint64_t t = t_min + rng.next_below(std::max<uint64_t>(1, span / 4));
            for (size_t i = 0; i < extra; ++i) {
                LogRecord r = model;
                r.timestamp_us = t;
                for (auto& b : r.payload)
                    b = clip_byte(static_cast<double>(b) + rng.gaussian(0.0, 4.0));
                r.attack_tag = AttackTag::spoofing;
                trace.push_back(r);
                t += cadence;
            }
            break;
        }
        case AttackTag::tamper: {
            // in-place payload mutation of existing records
            const size_t hits =
                std::max<size_t>(1, static_cast<size_t>(std::llround(intensity * 0.5 * n)));
            for (size_t i = 0; i < hits; ++i) {
                LogRecord& r = trace[rng.next_below(n)];
                for (auto& b : r.payload) b = static_cast<uint8_t>(rng.next_below(256));
                r.attack_tag = AttackTag::tamper;
            }
            break;
        }
        case AttackTag::none:
            throw std::invalid_argument("inject_attack: unknown attack kind");
    }
    std::stable_sort(trace.begin(), trace.end(),
                     [](const LogRecord& a, const LogRecord& b) {
                         return a.timestamp_us < b.timestamp_us;
                     });
    return trace;
}

std::vector<AttackTag> vehicle_plan(const FleetConfig& cfg, uint32_t oem, uint32_t vehicle,
                                    uint64_t seed) {
    const uint32_t w = cfg.windows_per_vehicle;
    const double p = 1.0 / (1.0 + cfg.imbalance_ratio);
    const uint32_t quota = static_cast<uint32_t>(std::lround(p * w));
    std::vector<uint32_t> idx(w);
    for (uint32_t i = 0; i < w; ++i) idx[i] = i;
    Rng rng(seed, plan_stream(cfg, oem, vehicle));
    for (uint32_t i = w; i > 1; --i) std::swap(idx[i - 1], idx[rng.next_below(i)]);

    static constexpr AttackTag kKinds[4] = {AttackTag::dos, AttackTag::fuzzing,
                                            AttackTag::spoofing, AttackTag::tamper};
    std::vector<AttackTag> plan(w, AttackTag::none);
    for (uint32_t i = 0; i < quota && i < w; ++i) plan[idx[i]] = kKinds[i % 4];
    return plan;
}

std::vector<LogRecord> vehicle_window(const FleetConfig& cfg, uint32_t oem, uint32_t vehicle,
                                      uint32_t window, AttackTag attack, uint64_t seed) {
    const OemProfile profile = default_profile(cfg, oem);
    const double period_us = 1e6 / profile.traffic_rate_hz;
    const uint64_t window_span =
        static_cast<uint64_t>(std::ceil(1.5 * period_us * cfg.records_per_window));
    Rng rng(seed, window_stream(cfg, oem, vehicle, window));
    auto trace = benign_window(profile, cfg.records_per_window,
                               static_cast<uint64_t>(window) * window_span, rng);
    if (attack != AttackTag::none)
        trace = inject_attack(std::move(trace), attack, cfg.attack_intensity, rng);
    return trace;
}

std::vector<OemDataset> gen_fleet(const FleetConfig& cfg, uint64_t seed, Exec exec) {
    if (cfg.n_oems == 0 || cfg.vehicles_per_oem == 0 || cfg.windows_per_vehicle == 0 ||
        cfg.records_per_window == 0)
        throw std::invalid_argument("gen_fleet: all counts must be >= 1");
    if (cfg.imbalance_ratio <= 0.0)
        throw std::invalid_argument("gen_fleet: imbalance_ratio must be > 0");

    std::vector<OemDataset> fleet(cfg.n_oems);
    for (uint32_t o = 0; o < cfg.n_oems; ++o) {
        fleet[o].oem_id = o;
        fleet[o].vehicles.resize(cfg.vehicles_per_oem);
        for (auto& v : fleet[o].vehicles) v.windows.resize(cfg.windows_per_vehicle);
    }

    const int64_t total = static_cast<int64_t>(cfg.n_oems) * cfg.vehicles_per_oem;
    const bool parallel = exec == Exec::parallel;
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int64_t vi = 0; vi < total; ++vi) {
        const uint32_t o = static_cast<uint32_t>(vi / cfg.vehicles_per_oem);
        const uint32_t v = static_cast<uint32_t>(vi % cfg.vehicles_per_oem);
        const auto plan = vehicle_plan(cfg, o, v, seed);
        for (uint32_t w = 0; w < cfg.windows_per_vehicle; ++w) {
            const auto trace = vehicle_window(cfg, o, v, w, plan[w], seed);
            fleet[o].vehicles[v].windows[w] = learn::extract_features(trace);
        }
    }
    (void)parallel;
    return fleet;
}

std::vector<OemDataset> gen_fleet_serial(const FleetConfig& cfg, uint64_t seed) {
    return gen_fleet(cfg, seed, Exec::serial);
}

void write_trace(std::ostream& out, std::span<const LogRecord> trace) {
    for (const auto& r : trace) {
        out << r.timestamp_us << ',' << r.component_id << ',' << r.message_id << ',';
        for (size_t b = 0; b < 8; ++b) {
            out << static_cast<unsigned>(r.payload[b]);
            out << (b + 1 < 8 ? ':' : ',');
        }
        out << to_string(r.attack_tag) << '\n';
    }
}

} // namespace evsoar::datagen
