#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evsoar/rng.hpp"

namespace evsoar::netlink {

enum class JitterKind { wired, wireless };

struct JitterModel {
    JitterKind kind = JitterKind::wired;
    double wired_max_ms = 2.0;        // uniform [0, wired_max_ms]
    double wireless_base_max_ms = 20.0; // per-packet base, uniform [0, base]
    double wireless_scale_ms = 100.0; // Pareto spike scale
    double wireless_shape = 1.5;      // Pareto spike shape
    double wireless_cap_ms = 5000.0;  // spike truncation
    double spike_prob = 0.15;
    bool enabled = true;

    static JitterModel off() { return {JitterKind::wired, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, false}; }
};

struct LinkConfig {
    std::string name;
    double bandwidth_mbps = 0.0;
    double latency_ms = 0.0;
    double plr = 0.0; // packet loss ratio in [0,1)
    JitterModel jitter;

    // copy with loss and jitter disabled, for closed-form timing
    LinkConfig deterministic() const {
        LinkConfig c = *this;
        c.plr = 0.0;
        c.jitter = JitterModel::off();
        return c;
    }
};

struct TransferResult {
    double total_ms = 0.0;
    uint64_t packets_sent = 0; // transmission attempts, retries included
    uint64_t packets_lost = 0;
    double jitter_ms = 0.0;
};

constexpr uint64_t kMtuBytes = 1500;

// retransmission timeout per lost attempt
inline double rto_ms(const LinkConfig& link) { return 2.0 * link.latency_ms + 10.0; }

inline double serialization_ms(const LinkConfig& link, uint64_t bytes) {
    return static_cast<double>(bytes) * 8.0 / (link.bandwidth_mbps * 1000.0);
}

TransferResult transfer_time(const LinkConfig& link, uint64_t payload_bytes, Rng& rng);

double round_trip(const LinkConfig& link, uint64_t request_bytes, uint64_t reply_bytes, Rng& rng);

enum class Exec { serial, parallel };

double median_rtt(const LinkConfig& link, uint64_t payload_bytes, uint32_t n_trials,
                  uint64_t seed, Exec exec = Exec::parallel);
double median_rtt_serial(const LinkConfig& link, uint64_t payload_bytes, uint32_t n_trials,
                         uint64_t seed);

double measured_throughput(const LinkConfig& link, uint64_t payload_bytes, uint32_t n_trials,
                           uint64_t seed, Exec exec = Exec::parallel);

struct StabilitySample {
    uint32_t t_s;
    double delivery_ms;
};

std::vector<StabilitySample> stability_series(const LinkConfig& link, uint32_t duration_s,
                                              uint64_t seed, Exec exec = Exec::parallel);
std::vector<StabilitySample> stability_series_serial(const LinkConfig& link, uint32_t duration_s,
                                                     uint64_t seed);

// The seven named Table-style presets. "Cloud Connectivity" is accepted as an
// alias for "Cloud" when looking up by name.
const std::vector<LinkConfig>& presets();
const LinkConfig& preset(const std::string& name); // throws std::invalid_argument on unknown name

// Load presets from a key/value config file; returns the presets defined there.
// Unknown keys are rejected. See configs/links.cfg for the format.
std::vector<LinkConfig> load_links_config(const std::string& path);

double median(std::vector<double> xs); // midpoint-average for even sizes
double percentile(std::vector<double> xs, double p); // rank ceil(p*n), p in (0,1]

} // namespace evsoar::netlink
