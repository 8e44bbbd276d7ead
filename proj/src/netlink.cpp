#include "evsoar/netlink.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace evsoar::netlink {

namespace {

double draw_jitter(const JitterModel& j, Rng& rng) {
    if (!j.enabled) return 0.0;
    if (j.kind == JitterKind::wired) {
        if (j.wired_max_ms <= 0.0) return 0.0;
        return rng.uniform(0.0, j.wired_max_ms);
    }
    double v = j.wireless_base_max_ms > 0.0 ? rng.uniform(0.0, j.wireless_base_max_ms) : 0.0;
    if (j.spike_prob > 0.0 && rng.bernoulli(j.spike_prob)) {
        // Pareto(scale, shape) truncated at cap
        double u = rng.next_unit();
        if (u <= 0.0) u = 0x1.0p-53;
        double spike = j.wireless_scale_ms * std::pow(u, -1.0 / j.wireless_shape);
        v += std::min(spike, j.wireless_cap_ms);
    }
    return v;
}

} // namespace

TransferResult transfer_time(const LinkConfig& link, uint64_t payload_bytes, Rng& rng) {
    TransferResult r;
    r.total_ms = link.latency_ms;
    if (payload_bytes == 0) return r;

    const uint64_t full = payload_bytes / kMtuBytes;
    const uint64_t tail = payload_bytes % kMtuBytes;
    const uint64_t n_packets = full + (tail ? 1 : 0);
    const double rto = rto_ms(link);

    // Draw order per packet: loss attempts first, then one jitter draw.
    // Completion-time jitter of the whole transfer is the max per-packet draw;
    // contention events overlap the sender pipeline rather than accumulate.
    for (uint64_t i = 0; i < n_packets; ++i) {
        const uint64_t bytes = (i == n_packets - 1 && tail) ? tail : kMtuBytes;
        const double ser = serialization_ms(link, bytes);
        uint64_t attempts = 1;
        if (link.plr > 0.0) {
            while (rng.bernoulli(link.plr)) ++attempts;
        }
        r.packets_sent += attempts;
        r.packets_lost += attempts - 1;
        r.total_ms += static_cast<double>(attempts) * ser + static_cast<double>(attempts - 1) * rto;
        r.jitter_ms = std::max(r.jitter_ms, draw_jitter(link.jitter, rng));
    }
    r.total_ms += r.jitter_ms;
    return r;
}

double round_trip(const LinkConfig& link, uint64_t request_bytes, uint64_t reply_bytes, Rng& rng) {
    return transfer_time(link, request_bytes, rng).total_ms +
           transfer_time(link, reply_bytes, rng).total_ms;
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty set");
    std::sort(xs.begin(), xs.end());
    const size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) throw std::invalid_argument("percentile of empty set");
    if (p <= 0.0 || p > 1.0) throw std::invalid_argument("percentile rank out of range");
    std::sort(xs.begin(), xs.end());
    size_t rank = static_cast<size_t>(std::ceil(p * static_cast<double>(xs.size())));
    if (rank == 0) rank = 1;
    return xs[rank - 1];
}

namespace {

std::vector<double> rtt_samples(const LinkConfig& link, uint64_t payload_bytes, uint32_t n_trials,
                                uint64_t seed, bool parallel) {
    std::vector<double> out(n_trials);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(n_trials); ++i) {
        Rng rng(seed, static_cast<uint64_t>(i));
        out[static_cast<size_t>(i)] = round_trip(link, payload_bytes, 0, rng);
    }
    (void)parallel;
    return out;
}

std::vector<double> oneway_samples(const LinkConfig& link, uint64_t payload_bytes,
                                   uint32_t n_trials, uint64_t seed, bool parallel) {
    std::vector<double> out(n_trials);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(n_trials); ++i) {
        Rng rng(seed, static_cast<uint64_t>(i));
        out[static_cast<size_t>(i)] = transfer_time(link, payload_bytes, rng).total_ms;
    }
    (void)parallel;
    return out;
}

} // namespace

double median_rtt(const LinkConfig& link, uint64_t payload_bytes, uint32_t n_trials, uint64_t seed,
                  Exec exec) {
    if (n_trials == 0) throw std::invalid_argument("median_rtt: n_trials must be >= 1");
    return median(rtt_samples(link, payload_bytes, n_trials, seed, exec == Exec::parallel));
}

double median_rtt_serial(const LinkConfig& link, uint64_t payload_bytes, uint32_t n_trials,
                         uint64_t seed) {
    return median_rtt(link, payload_bytes, n_trials, seed, Exec::serial);
}

double measured_throughput(const LinkConfig& link, uint64_t payload_bytes, uint32_t n_trials,
                           uint64_t seed, Exec exec) {
    if (payload_bytes == 0) throw std::invalid_argument("measured_throughput: payload must be >= 1");
    if (n_trials == 0) throw std::invalid_argument("measured_throughput: n_trials must be >= 1");
    const double med_ms =
        median(oneway_samples(link, payload_bytes, n_trials, seed, exec == Exec::parallel));
    return static_cast<double>(payload_bytes) * 8.0 / (med_ms * 1000.0);
}

std::vector<StabilitySample> stability_series(const LinkConfig& link, uint32_t duration_s,
                                              uint64_t seed, Exec exec) {
    if (duration_s == 0) throw std::invalid_argument("stability_series: duration must be >= 1");
    std::vector<StabilitySample> out(duration_s);
    const bool parallel = exec == Exec::parallel;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int64_t t = 0; t < static_cast<int64_t>(duration_s); ++t) {
        Rng rng(seed, static_cast<uint64_t>(t));
        out[static_cast<size_t>(t)] = {static_cast<uint32_t>(t),
                                       transfer_time(link, kMtuBytes, rng).total_ms};
    }
    (void)parallel;
    return out;
}

std::vector<StabilitySample> stability_series_serial(const LinkConfig& link, uint32_t duration_s,
                                                     uint64_t seed) {
    return stability_series(link, duration_s, seed, Exec::serial);
}

namespace {

JitterModel wired_jitter() {
    JitterModel j;
    j.kind = JitterKind::wired;
    return j;
}

JitterModel wireless_jitter() {
    JitterModel j;
    j.kind = JitterKind::wireless;
    return j;
}

std::vector<LinkConfig> make_presets() {
    return {
        {"VSOC-4G", 30.0, 36.0, 0.002, wireless_jitter()},
        {"VSOC-5G", 100.0, 17.0, 0.002, wireless_jitter()},
        {"RSU-WiFi", 27.0, 100.0, 0.17, wireless_jitter()},
        {"EVSOAR-PLC10M", 10.0, 2.0, 0.0, wired_jitter()},
        {"EVSOAR-PLC100M", 100.0, 2.0, 0.0, wired_jitter()},
        {"EVSOAR-PLC1G", 1000.0, 2.0, 0.0, wired_jitter()},
        {"Cloud", 10000.0, 0.3, 0.001, wired_jitter()},
    };
}

} // namespace

const std::vector<LinkConfig>& presets() {
    static const std::vector<LinkConfig> p = make_presets();
    return p;
}

const LinkConfig& preset(const std::string& name) {
    const std::string& wanted = (name == "Cloud Connectivity") ? "Cloud" : name;
    for (const auto& p : presets()) {
        if (p.name == wanted) return p;
    }
    throw std::invalid_argument("unknown link preset: " + name);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<LinkConfig> load_links_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open links config: " + path);
    std::vector<LinkConfig> links;
    LinkConfig* cur = nullptr;
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
            const std::string prefix = "link ";
            if (section.rfind(prefix, 0) != 0)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected [link <name>]");
            std::string name = trim(section.substr(prefix.size()));
            if (!name.empty() && name.front() == '"' && name.back() == '"' && name.size() >= 2)
                name = name.substr(1, name.size() - 2);
            if (name == "Cloud Connectivity") name = "Cloud";
            LinkConfig lc;
            lc.name = name;
            links.push_back(lc);
            cur = &links.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || cur == nullptr)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto as_double = [&]() {
            size_t pos = 0;
            double d = std::stod(val, &pos);
            if (pos != val.size())
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number");
            return d;
        };
        if (key == "bandwidth_mbps") cur->bandwidth_mbps = as_double();
        else if (key == "latency_ms") cur->latency_ms = as_double();
        else if (key == "plr") cur->plr = as_double();
        else if (key == "jitter") {
            if (val == "wired") cur->jitter.kind = JitterKind::wired;
            else if (val == "wireless") cur->jitter.kind = JitterKind::wireless;
            else if (val == "off") cur->jitter = JitterModel::off();
            else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad jitter kind");
        }
        else if (key == "wired_max_ms") cur->jitter.wired_max_ms = as_double();
        else if (key == "wireless_base_max_ms") cur->jitter.wireless_base_max_ms = as_double();
        else if (key == "wireless_scale_ms") cur->jitter.wireless_scale_ms = as_double();
        else if (key == "wireless_shape") cur->jitter.wireless_shape = as_double();
        else if (key == "wireless_cap_ms") cur->jitter.wireless_cap_ms = as_double();
        else if (key == "spike_prob") cur->jitter.spike_prob = as_double();
        else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    }
    for (const auto& l : links) {
        if (l.bandwidth_mbps <= 0.0)
            throw std::runtime_error("link " + l.name + ": bandwidth_mbps must be > 0");
        if (l.latency_ms < 0.0) throw std::runtime_error("link " + l.name + ": latency_ms < 0");
        if (l.plr < 0.0 || l.plr >= 1.0)
            throw std::runtime_error("link " + l.name + ": plr must be in [0,1)");
    }
    return links;
}

} // namespace evsoar::netlink
