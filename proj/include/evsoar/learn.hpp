#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "evsoar/netlink.hpp" // Exec
#include "evsoar/rng.hpp"
#include "evsoar/types.hpp"

namespace evsoar::learn {

using netlink::Exec;

constexpr size_t kFeatureCount = 16;

// Feature channels (all roughly unit-scaled):
//   0 message rate (log1p(records/s) / 10)
//   1 inter-arrival mean (log1p(ms) / 5)
//   2 inter-arrival std (log1p(ms) / 5)
//   3 payload byte entropy (bits / 8)
//   4 identifier dispersion (unique message_ids / records)
//   5 burst fraction (gaps below a quarter of the median gap)
//   6..13 mean of payload byte b / 255   (the OEM-behavioral channels)
//   14 component concentration (records of the busiest component / records)
//   15 pooled payload byte std / 64
struct FeatureVector {
    std::array<float, kFeatureCount> values{};
    uint8_t label = 0;

    bool operator==(const FeatureVector&) const = default;
};

struct ModelParams {
    std::vector<uint32_t> layer_sizes;
    std::vector<float> weights; // (n_in+1) x n_out per layer, bias folded at i == n_in
    uint64_t sample_count = 0;

    bool operator==(const ModelParams&) const = default;
};

struct Stump {
    uint32_t feature = 0;
    float threshold = 0.0f;
    float left = 0.0f;  // score when x[feature] <= threshold
    float right = 0.0f; // score otherwise

    bool operator==(const Stump&) const = default;
};

struct CentralModel {
    std::vector<Stump> stumps;
    float learning_rate = 0.1f;
    uint32_t rounds = 0; // == stumps.size()
    float base_score = 0.0f; // prior log-odds

    bool operator==(const CentralModel&) const = default;
};

struct Metrics {
    double recall_class0 = 0.0;
    double recall_class1 = 0.0;
    double accuracy = 0.0;
    uint64_t support0 = 0;
    uint64_t support1 = 0;
};

class shape_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class degenerate_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

size_t weight_count(const std::vector<uint32_t>& layer_sizes);

FeatureVector extract_features(std::span<const LogRecord> window);

// Splits a time-ordered trace into analysis windows at idle gaps larger than
// gap_us. A batch with no such gap is a single window.
std::vector<std::span<const LogRecord>> split_windows(std::span<const LogRecord> trace,
                                                      uint64_t gap_us = 100000);

CentralModel train_central(const std::vector<FeatureVector>& data, uint32_t rounds,
                           float learning_rate);
double predict_central(const CentralModel& model, const FeatureVector& x);
std::vector<float> predict_central_batch(const CentralModel& model,
                                         const std::vector<FeatureVector>& data,
                                         Exec exec = Exec::parallel);

ModelParams ffnn_init(const std::vector<uint32_t>& layer_sizes, uint64_t seed);
ModelParams ffnn_train(const ModelParams& params, const std::vector<FeatureVector>& data,
                       uint32_t epochs, double learning_rate, uint64_t seed,
                       uint32_t batch_size = 32);
double ffnn_predict(const ModelParams& params, const FeatureVector& x);
std::vector<float> ffnn_predict_batch(const ModelParams& params,
                                      const std::vector<FeatureVector>& data,
                                      Exec exec = Exec::parallel);
double ffnn_loss(const ModelParams& params, const std::vector<FeatureVector>& data);
// analytic gradient of the single-sample cross-entropy loss, for gradient checks
std::vector<double> ffnn_gradient(const ModelParams& params, const FeatureVector& x);
double ffnn_sample_loss(const ModelParams& params, const FeatureVector& x);

ModelParams fedavg(const std::vector<ModelParams>& updates);

Metrics evaluate(const std::vector<uint8_t>& predictions, const std::vector<uint8_t>& labels);

constexpr float kDecisionThreshold = 0.5f;

inline std::vector<uint8_t> threshold_predictions(const std::vector<float>& probs) {
    std::vector<uint8_t> out(probs.size());
    for (size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= kDecisionThreshold ? 1 : 0;
    return out;
}

inline std::vector<uint8_t> labels_of(const std::vector<FeatureVector>& data) {
    std::vector<uint8_t> out(data.size());
    for (size_t i = 0; i < data.size(); ++i) out[i] = data[i].label;
    return out;
}

// default federated network: 16-64-32-1, 3201 weights
inline std::vector<uint32_t> default_layer_sizes() { return {16, 64, 32, 1}; }

} // namespace evsoar::learn
