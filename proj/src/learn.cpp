#include "evsoar/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace evsoar::learn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bce(double p, double y) {
    const double eps = 1e-12;
    p = std::min(std::max(p, eps), 1.0 - eps);
    return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

} // namespace

size_t weight_count(const std::vector<uint32_t>& layer_sizes) {
    if (layer_sizes.size() < 2) throw shape_error("need at least two layers");
    size_t n = 0;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        n += static_cast<size_t>(layer_sizes[l] + 1) * layer_sizes[l + 1];
    return n;
}

FeatureVector extract_features(std::span<const LogRecord> window) {
    if (window.empty()) throw std::invalid_argument("extract_features: empty window");
    const size_t n = window.size();
    FeatureVector fv;

    const double span_us =
        static_cast<double>(window.back().timestamp_us - window.front().timestamp_us);
    const double rate_hz = static_cast<double>(n) / (std::max(span_us, 1.0) / 1e6);
    fv.values[0] = static_cast<float>(std::log1p(rate_hz) / 10.0);

    std::vector<double> gaps_ms;
    gaps_ms.reserve(n > 0 ? n - 1 : 0);
    for (size_t i = 1; i < n; ++i)
        gaps_ms.push_back(
            static_cast<double>(window[i].timestamp_us - window[i - 1].timestamp_us) / 1000.0);
    double gap_mean = 0.0, gap_var = 0.0;
    if (!gaps_ms.empty()) {
        gap_mean = std::accumulate(gaps_ms.begin(), gaps_ms.end(), 0.0) /
                   static_cast<double>(gaps_ms.size());
        for (double g : gaps_ms) gap_var += (g - gap_mean) * (g - gap_mean);
        gap_var /= static_cast<double>(gaps_ms.size());
    }
    fv.values[1] = static_cast<float>(std::log1p(gap_mean) / 5.0);
    fv.values[2] = static_cast<float>(std::log1p(std::sqrt(gap_var)) / 5.0);

    std::array<uint64_t, 256> hist{};
    for (const auto& r : window)
        for (uint8_t b : r.payload) ++hist[b];
    const double total_bytes = static_cast<double>(n * 8);
    double entropy = 0.0;
    for (uint64_t c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total_bytes;
        entropy -= p * std::log2(p);
    }
    fv.values[3] = static_cast<float>(entropy / 8.0);

    std::vector<uint32_t> ids;
    ids.reserve(n);
    for (const auto& r : window) ids.push_back(r.message_id);
    std::sort(ids.begin(), ids.end());
    const size_t uniq = static_cast<size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    fv.values[4] = static_cast<float>(static_cast<double>(uniq) / static_cast<double>(n));

    double burst = 0.0;
    if (!gaps_ms.empty()) {
        std::vector<double> sorted = gaps_ms;
        std::sort(sorted.begin(), sorted.end());
        const double med = sorted[sorted.size() / 2];
        if (med > 0.0) {
            size_t fast = 0;
            for (double g : gaps_ms)
                if (g < 0.25 * med) ++fast;
            burst = static_cast<double>(fast) / static_cast<double>(gaps_ms.size());
        }
    }
    fv.values[5] = static_cast<float>(burst);

    std::array<double, 8> mean{};
    for (const auto& r : window)
        for (size_t b = 0; b < 8; ++b) mean[b] += r.payload[b];
    for (size_t b = 0; b < 8; ++b) {
        mean[b] /= static_cast<double>(n);
        fv.values[6 + b] = static_cast<float>(mean[b] / 255.0);
    }

    std::vector<uint32_t> comps;
    comps.reserve(n);
    for (const auto& r : window) comps.push_back(r.component_id);
    std::sort(comps.begin(), comps.end());
    size_t best_run = 1, run = 1;
    for (size_t i = 1; i < comps.size(); ++i) {
        run = (comps[i] == comps[i - 1]) ? run + 1 : 1;
        best_run = std::max(best_run, run);
    }
    fv.values[14] = static_cast<float>(static_cast<double>(best_run) / static_cast<double>(n));

    double pooled_var = 0.0;
    for (size_t b = 0; b < 8; ++b) {
        double var = 0.0;
        for (const auto& r : window) {
            const double d = static_cast<double>(r.payload[b]) - mean[b];
            var += d * d;
        }
        pooled_var += var / static_cast<double>(n);
    }
    fv.values[15] = static_cast<float>(std::sqrt(pooled_var / 8.0) / 64.0);

    fv.label = 0;
    for (const auto& r : window)
        if (r.attack_tag != AttackTag::none) fv.label = 1;
    return fv;
}

std::vector<std::span<const LogRecord>> split_windows(std::span<const LogRecord> trace,
                                                      uint64_t gap_us) {
    std::vector<std::span<const LogRecord>> out;
    if (trace.empty()) return out;
    size_t start = 0;
    for (size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].timestamp_us - trace[i - 1].timestamp_us > gap_us) {
            out.push_back(trace.subspan(start, i - start));
            start = i;
        }
    }
    out.push_back(trace.subspan(start));
    return out;
}

CentralModel train_central(const std::vector<FeatureVector>& data, uint32_t rounds,
                           float learning_rate) {
    if (data.empty()) throw std::invalid_argument("train_central: empty data");
    const size_t n = data.size();
    size_t n1 = 0;
    for (const auto& d : data) n1 += d.label;
    if (n1 == 0 || n1 == n)
        throw degenerate_data_error("train_central: data must contain both classes");

    CentralModel model;
    model.learning_rate = learning_rate;
    model.rounds = rounds;
    const double p1 = static_cast<double>(n1) / static_cast<double>(n);
    model.base_score = static_cast<float>(std::log(p1 / (1.0 - p1)));
    if (rounds == 0) return model;

    // per-feature presorted sample order
    std::array<std::vector<uint32_t>, kFeatureCount> order;
    for (size_t f = 0; f < kFeatureCount; ++f) {
        order[f].resize(n);
        std::iota(order[f].begin(), order[f].end(), 0u);
        std::stable_sort(order[f].begin(), order[f].end(), [&](uint32_t a, uint32_t b) {
            return data[a].values[f] < data[b].values[f];
        });
    }

    std::vector<double> score(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    const double lambda = 1e-6;

    for (uint32_t round = 0; round < rounds; ++round) {
        double g_sum = 0.0, h_sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double p = sigmoid(score[i]);
            grad[i] = p - static_cast<double>(data[i].label);
            hess[i] = p * (1.0 - p);
            g_sum += grad[i];
            h_sum += hess[i];
        }
        const double base_obj = g_sum * g_sum / (h_sum + lambda);

        double best_gain = 0.0;
        uint32_t best_feature = 0;
        float best_threshold = 0.0f;
        double best_gl = 0.0, best_hl = 0.0;
        bool found = false;

        for (uint32_t f = 0; f < kFeatureCount; ++f) {
            const auto& ord = order[f];
            double gl = 0.0, hl = 0.0;
            for (size_t k = 0; k + 1 < n; ++k) {
                const uint32_t i = ord[k];
                gl += grad[i];
                hl += hess[i];
                const float v = data[i].values[f];
                const float v_next = data[ord[k + 1]].values[f];
                if (v == v_next) continue; // no split point between equal values
                const double gr = g_sum - gl, hr = h_sum - hl;
                const double gain =
                    gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - base_obj;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5f * (v + v_next);
                    best_gl = gl;
                    best_hl = hl;
                    found = true;
                }
            }
        }
        if (!found) break; // nothing left to split on

        Stump s;
        s.feature = best_feature;
        s.threshold = best_threshold;
        s.left = static_cast<float>(-best_gl / (best_hl + lambda) * learning_rate);
        const double gr = g_sum - best_gl, hr = h_sum - best_hl;
        s.right = static_cast<float>(-gr / (hr + lambda) * learning_rate);
        model.stumps.push_back(s);
        for (size_t i = 0; i < n; ++i)
            score[i] += data[i].values[s.feature] <= s.threshold ? s.left : s.right;
    }
    model.rounds = static_cast<uint32_t>(model.stumps.size());
    return model;
}

double predict_central(const CentralModel& model, const FeatureVector& x) {
    double z = model.base_score;
    for (const auto& s : model.stumps)
        z += x.values[s.feature] <= s.threshold ? s.left : s.right;
    return sigmoid(z);
}

std::vector<float> predict_central_batch(const CentralModel& model,
                                         const std::vector<FeatureVector>& data, Exec exec) {
    std::vector<float> out(data.size());
    const bool parallel = exec == Exec::parallel;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(data.size()); ++i)
        out[static_cast<size_t>(i)] =
            static_cast<float>(predict_central(model, data[static_cast<size_t>(i)]));
    (void)parallel;
    return out;
}

ModelParams ffnn_init(const std::vector<uint32_t>& layer_sizes, uint64_t seed) {
    ModelParams p;
    p.layer_sizes = layer_sizes;
    p.weights.resize(weight_count(layer_sizes));
    size_t off = 0;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const uint32_t n_in = layer_sizes[l], n_out = layer_sizes[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
        Rng rng(seed, l);
        for (uint32_t j = 0; j < n_out; ++j) {
            for (uint32_t i = 0; i <= n_in; ++i) {
                const double w = (i == n_in) ? 0.0 : rng.uniform(-a, a);
                p.weights[off + j * (n_in + 1) + i] = static_cast<float>(w);
            }
        }
        off += static_cast<size_t>(n_in + 1) * n_out;
    }
    return p;
}

namespace {

struct ForwardState {
    // activations[l] holds layer l's outputs; activations[0] is the input
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre; // pre-activation per non-input layer
};

double forward(const ModelParams& p, const FeatureVector& x, ForwardState* st) {
    const auto& ls = p.layer_sizes;
    std::vector<double> act(ls[0]);
    for (size_t i = 0; i < ls[0]; ++i) act[i] = x.values[i];
    if (st) {
        st->activations.clear();
        st->pre.clear();
        st->activations.push_back(act);
    }
    size_t off = 0;
    for (size_t l = 0; l + 1 < ls.size(); ++l) {
        const uint32_t n_in = ls[l], n_out = ls[l + 1];
        std::vector<double> z(n_out);
        for (uint32_t j = 0; j < n_out; ++j) {
            double s = static_cast<double>(p.weights[off + j * (n_in + 1) + n_in]); // bias
            for (uint32_t i = 0; i < n_in; ++i)
                s += static_cast<double>(p.weights[off + j * (n_in + 1) + i]) * act[i];
            z[j] = s;
        }
        const bool last = (l + 2 == ls.size());
        std::vector<double> a(n_out);
        for (uint32_t j = 0; j < n_out; ++j) a[j] = last ? sigmoid(z[j]) : std::max(0.0, z[j]);
        if (st) {
            st->pre.push_back(std::move(z));
            st->activations.push_back(a);
        }
        act = std::move(a);
        off += static_cast<size_t>(n_in + 1) * n_out;
    }
    return act[0];
}

void validate_params(const ModelParams& p) {
    if (p.layer_sizes.size() < 2) throw shape_error("ffnn: need at least two layers");
    if (p.layer_sizes.front() != kFeatureCount)
        throw shape_error("ffnn: input layer width must equal feature count");
    if (p.layer_sizes.back() != 1) throw shape_error("ffnn: output layer width must be 1");
    if (p.weights.size() != weight_count(p.layer_sizes))
        throw shape_error("ffnn: weight count does not match layer sizes");
}

// accumulates the single-sample gradient into grad (size == weights)
void backward(const ModelParams& p, const FeatureVector& x, std::vector<double>& grad) {
    ForwardState st;
    const double prob = forward(p, x, &st);
    const auto& ls = p.layer_sizes;
    const size_t n_layers = ls.size();

    std::vector<size_t> offsets(n_layers - 1);
    size_t off = 0;
    for (size_t l = 0; l + 1 < n_layers; ++l) {
        offsets[l] = off;
        off += static_cast<size_t>(ls[l] + 1) * ls[l + 1];
    }

    // sigmoid + cross-entropy at the output
    std::vector<double> delta{prob - static_cast<double>(x.label)};
    for (size_t l = n_layers - 1; l-- > 0;) {
        const uint32_t n_in = ls[l], n_out = ls[l + 1];
        const auto& a_prev = st.activations[l];
        const size_t base = offsets[l];
        for (uint32_t j = 0; j < n_out; ++j) {
            const double d = delta[j];
            for (uint32_t i = 0; i < n_in; ++i) grad[base + j * (n_in + 1) + i] += d * a_prev[i];
            grad[base + j * (n_in + 1) + n_in] += d;
        }
        if (l == 0) break;
        std::vector<double> prev(n_in, 0.0);
        for (uint32_t i = 0; i < n_in; ++i) {
            double s = 0.0;
            for (uint32_t j = 0; j < n_out; ++j)
                s += static_cast<double>(p.weights[base + j * (n_in + 1) + i]) * delta[j];
            prev[i] = st.pre[l - 1][i] > 0.0 ? s : 0.0; // relu'
        }
        delta = std::move(prev);
    }
}

} // namespace

ModelParams ffnn_train(const ModelParams& params, const std::vector<FeatureVector>& data,
                       uint32_t epochs, double learning_rate, uint64_t seed,
                       uint32_t batch_size) {
    validate_params(params);
    if (data.empty()) throw std::invalid_argument("ffnn_train: empty data");
    if (batch_size == 0) throw std::invalid_argument("ffnn_train: batch_size must be >= 1");

    ModelParams out = params;
    out.sample_count = data.size();
    if (epochs == 0) return out;

    const size_t n = data.size();
    std::vector<uint32_t> idx(n);
    std::vector<double> grad(out.weights.size());

    for (uint32_t epoch = 0; epoch < epochs; ++epoch) {
        std::iota(idx.begin(), idx.end(), 0u);
        Rng shuffle_rng(seed, epoch);
        for (size_t i = n; i > 1; --i)
            std::swap(idx[i - 1], idx[shuffle_rng.next_below(i)]);

        for (size_t start = 0; start < n; start += batch_size) {
            const size_t end = std::min(n, start + batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (size_t k = start; k < end; ++k) backward(out, data[idx[k]], grad);
            const double scale = learning_rate / static_cast<double>(end - start);
            for (size_t w = 0; w < out.weights.size(); ++w)
                out.weights[w] =
                    static_cast<float>(static_cast<double>(out.weights[w]) - scale * grad[w]);
        }
    }
    return out;
}

double ffnn_predict(const ModelParams& params, const FeatureVector& x) {
    return forward(params, x, nullptr);
}

std::vector<float> ffnn_predict_batch(const ModelParams& params,
                                      const std::vector<FeatureVector>& data, Exec exec) {
    validate_params(params);
    std::vector<float> out(data.size());
    const bool parallel = exec == Exec::parallel;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int64_t i = 0; i < static_cast<int64_t>(data.size()); ++i)
        out[static_cast<size_t>(i)] =
            static_cast<float>(forward(params, data[static_cast<size_t>(i)], nullptr));
    (void)parallel;
    return out;
}

double ffnn_loss(const ModelParams& params, const std::vector<FeatureVector>& data) {
    if (data.empty()) throw std::invalid_argument("ffnn_loss: empty data");
    double total = 0.0;
    for (const auto& d : data) total += bce(forward(params, d, nullptr), d.label);
    return total / static_cast<double>(data.size());
}

std::vector<double> ffnn_gradient(const ModelParams& params, const FeatureVector& x) {
    validate_params(params);
    std::vector<double> grad(params.weights.size(), 0.0);
    backward(params, x, grad);
    return grad;
}

double ffnn_sample_loss(const ModelParams& params, const FeatureVector& x) {
    return bce(forward(params, x, nullptr), x.label);
}

ModelParams fedavg(const std::vector<ModelParams>& updates) {
    if (updates.empty()) throw std::invalid_argument("fedavg: empty update list");
    const auto& ls = updates.front().layer_sizes;
    uint64_t total = 0;
    for (const auto& u : updates) {
        if (u.layer_sizes != ls) throw shape_error("fedavg: layer size mismatch");
        if (u.weights.size() != updates.front().weights.size())
            throw shape_error("fedavg: weight count mismatch");
        total += u.sample_count;
    }
    if (total == 0) throw std::invalid_argument("fedavg: sample counts sum to zero");

    ModelParams out;
    out.layer_sizes = ls;
    out.sample_count = total;
    out.weights.resize(updates.front().weights.size());
    std::vector<double> acc(out.weights.size(), 0.0);
    for (const auto& u : updates) {
        const double w = static_cast<double>(u.sample_count);
        for (size_t i = 0; i < acc.size(); ++i)
            acc[i] += w * static_cast<double>(u.weights[i]);
    }
    for (size_t i = 0; i < acc.size(); ++i)
        out.weights[i] = static_cast<float>(acc[i] / static_cast<double>(total));
    return out;
}

Metrics evaluate(const std::vector<uint8_t>& predictions, const std::vector<uint8_t>& labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("evaluate: length mismatch");
    if (labels.empty()) throw std::invalid_argument("evaluate: empty inputs");
    uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            predictions[i] ? ++tp : ++fn;
        } else {
            predictions[i] ? ++fp : ++tn;
        }
    }
    Metrics m;
    m.support0 = tn + fp;
    m.support1 = tp + fn;
    m.recall_class0 = m.support0 ? static_cast<double>(tn) / static_cast<double>(m.support0) : 0.0;
    m.recall_class1 = m.support1 ? static_cast<double>(tp) / static_cast<double>(m.support1) : 0.0;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.support0 + m.support1);
    return m;
}

} // namespace evsoar::learn
