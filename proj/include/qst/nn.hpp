#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qst/dataset.hpp"
#include "qst/gaussian.hpp"
#include "qst/rng.hpp"
#include "qst/tensor.hpp"

// From-scratch FP32 layer-graph network: 1D strided convolutions plus a dense
// head, mapping a 2048-point quadrature sequence to the raw 4-vector
// (r_hat, nbar_hat, cos 2theta, sin 2theta). Forward activations are stored
// as 32-bit floats; dot products and all loss/gradient work accumulate in
// 64-bit floats.

namespace qst {

enum class LayerKind : uint8_t { Conv1D = 1, Dense = 2, ReLU = 3, Flatten = 4 };

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    // Conv1D: out_ch x in_ch x kernel weights, stride, no padding
    int in_ch = 0, out_ch = 0, kernel = 0, stride = 0;
    // Dense: out x in weights
    int in = 0, out = 0;

    static LayerSpec conv1d(int in_ch, int out_ch, int kernel, int stride) {
        LayerSpec s;
        s.kind = LayerKind::Conv1D;
        s.in_ch = in_ch;
        s.out_ch = out_ch;
        s.kernel = kernel;
        s.stride = stride;
        return s;
    }
    static LayerSpec dense(int in, int out) {
        LayerSpec s;
        s.kind = LayerKind::Dense;
        s.in = in;
        s.out = out;
        return s;
    }
    static LayerSpec relu() { return LayerSpec{LayerKind::ReLU}; }
    static LayerSpec flatten() { return LayerSpec{LayerKind::Flatten}; }
};

/// (channels, length) of a sequence tensor, or (size, 1) once flattened.
struct ActShape {
    int ch = 0;
    int len = 0;
    bool flat = false;

    int numel() const { return ch * len; }
};

inline int conv_output_length(int in_len, int kernel, int stride) {
    return (in_len - kernel) / stride + 1;
}

inline ActShape infer_output_shape(const LayerSpec& spec, const ActShape& in) {
    switch (spec.kind) {
        case LayerKind::Conv1D: {
            if (in.flat || in.ch != spec.in_ch)
                throw Error("conv1d: input shape mismatch");
            const int out_len = conv_output_length(in.len, spec.kernel, spec.stride);
            if (out_len <= 0) throw Error("conv1d: kernel larger than input");
            return {spec.out_ch, out_len, false};
        }
        case LayerKind::Dense:
            if (!in.flat || in.numel() != spec.in)
                throw Error("dense: input shape mismatch");
            return {spec.out, 1, true};
        case LayerKind::ReLU:
            return in;
        case LayerKind::Flatten:
            return {in.numel(), 1, true};
    }
    throw Error("unknown layer kind");
}

/// How the final layer output is turned into the prediction vector.
/// SoftplusAtan2 is the 4-output head convention: softplus on outputs 0 and 1
/// (nonnegative r and nbar), outputs 2 and 3 passed through for the
/// (cos 2theta, sin 2theta) pair. Hand-built test models can opt out.
enum class HeadKind : uint8_t { Linear = 0, SoftplusAtan2 = 1 };

struct LayerParams {
    std::vector<float> w;
    std::vector<float> b;
};

struct Model {
    std::vector<LayerSpec> layers;
    std::vector<LayerParams> params; // parallel to layers; empty for ReLU/Flatten
    HeadKind head = HeadKind::Linear;
    double norm_mean = 0.0;
    double norm_scale = 1.0;
    int input_len = 0; // single input channel

    ActShape input_shape() const { return {1, input_len, false}; }

    int64_t parameter_count() const {
        int64_t n = 0;
        for (const auto& p : params) n += static_cast<int64_t>(p.w.size() + p.b.size());
        return n;
    }
};

inline double softplus(double z) {
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace detail {

/// He-uniform init: weights uniform in [-sqrt(6/fan_in), +sqrt(6/fan_in))
/// from a per-layer counter stream; biases zero.
inline void init_layer(LayerParams& p, const LayerSpec& spec, uint64_t stream) {
    int fan_in = 0, w_count = 0, b_count = 0;
    if (spec.kind == LayerKind::Conv1D) {
        fan_in = spec.in_ch * spec.kernel;
        w_count = spec.out_ch * spec.in_ch * spec.kernel;
        b_count = spec.out_ch;
    } else if (spec.kind == LayerKind::Dense) {
        fan_in = spec.in;
        w_count = spec.out * spec.in;
        b_count = spec.out;
    } else {
        return;
    }
    const double limit = std::sqrt(6.0 / fan_in);
    p.w.resize(w_count);
    for (int i = 0; i < w_count; ++i)
        p.w[i] = static_cast<float>(rng::uniform_in(stream, i, -limit, limit));
    p.b.assign(b_count, 0.0f);
}

} // namespace detail

inline Model model_from_specs(std::vector<LayerSpec> layers, int input_len, HeadKind head,
                              uint64_t seed) {
    Model m;
    m.layers = std::move(layers);
    m.head = head;
    m.input_len = input_len;
    m.params.resize(m.layers.size());
    ActShape shape = m.input_shape();
    for (size_t i = 0; i < m.layers.size(); ++i) {
        shape = infer_output_shape(m.layers[i], shape); // validates the stack
        detail::init_layer(m.params[i], m.layers[i], rng::mix64(seed, i));
    }
    return m;
}

/// Architecture registry. "qst-cnn-v1" is the production model:
/// 1x2048 -> Conv(1->8,k16,s4)+ReLU -> Conv(8->16,k8,s4)+ReLU ->
/// Conv(16->32,k8,s4)+ReLU -> Flatten -> Dense(960->128)+ReLU -> Dense(128->4).
inline Model model_init(const std::string& arch_id, uint64_t seed) {
    if (arch_id == "qst-cnn-v1") {
        return model_from_specs(
            {LayerSpec::conv1d(1, 8, 16, 4), LayerSpec::relu(), LayerSpec::conv1d(8, 16, 8, 4),
             LayerSpec::relu(), LayerSpec::conv1d(16, 32, 8, 4), LayerSpec::relu(),
             LayerSpec::flatten(), LayerSpec::dense(960, 128), LayerSpec::relu(),
             LayerSpec::dense(128, 4)},
            2048, HeadKind::SoftplusAtan2, seed);
    }
    if (arch_id == "qst-cnn-tiny") {
        // test/bring-up model on 32-point sequences
        return model_from_specs(
            {LayerSpec::conv1d(1, 2, 4, 2), LayerSpec::relu(), LayerSpec::flatten(),
             LayerSpec::dense(30, 8), LayerSpec::relu(), LayerSpec::dense(8, 4)},
            32, HeadKind::SoftplusAtan2, seed);
    }
    throw Error("model_init: unknown arch_id " + arch_id);
}

/// (x - mean) / scale with the constants frozen into the model at training
/// time.
inline Tensor normalize_input(const QuadratureSequence& seq, const Model& m) {
    if (static_cast<int>(seq.values.size()) != m.input_len)
        throw Error("normalize_input: sequence length mismatch");
    Tensor t = Tensor::zeros({1, m.input_len});
    for (int i = 0; i < m.input_len; ++i)
        t.data[i] = static_cast<float>((seq.values[i] - m.norm_mean) / m.norm_scale);
    return t;
}

/// Per-layer activation storage reused across forward calls; buffers are
/// sized once per model so steady-state inference does not allocate.
/// Allocating delta buffers later (first backward call) leaves the stored
/// activations untouched.
struct Workspace {
    std::vector<std::vector<float>> acts;   // acts[0] = input, acts[i+1] = layer i output
    std::vector<ActShape> shapes;           // parallel to acts
    std::vector<std::vector<double>> delta; // backward scratch, parallel to acts
    uint64_t model_fingerprint = 0;
    int64_t alloc_count = 0;                // bumped whenever buffers are (re)built

    static uint64_t fingerprint(const Model& m) {
        uint64_t h = 0x9E3779B97F4A7C15ull ^ static_cast<uint64_t>(m.input_len);
        for (const auto& l : m.layers) {
            h = h * 1099511628211ull + static_cast<uint64_t>(l.kind);
            h = h * 1099511628211ull + static_cast<uint64_t>(l.in_ch * 131 + l.out_ch * 17 +
                                                            l.kernel * 7 + l.stride * 3 +
                                                            l.in * 257 + l.out);
        }
        return h;
    }

    void prepare(const Model& m, bool with_backward) {
        const uint64_t fp = fingerprint(m);
        if (fp != model_fingerprint) {
            ++alloc_count;
            model_fingerprint = fp;
            shapes.assign(1, m.input_shape());
            for (const auto& l : m.layers) shapes.push_back(infer_output_shape(l, shapes.back()));
            acts.resize(shapes.size());
            for (size_t i = 0; i < shapes.size(); ++i) acts[i].assign(shapes[i].numel(), 0.0f);
            delta.clear();
        }
        if (with_backward && delta.size() != shapes.size()) {
            ++alloc_count;
            delta.resize(shapes.size());
            for (size_t i = 0; i < shapes.size(); ++i) delta[i].assign(shapes[i].numel(), 0.0);
        }
    }
};

namespace detail {

inline void conv1d_forward(const LayerSpec& s, const LayerParams& p, const float* x, int in_len,
                           float* y, int out_len) {
    for (int o = 0; o < s.out_ch; ++o) {
        const float* wo = p.w.data() + static_cast<size_t>(o) * s.in_ch * s.kernel;
        for (int j = 0; j < out_len; ++j) {
            double acc = p.b[o];
            const int base = j * s.stride;
            for (int c = 0; c < s.in_ch; ++c) {
                const float* xc = x + static_cast<size_t>(c) * in_len + base;
                const float* wc = wo + static_cast<size_t>(c) * s.kernel;
                for (int k = 0; k < s.kernel; ++k) acc += static_cast<double>(wc[k]) * xc[k];
            }
            y[static_cast<size_t>(o) * out_len + j] = static_cast<float>(acc);
        }
    }
}

inline void dense_forward(const LayerSpec& s, const LayerParams& p, const float* x, float* y) {
    for (int o = 0; o < s.out; ++o) {
        const float* wo = p.w.data() + static_cast<size_t>(o) * s.in;
        double acc = p.b[o];
        for (int i = 0; i < s.in; ++i) acc += static_cast<double>(wo[i]) * x[i];
        y[o] = static_cast<float>(acc);
    }
}

} // namespace detail

/// Run the layer stack; ws.acts.back() holds the raw final-layer output
/// (pre-head). Returns the prediction vector with the head applied.
inline Tensor forward(const Model& m, const Tensor& input, Workspace& ws) {
    if (input.shape.size() != 2 || input.shape[0] != 1 || input.shape[1] != m.input_len)
        throw Error("forward: input shape mismatch");
    ws.prepare(m, false);
    ws.acts[0].assign(input.data.begin(), input.data.end());
    for (size_t li = 0; li < m.layers.size(); ++li) {
        const LayerSpec& s = m.layers[li];
        const ActShape& ish = ws.shapes[li];
        const ActShape& osh = ws.shapes[li + 1];
        const float* x = ws.acts[li].data();
        float* y = ws.acts[li + 1].data();
        switch (s.kind) {
            case LayerKind::Conv1D:
                detail::conv1d_forward(s, m.params[li], x, ish.len, y, osh.len);
                break;
            case LayerKind::Dense:
                detail::dense_forward(s, m.params[li], x, y);
                break;
            case LayerKind::ReLU:
                for (int i = 0; i < ish.numel(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
                break;
            case LayerKind::Flatten:
                std::copy(x, x + ish.numel(), y);
                break;
        }
    }
    Tensor out = Tensor::zeros({ws.shapes.back().numel()});
    const auto& raw = ws.acts.back();
    for (size_t i = 0; i < raw.size(); ++i) out.data[i] = raw[i];
    if (m.head == HeadKind::SoftplusAtan2) {
        out.data[0] = static_cast<float>(softplus(raw[0]));
        out.data[1] = static_cast<float>(softplus(raw[1]));
    }
    for (float v : out.data)
        if (!std::isfinite(v)) throw Error("forward: non-finite activation");
    return out;
}

inline Tensor forward(const Model& m, const Tensor& input) {
    Workspace ws;
    return forward(m, input, ws);
}

/// theta = atan2(s_hat, c_hat)/2 wrapped into [0, pi); r and nbar come
/// straight off the (already nonnegative) head.
inline StateParams decode_head(const Tensor& raw) {
    if (raw.numel() != 4) throw Error("decode_head: expected 4 outputs");
    const double theta = 0.5 * std::atan2(static_cast<double>(raw.data[3]),
                                          static_cast<double>(raw.data[2]));
    return StateParams::make(raw.data[0], theta, raw.data[1]);
}

struct LossWeights {
    double w_r = 1.0;
    double w_n = 1.0;
    double w_theta = 1.0;
};

/// L = w_r (r_hat - r)^2 + w_n (nbar_hat - nbar)^2
///   + w_theta [(c_hat - cos 2theta)^2 + (s_hat - sin 2theta)^2]
inline double loss(const Tensor& pred, const StateParams& truth, const LossWeights& w) {
    const double dr = pred.data[0] - truth.r;
    const double dn = pred.data[1] - truth.nbar;
    const double dc = pred.data[2] - std::cos(2.0 * truth.theta);
    const double ds = pred.data[3] - std::sin(2.0 * truth.theta);
    return w.w_r * dr * dr + w.w_n * dn * dn + w.w_theta * (dc * dc + ds * ds);
}

/// Accumulated parameter gradients (64-bit), parallel to Model::params.
struct Gradients {
    std::vector<std::vector<double>> gw, gb;

    void prepare(const Model& m) {
        if (gw.size() == m.params.size()) return;
        gw.resize(m.params.size());
        gb.resize(m.params.size());
        for (size_t i = 0; i < m.params.size(); ++i) {
            gw[i].assign(m.params[i].w.size(), 0.0);
            gb[i].assign(m.params[i].b.size(), 0.0);
        }
    }
    void zero() {
        for (auto& g : gw) std::fill(g.begin(), g.end(), 0.0);
        for (auto& g : gb) std::fill(g.begin(), g.end(), 0.0);
    }
};

/// Backpropagate one example. `ws` must hold the activations of the matching
/// forward call; `pred` is its returned (post-head) output. Gradients are
/// accumulated (+=) into `grads`.
inline void backward(const Model& m, Workspace& ws, const Tensor& pred, const StateParams& truth,
                     const LossWeights& lw, Gradients& grads) {
    ws.prepare(m, true);
    grads.prepare(m);

    auto& dfinal = ws.delta.back();
    std::fill(dfinal.begin(), dfinal.end(), 0.0);
    // dL/dpred, then through the head into the raw final layer output
    const double dpred0 = 2.0 * lw.w_r * (pred.data[0] - truth.r);
    const double dpred1 = 2.0 * lw.w_n * (pred.data[1] - truth.nbar);
    const double dpred2 = 2.0 * lw.w_theta * (pred.data[2] - std::cos(2.0 * truth.theta));
    const double dpred3 = 2.0 * lw.w_theta * (pred.data[3] - std::sin(2.0 * truth.theta));
    const auto& raw = ws.acts.back();
    if (m.head == HeadKind::SoftplusAtan2) {
        dfinal[0] = dpred0 * sigmoid(raw[0]);
        dfinal[1] = dpred1 * sigmoid(raw[1]);
    } else {
        dfinal[0] = dpred0;
        dfinal[1] = dpred1;
    }
    if (dfinal.size() >= 4) {
        dfinal[2] = dpred2;
        dfinal[3] = dpred3;
    }

    for (size_t li = m.layers.size(); li-- > 0;) {
        const LayerSpec& s = m.layers[li];
        const ActShape& ish = ws.shapes[li];
        const ActShape& osh = ws.shapes[li + 1];
        const float* x = ws.acts[li].data();
        const std::vector<double>& dout = ws.delta[li + 1];
        std::vector<double>& din = ws.delta[li];
        std::fill(din.begin(), din.end(), 0.0);
        switch (s.kind) {
            case LayerKind::Conv1D: {
                auto& gw = grads.gw[li];
                auto& gb = grads.gb[li];
                const auto& w = m.params[li].w;
                for (int o = 0; o < s.out_ch; ++o) {
                    const size_t wo = static_cast<size_t>(o) * s.in_ch * s.kernel;
                    for (int j = 0; j < osh.len; ++j) {
                        const double d = dout[static_cast<size_t>(o) * osh.len + j];
                        if (d == 0.0) continue;
                        gb[o] += d;
                        const int base = j * s.stride;
                        for (int c = 0; c < s.in_ch; ++c) {
                            const size_t xoff = static_cast<size_t>(c) * ish.len + base;
                            const size_t woff = wo + static_cast<size_t>(c) * s.kernel;
                            for (int k = 0; k < s.kernel; ++k) {
                                gw[woff + k] += d * x[xoff + k];
                                din[xoff + k] += d * w[woff + k];
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::Dense: {
                auto& gw = grads.gw[li];
                auto& gb = grads.gb[li];
                const auto& w = m.params[li].w;
                for (int o = 0; o < s.out; ++o) {
                    const double d = dout[o];
                    gb[o] += d;
                    const size_t wo = static_cast<size_t>(o) * s.in;
                    for (int i = 0; i < s.in; ++i) {
                        gw[wo + i] += d * x[i];
                        din[i] += d * w[wo + i];
                    }
                }
                break;
            }
            case LayerKind::ReLU:
                for (int i = 0; i < ish.numel(); ++i) din[i] = x[i] > 0.0f ? dout[i] : 0.0;
                break;
            case LayerKind::Flatten:
                std::copy(dout.begin(), dout.end(), din.begin());
                break;
        }
    }
}

} // namespace qst
