#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qst/dataset.hpp"
#include "qst/nn.hpp"

// Training: Adam with frozen default constants (beta1 0.9, beta2 0.999,
// eps 1e-8, lr 1e-3, batch 64, 30 epochs), deterministic shuffling from the
// counter RNG, best-validation-model selection, and a CSV training log.

namespace qst {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint64_t seed = 0;
    LossWeights loss_weights;
    double val_fraction = 0.1;
    std::string log_path; // empty: no training log written
};

struct AdamState {
    std::vector<std::vector<double>> mw, vw, mb, vb;
    int64_t step = 0;

    void prepare(const Model& m) {
        if (mw.size() == m.params.size()) return;
        mw.resize(m.params.size());
        vw.resize(m.params.size());
        mb.resize(m.params.size());
        vb.resize(m.params.size());
        for (size_t i = 0; i < m.params.size(); ++i) {
            mw[i].assign(m.params[i].w.size(), 0.0);
            vw[i].assign(m.params[i].w.size(), 0.0);
            mb[i].assign(m.params[i].b.size(), 0.0);
            vb[i].assign(m.params[i].b.size(), 0.0);
        }
    }
};

namespace detail {

inline void adam_update(float* w, size_t n, const double* g, double* mv, double* vv,
                        const TrainConfig& cfg, double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        mv[i] = cfg.beta1 * mv[i] + (1.0 - cfg.beta1) * g[i];
        vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = mv[i] / bc1;
        const double vhat = vv[i] / bc2;
        w[i] = static_cast<float>(w[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon));
    }
}

} // namespace detail

/// One optimizer step over a batch of (input tensor, label) pairs; returns
/// the mean loss. Aborts with diagnostics if the loss goes non-finite.
inline double train_step(Model& m, const std::vector<const LabeledExample*>& batch,
                         const TrainConfig& cfg, AdamState& opt, Workspace& ws,
                         Gradients& grads) {
    opt.prepare(m);
    grads.prepare(m);
    grads.zero();
    double loss_sum = 0.0;
    for (const LabeledExample* ex : batch) {
        const Tensor input = normalize_input(ex->sequence, m);
        const Tensor pred = forward(m, input, ws);
        loss_sum += loss(pred, ex->params, cfg.loss_weights);
        backward(m, ws, pred, ex->params, cfg.loss_weights, grads);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    const double mean_loss = loss_sum * inv;
    if (!std::isfinite(mean_loss))
        throw Error("train_step: non-finite loss at step " + std::to_string(opt.step + 1));
    for (auto& g : grads.gw)
        for (double& v : g) v *= inv;
    for (auto& g : grads.gb)
        for (double& v : g) v *= inv;

    ++opt.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step));
    for (size_t li = 0; li < m.params.size(); ++li) {
        detail::adam_update(m.params[li].w.data(), m.params[li].w.size(), grads.gw[li].data(),
                            opt.mw[li].data(), opt.vw[li].data(), cfg, bc1, bc2);
        detail::adam_update(m.params[li].b.data(), m.params[li].b.size(), grads.gb[li].data(),
                            opt.mb[li].data(), opt.vb[li].data(), cfg, bc1, bc2);
    }
    return mean_loss;
}

inline double mean_loss_over(const Model& m, const Dataset& ds, size_t begin, size_t end,
                             const LossWeights& lw, Workspace& ws) {
    double sum = 0.0;
    for (size_t i = begin; i < end; ++i) {
        const Tensor pred = forward(m, normalize_input(ds.examples[i].sequence, m), ws);
        sum += loss(pred, ds.examples[i].params, lw);
    }
    return sum / static_cast<double>(end - begin);
}

/// Global mean and standard deviation of all quadrature values in the first
/// n_train examples; frozen into the model as normalization constants.
inline std::pair<double, double> dataset_norm_constants(const Dataset& ds, size_t n_train) {
    double sum = 0.0, sum2 = 0.0;
    int64_t count = 0;
    for (size_t i = 0; i < std::min(n_train, ds.examples.size()); ++i)
        for (float v : ds.examples[i].sequence.values) {
            sum += v;
            sum2 += static_cast<double>(v) * v;
            ++count;
        }
    if (count == 0) throw Error("dataset_norm_constants: no values");
    const double mean = sum / static_cast<double>(count);
    const double var = sum2 / static_cast<double>(count) - mean * mean;
    return {mean, std::sqrt(std::max(var, 1e-12))};
}

/// Full training run. The normalization constants are frozen from the
/// training split before the first step; the returned model is the epoch
/// snapshot with the best validation loss. Log rows: epoch,train_loss,val_loss.
inline Model train(const Dataset& ds, const TrainConfig& cfg, Model m) {
    if (ds.examples.empty()) throw Error("train: empty dataset");
    const size_t n = ds.examples.size();
    const size_t n_val = std::min(n - 1, static_cast<size_t>(std::round(n * cfg.val_fraction)));
    const size_t n_train = n - n_val;

    std::tie(m.norm_mean, m.norm_scale) = dataset_norm_constants(ds, n_train);

    std::FILE* logf = nullptr;
    if (!cfg.log_path.empty()) {
        logf = std::fopen(cfg.log_path.c_str(), "w");
        if (!logf) throw Error("train: cannot open log file " + cfg.log_path);
        std::fputs("epoch,train_loss,val_loss\n", logf);
    }

    AdamState opt;
    Workspace ws;
    Gradients grads;
    std::vector<size_t> order(n_train);
    for (size_t i = 0; i < n_train; ++i) order[i] = i;
    std::vector<const LabeledExample*> batch;

    Model best = m;
    double best_val = 1e300;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // deterministic Fisher-Yates shuffle for this epoch
        const uint64_t shuffle_stream = rng::mix64(cfg.seed, 0x5A5A5A5A00000000ull + epoch);
        for (size_t i = n_train - 1; i > 0; --i) {
            const size_t j = rng::word_at(shuffle_stream, i) % (i + 1);
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        size_t steps = 0;
        for (size_t start = 0; start < n_train; start += cfg.batch_size) {
            const size_t stop = std::min(start + cfg.batch_size, n_train);
            batch.clear();
            for (size_t i = start; i < stop; ++i) batch.push_back(&ds.examples[order[i]]);
            epoch_loss += train_step(m, batch, cfg, opt, ws, grads);
            ++steps;
        }
        epoch_loss /= static_cast<double>(steps);
        const double val_loss =
            n_val > 0 ? mean_loss_over(m, ds, n_train, n, cfg.loss_weights, ws) : epoch_loss;
        if (logf) std::fprintf(logf, "%d,%.9g,%.9g\n", epoch + 1, epoch_loss, val_loss);
        log::info("epoch %d/%d train_loss=%.6f val_loss=%.6f", epoch + 1, cfg.epochs, epoch_loss,
                  val_loss);
        if (val_loss < best_val) {
            best_val = val_loss;
            best = m;
        }
    }
    if (logf) std::fclose(logf);
    return best;
}

inline Model train(const Dataset& ds, const TrainConfig& cfg, const std::string& arch_id) {
    return train(ds, cfg, model_init(arch_id, cfg.seed));
}

} // namespace qst
