#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qst/binio.hpp"
#include "qst/common.hpp"
#include "qst/gaussian.hpp"
#include "qst/rng.hpp"

// Synthetic homodyne data: labeled quadrature sequences sampled from the
// Gaussian marginals of degraded squeezed states, plus the .qds container.
//
// Reproducibility contract: generate_dataset is a pure function of GenConfig
// at the byte level on a fixed platform. Per-example streams are derived as
//
//   example_seed = mix64(global_seed, example_index)
//   label stream = mix64(example_seed, 0)   counters 0,1,2 -> S dB, excess dB, theta
//   data stream  = mix64(example_seed, 1)   point k -> Box-Muller counters 2k, 2k+1
//   phase stream = mix64(example_seed, 2)   schedule 1 only, counter k -> phi_k
//
// so any subset of examples can be regenerated independently.

namespace qst {

/// Homodyne outcomes are rejected (and redrawn) beyond this magnitude so the
/// file format stays range-checkable. Unreachable for in-regime states: the
/// Box-Muller draw is bounded by ~8.57 sigma and sigma < 3.2 in regime.
inline constexpr double kQuadratureClamp = 50.0;

struct QuadratureSequence {
    std::vector<float> values;
    uint8_t schedule_id = 0;

    size_t seq_len() const { return values.size(); }
};

struct LabeledExample {
    StateParams params;
    QuadratureSequence sequence;
};

struct GenConfig {
    uint32_t n_examples = 0;
    uint32_t seq_len = 2048;
    uint8_t schedule_id = 0;
    double squeezing_db_min = 0.0;
    double squeezing_db_max = 10.0;
    double excess_db_min = 0.0; // anti-squeezing = squeezing + excess
    double excess_db_max = 3.0;
    double theta_min = 0.0;
    double theta_max = kPi;
    uint64_t global_seed = 0;
};

struct Dataset {
    uint32_t seq_len = 2048;
    uint8_t schedule_id = 0;
    std::vector<LabeledExample> examples;
};

/// Local-oscillator phases across one sequence. Schedule 0 is the
/// deterministic linear sweep phi_k = pi k / seq_len (shared by training and
/// inference); schedule 1 draws each phase uniformly from [0, pi) on the
/// given stream.
inline std::vector<double> phase_schedule(uint8_t schedule_id, uint32_t seq_len,
                                          uint64_t seed = 0) {
    std::vector<double> phi(seq_len);
    switch (schedule_id) {
        case 0:
            for (uint32_t k = 0; k < seq_len; ++k) phi[k] = kPi * k / seq_len;
            break;
        case 1:
            for (uint32_t k = 0; k < seq_len; ++k) phi[k] = rng::uniform_in(seed, k, 0.0, kPi);
            break;
        default:
            throw Error("phase_schedule: unknown schedule_id " + std::to_string(schedule_id));
    }
    return phi;
}

/// One homodyne outcome x ~ Normal(0, quadrature_variance(p, phi)) at point
/// index k of the data stream. Draws beyond the clamp are redrawn on a
/// shifted counter block (attempt a uses point index k + a * 2^32).
inline double draw_quadrature(const StateParams& p, double phi, uint64_t data_stream, uint64_t k,
                              double clamp = kQuadratureClamp) {
    const double sigma = std::sqrt(quadrature_variance(p, phi));
    for (uint64_t attempt = 0;; ++attempt) {
        const double x = sigma * rng::gaussian(data_stream, k + (attempt << 32));
        if (std::abs(x) <= clamp) return x;
    }
}

/// Sample a full sequence for ground-truth params `p`, deterministic in
/// (p, cfg, example_seed).
inline QuadratureSequence sample_sequence(const StateParams& p, const GenConfig& cfg,
                                          uint64_t example_seed) {
    const uint64_t data_stream = rng::mix64(example_seed, 1);
    const uint64_t phase_stream = rng::mix64(example_seed, 2);
    const auto phi = phase_schedule(cfg.schedule_id, cfg.seq_len, phase_stream);
    QuadratureSequence seq;
    seq.schedule_id = cfg.schedule_id;
    seq.values.resize(cfg.seq_len);
    for (uint32_t k = 0; k < cfg.seq_len; ++k)
        seq.values[k] = static_cast<float>(draw_quadrature(p, phi[k], data_stream, k));
    return seq;
}

/// Ground-truth label for example `index` under `cfg` (exposed so tests can
/// check the label distribution without materializing sequences).
inline StateParams label_for_example(const GenConfig& cfg, uint64_t index) {
    const uint64_t label_stream = rng::mix64(rng::mix64(cfg.global_seed, index), 0);
    const double s = rng::uniform_in(label_stream, 0, cfg.squeezing_db_min, cfg.squeezing_db_max);
    const double e = rng::uniform_in(label_stream, 1, cfg.excess_db_min, cfg.excess_db_max);
    const double th = rng::uniform_in(label_stream, 2, cfg.theta_min, cfg.theta_max);
    return params_from_db({s, s + e}, th);
}

inline Dataset generate_dataset(const GenConfig& cfg) {
    Dataset ds;
    ds.seq_len = cfg.seq_len;
    ds.schedule_id = cfg.schedule_id;
    ds.examples.resize(cfg.n_examples);
    for (uint32_t i = 0; i < cfg.n_examples; ++i) {
        const uint64_t example_seed = rng::mix64(cfg.global_seed, i);
        LabeledExample& ex = ds.examples[i];
        ex.params = label_for_example(cfg, i);
        ex.sequence = sample_sequence(ex.params, cfg, example_seed);
    }
    return ds;
}

// .qds layout (little-endian):
//   magic "QSTD" | u32 version=1 | u32 n_examples | u32 seq_len |
//   u8 schedule_id | u8 label_count=3 | u8[2] reserved |
//   per example: f64 r, f64 theta, f64 nbar, f32 values[seq_len]

inline void write_dataset(const Dataset& ds, const std::string& path) {
    ByteWriter w;
    w.put_magic("QSTD");
    w.put<uint32_t>(1);
    w.put<uint32_t>(static_cast<uint32_t>(ds.examples.size()));
    w.put<uint32_t>(ds.seq_len);
    w.put<uint8_t>(ds.schedule_id);
    w.put<uint8_t>(3);
    w.put<uint8_t>(0);
    w.put<uint8_t>(0);
    for (const LabeledExample& ex : ds.examples) {
        w.put<double>(ex.params.r);
        w.put<double>(ex.params.theta);
        w.put<double>(ex.params.nbar);
        w.raw(ex.sequence.values.data(), ex.sequence.values.size() * sizeof(float));
    }
    w.save(path);
}

inline Dataset read_dataset(const std::string& path) {
    ByteReader r = ByteReader::from_file(path);
    r.expect_magic("QSTD", ".qds");
    const uint32_t version = r.get<uint32_t>();
    if (version != 1)
        throw Error("unsupported .qds version " + std::to_string(version) + ": " + path);
    Dataset ds;
    const uint32_t n = r.get<uint32_t>();
    ds.seq_len = r.get<uint32_t>();
    ds.schedule_id = r.get<uint8_t>();
    const uint8_t label_count = r.get<uint8_t>();
    if (label_count != 3)
        throw Error("unsupported .qds label_count " + std::to_string(label_count) + ": " + path);
    r.get<uint8_t>();
    r.get<uint8_t>();
    ds.examples.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        LabeledExample& ex = ds.examples[i];
        const double pr = r.get<double>();
        const double pt = r.get<double>();
        const double pn = r.get<double>();
        ex.params = StateParams::make(pr, pt, pn);
        ex.sequence.schedule_id = ds.schedule_id;
        ex.sequence.values.resize(ds.seq_len);
        r.raw(ex.sequence.values.data(), ds.seq_len * sizeof(float));
        for (float v : ex.sequence.values)
            if (!std::isfinite(v) || std::abs(v) > kQuadratureClamp)
                throw Error("out-of-range quadrature value in " + path);
    }
    return ds;
}

} // namespace qst
