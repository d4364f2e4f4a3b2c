#pragma once

#include <string>

#include "qst/binio.hpp"
#include "qst/nn.hpp"

// .qnn model container (little-endian):
//   magic "QNNM" | u32 version=1 | f64 norm_mean | f64 norm_scale |
//   u32 layer_count | u32 input_len |
//   per layer: u8 kind tag,
//     Conv1D: u32 in_ch,out_ch,kernel,stride; f32 w[out][in][k]; f32 b[out]
//     Dense:  u32 in,out;                     f32 w[out][in];    f32 b[out]
//     ReLU/Flatten: no payload
//   | u32 CRC-32 of all preceding bytes.
//
// input_len is stored explicitly because strided convolutions floor-divide:
// the conv chain cannot be inverted from the dense input size alone. A
// trailing Dense layer with 4 outputs carries the softplus/atan2 head
// convention (part of the format contract, not a stored field).

namespace qst {

inline void save_model(const Model& m, const std::string& path) {
    ByteWriter w;
    w.put_magic("QNNM");
    w.put<uint32_t>(1);
    w.put<double>(m.norm_mean);
    w.put<double>(m.norm_scale);
    w.put<uint32_t>(static_cast<uint32_t>(m.layers.size()));
    w.put<uint32_t>(static_cast<uint32_t>(m.input_len));
    for (size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& s = m.layers[i];
        w.put<uint8_t>(static_cast<uint8_t>(s.kind));
        if (s.kind == LayerKind::Conv1D) {
            w.put<uint32_t>(s.in_ch);
            w.put<uint32_t>(s.out_ch);
            w.put<uint32_t>(s.kernel);
            w.put<uint32_t>(s.stride);
        } else if (s.kind == LayerKind::Dense) {
            w.put<uint32_t>(s.in);
            w.put<uint32_t>(s.out);
        }
        if (s.kind == LayerKind::Conv1D || s.kind == LayerKind::Dense) {
            w.raw(m.params[i].w.data(), m.params[i].w.size() * sizeof(float));
            w.raw(m.params[i].b.data(), m.params[i].b.size() * sizeof(float));
        }
    }
    w.append_crc();
    w.save(path);
}

inline Model load_model(const std::string& path) {
    ByteReader r = ByteReader::from_file(path);
    r.expect_magic("QNNM", ".qnn"); // magic before CRC: wrong container reports as such
    r.verify_trailing_crc(".qnn");
    const uint32_t version = r.get<uint32_t>();
    if (version != 1)
        throw Error("unsupported .qnn version " + std::to_string(version) + ": " + path);
    Model m;
    m.norm_mean = r.get<double>();
    m.norm_scale = r.get<double>();
    const uint32_t n_layers = r.get<uint32_t>();
    m.input_len = static_cast<int>(r.get<uint32_t>());
    if (n_layers == 0 || m.input_len <= 0) throw Error("empty model in " + path);
    m.layers.resize(n_layers);
    m.params.resize(n_layers);
    for (uint32_t i = 0; i < n_layers; ++i) {
        const uint8_t tag = r.get<uint8_t>();
        LayerSpec& s = m.layers[i];
        switch (tag) {
            case static_cast<uint8_t>(LayerKind::Conv1D): {
                const uint32_t ic = r.get<uint32_t>(), oc = r.get<uint32_t>();
                const uint32_t k = r.get<uint32_t>(), st = r.get<uint32_t>();
                if (ic == 0 || oc == 0 || k == 0 || st == 0 || k > 1u << 20 || oc > 1u << 20)
                    throw Error("invalid conv shape table in " + path);
                s = LayerSpec::conv1d(ic, oc, k, st);
                m.params[i].w.resize(static_cast<size_t>(oc) * ic * k);
                m.params[i].b.resize(oc);
                break;
            }
            case static_cast<uint8_t>(LayerKind::Dense): {
                const uint32_t in = r.get<uint32_t>(), out = r.get<uint32_t>();
                if (in == 0 || out == 0 || in > 1u << 24 || out > 1u << 24)
                    throw Error("invalid dense shape table in " + path);
                s = LayerSpec::dense(in, out);
                m.params[i].w.resize(static_cast<size_t>(out) * in);
                m.params[i].b.resize(out);
                break;
            }
            case static_cast<uint8_t>(LayerKind::ReLU):
                s = LayerSpec::relu();
                break;
            case static_cast<uint8_t>(LayerKind::Flatten):
                s = LayerSpec::flatten();
                break;
            default:
                throw Error("unknown layer tag in " + path);
        }
        if (!m.params[i].w.empty()) {
            r.raw(m.params[i].w.data(), m.params[i].w.size() * sizeof(float));
            r.raw(m.params[i].b.data(), m.params[i].b.size() * sizeof(float));
        }
    }
    if (r.remaining() != 4) throw Error("trailing bytes in " + path);
    const LayerSpec& last = m.layers.back();
    m.head = (last.kind == LayerKind::Dense && last.out == 4) ? HeadKind::SoftplusAtan2
                                                              : HeadKind::Linear;
    // validate the whole stack against the recorded input length
    ActShape shape = m.input_shape();
    for (const auto& l : m.layers) shape = infer_output_shape(l, shape);
    return m;
}

} // namespace qst
