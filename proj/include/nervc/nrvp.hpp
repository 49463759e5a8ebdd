#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nervc/bytes.hpp"
#include "nervc/huffman.hpp"
#include "nervc/nerv.hpp"
#include "nervc/quantize.hpp"

// NRVP container: quantized, entropy-coded decoder weights plus the config
// needed to run them. All integers little-endian, reals 32-bit IEEE.
//
//   "NRVP" | version u16=1 | bits u8 | reserved u8
//   | pe_dim u16 | pe_base f32 | block_count u8 | {upscale u8, kernel u8}×blocks
//   | width u16 | out_channels u8 | frame_count u16
//   | tensor_count u16
//   | per tensor: id u16 | ndim u8 | dims u32×ndim | mu_min f32 | scale f32
//     | table_symbols u16 (0 stands for 65536) | code lengths u8×table_symbols
//     | payload_bits u32 | payload, zero-padded to a byte boundary
//
// Tensors appear as kernel 0, bias 0, kernel 1, bias 1, …

namespace nervc {

struct NrvpPayload {
    NervConfig config;
    int bits = 8;
    std::vector<QuantizedTensor> tensors;
};

inline std::vector<uint8_t> nrvp_serialize(const NervConfig& cfg, int bits, const std::vector<QuantizedTensor>& ts) {
    cfg.validate();
    require(bits >= 1 && bits <= 16, "nrvp: bits must be in [1,16]");
    require(cfg.pe_dim <= 0xFFFF && cfg.width <= 0xFFFF && cfg.frame_count <= 0xFFFF, "nrvp: config field too large");
    require(cfg.block_count() <= 0xFF && cfg.out_channels <= 0xFF, "nrvp: config field too large");
    require(ts.size() <= 0xFFFF, "nrvp: too many tensors");
    ByteWriter w;
    w.magic("NRVP");
    w.u16(1);
    w.u8(static_cast<uint8_t>(bits));
    w.u8(0);
    w.u16(static_cast<uint16_t>(cfg.pe_dim));
    w.f32(static_cast<float>(cfg.pe_base));
    w.u8(static_cast<uint8_t>(cfg.block_count()));
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        require(cfg.upscales[static_cast<size_t>(l)] <= 0xFF && cfg.kernels[static_cast<size_t>(l)] <= 0xFF,
                "nrvp: block field too large");
        w.u8(static_cast<uint8_t>(cfg.upscales[static_cast<size_t>(l)]));
        w.u8(static_cast<uint8_t>(cfg.kernels[static_cast<size_t>(l)]));
    }
    w.u16(static_cast<uint16_t>(cfg.width));
    w.u8(static_cast<uint8_t>(cfg.out_channels));
    w.u16(static_cast<uint16_t>(cfg.frame_count));
    w.u16(static_cast<uint16_t>(ts.size()));
    for (size_t i = 0; i < ts.size(); ++i) {
        const QuantizedTensor& q = ts[i];
        require(q.bits == bits, "nrvp: tensor bit width differs from container");
        require(q.shape.size() <= 0xFF, "nrvp: tensor rank too large");
        require(!q.symbols.empty(), "nrvp: empty tensor");
        w.u16(static_cast<uint16_t>(i));
        w.u8(static_cast<uint8_t>(q.shape.size()));
        for (int64_t d : q.shape) {
            require(d >= 0 && d <= 0xFFFFFFFFLL, "nrvp: dim out of range");
            w.u32(static_cast<uint32_t>(d));
        }
        w.f32(q.mu_min);
        w.f32(q.scale);
        uint16_t max_sym = 0;
        for (uint16_t s : q.symbols) max_sym = std::max(max_sym, s);
        std::vector<int64_t> hist(static_cast<size_t>(max_sym) + 1, 0);
        for (uint16_t s : q.symbols) ++hist[s];
        HuffmanTable table = huffman_build(hist);
        Bitstream bs = huffman_encode(q.symbols, table);
        size_t tsyms = table.lengths.size();
        require(tsyms >= 1 && tsyms <= 65536, "nrvp: table size out of range");
        w.u16(tsyms == 65536 ? 0 : static_cast<uint16_t>(tsyms));
        w.bytes(table.lengths.data(), tsyms);
        require(bs.bit_count <= 0xFFFFFFFFLL, "nrvp: payload too large");
        w.u32(static_cast<uint32_t>(bs.bit_count));
        w.bytes(bs.bytes.data(), bs.bytes.size());
    }
    return w.data();
}

inline NrvpPayload nrvp_parse(const uint8_t* data, size_t n) {
    ByteReader r(data, n);
    r.expect_magic("NRVP", "nrvp");
    uint16_t version = r.u16();
    require(version == 1, "nrvp: unsupported version " + std::to_string(version));
    NrvpPayload out;
    out.bits = r.u8();
    require(out.bits >= 1 && out.bits <= 16, "nrvp: bad bit width");
    r.u8();  // reserved
    NervConfig& cfg = out.config;
    cfg.pe_dim = r.u16();
    cfg.pe_base = r.f32();
    int blocks = r.u8();
    cfg.upscales.clear();
    cfg.kernels.clear();
    for (int l = 0; l < blocks; ++l) {
        cfg.upscales.push_back(r.u8());
        cfg.kernels.push_back(r.u8());
    }
    cfg.width = r.u16();
    cfg.out_channels = r.u8();
    cfg.frame_count = r.u16();
    cfg.validate();
    int count = r.u16();
    for (int i = 0; i < count; ++i) {
        uint16_t id = r.u16();
        require(id == i, "nrvp: tensor ids out of order");
        QuantizedTensor q;
        q.bits = out.bits;
        int ndim = r.u8();
        int64_t numel = 1;
        for (int d = 0; d < ndim; ++d) {
            q.shape.push_back(r.u32());
            numel *= q.shape.back();
        }
        require(numel >= 1, "nrvp: empty tensor record");
        q.mu_min = r.f32();
        q.scale = r.f32();
        uint16_t raw_tsyms = r.u16();
        size_t tsyms = raw_tsyms == 0 ? 65536 : raw_tsyms;
        require(tsyms <= (size_t(1) << out.bits), "nrvp: symbol table wider than bit width");
        HuffmanTable table;
        const uint8_t* lens = r.raw(tsyms);
        table.lengths.assign(lens, lens + tsyms);
        table.finalize();
        uint32_t payload_bits = r.u32();
        const uint8_t* payload = r.raw((payload_bits + 7) / 8);
        q.symbols = huffman_decode(payload, payload_bits, table, numel);
        out.tensors.push_back(std::move(q));
    }
    return out;
}

template <typename S>
int64_t write_nrvp(const std::string& path, const NervConfig& cfg, const NervWeights<S>& w, int bits) {
    w.validate(cfg);
    std::vector<QuantizedTensor> ts;
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        ts.push_back(quantize(w.kernels[static_cast<size_t>(l)], bits));
        ts.push_back(quantize(w.biases[static_cast<size_t>(l)], bits));
    }
    std::vector<uint8_t> bytes = nrvp_serialize(cfg, bits, ts);
    write_file(path, bytes.data(), bytes.size());
    return static_cast<int64_t>(bytes.size());
}

template <typename S>
std::pair<NervConfig, NervWeights<S>> read_nrvp(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    NrvpPayload p = nrvp_parse(bytes.data(), bytes.size());
    const NervConfig& cfg = p.config;
    require(static_cast<int64_t>(p.tensors.size()) == 2 * cfg.block_count(),
            "nrvp: tensor count does not match config");
    NervWeights<S> w;
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        const QuantizedTensor& qk = p.tensors[static_cast<size_t>(2 * l)];
        const QuantizedTensor& qb = p.tensors[static_cast<size_t>(2 * l + 1)];
        require(qk.shape == cfg.kernel_shape(l), "nrvp: kernel shape mismatch with header config");
        require(qb.shape == cfg.bias_shape(l), "nrvp: bias shape mismatch with header config");
        w.kernels.push_back(dequantize<S>(qk));
        w.biases.push_back(dequantize<S>(qb));
    }
    return {cfg, std::move(w)};
}

}  // namespace nervc
