#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nervc/bytes.hpp"
#include "nervc/hypernet.hpp"
#include "nervc/tensor.hpp"
#include "nervc/training.hpp"

namespace nervc {

// Raw video container: magic, version byte, three reserved bytes, then
// frame count / height / width and tightly packed 8-bit RGB frames.
template <typename S>
void write_nvrw(const std::string& path, const Tensor<S>& video) {
    require(video.rank() == 4 && video.dim(1) == 3, "nvrw: need F×3×H×W video");
    int64_t F = video.dim(0), H = video.dim(2), W = video.dim(3);
    ByteWriter w;
    w.magic("NVRW");
    w.u8(1);
    w.u8(0);
    w.u8(0);
    w.u8(0);
    w.u32(static_cast<uint32_t>(F));
    w.u32(static_cast<uint32_t>(H));
    w.u32(static_cast<uint32_t>(W));
    const S* p = video.data();
    for (int64_t f = 0; f < F; ++f)
        for (int64_t y = 0; y < H; ++y)
            for (int64_t x = 0; x < W; ++x)
                for (int64_t c = 0; c < 3; ++c) {
                    double v = double(p[((f * 3 + c) * H + y) * W + x]);
                    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                    w.u8(static_cast<uint8_t>(std::lround(v * 255.0)));
                }
    write_file(path, w);
}

template <typename S>
Tensor<S> read_nvrw(const std::string& path) {
    std::vector<uint8_t> raw = read_file(path);
    ByteReader r(raw);
    r.expect_magic("NVRW", "raw video");
    uint8_t version = r.u8();
    require(version == 1, "nvrw: unsupported version " + std::to_string(version));
    r.u8();
    r.u8();
    r.u8();
    int64_t F = r.u32(), H = r.u32(), W = r.u32();
    require(F > 0 && H > 0 && W > 0, "nvrw: empty video");
    Tensor<S> video({F, 3, H, W});
    S* p = video.data();
    for (int64_t f = 0; f < F; ++f)
        for (int64_t y = 0; y < H; ++y)
            for (int64_t x = 0; x < W; ++x)
                for (int64_t c = 0; c < 3; ++c) p[((f * 3 + c) * H + y) * W + x] = S(r.u8() / 255.0);
    require(r.remaining() == 0, "nvrw: trailing bytes");
    return video;
}

// Named-tensor container for checkpoints: per entry a name, dims, and f32
// payload.
struct NamedTensor {
    std::string name;
    Tensor<float> t;
};

inline void write_nvck(const std::string& path, const std::vector<NamedTensor>& entries) {
    ByteWriter w;
    w.magic("NVCK");
    w.u16(1);
    w.u32(static_cast<uint32_t>(entries.size()));
    for (const auto& e : entries) {
        require(e.name.size() < 65536, "nvck: name too long");
        w.u16(static_cast<uint16_t>(e.name.size()));
        w.bytes(reinterpret_cast<const uint8_t*>(e.name.data()), e.name.size());
        require(e.t.rank() < 256, "nvck: rank too large");
        w.u8(static_cast<uint8_t>(e.t.rank()));
        for (int64_t i = 0; i < e.t.rank(); ++i) w.u32(static_cast<uint32_t>(e.t.dim(i)));
        for (int64_t i = 0; i < e.t.numel(); ++i) w.f32(e.t.data()[i]);
    }
    write_file(path, w);
}

inline std::vector<NamedTensor> read_nvck(const std::string& path) {
    std::vector<uint8_t> raw = read_file(path);
    ByteReader r(raw);
    r.expect_magic("NVCK", "checkpoint");
    uint16_t version = r.u16();
    require(version == 1, "nvck: unsupported version " + std::to_string(version));
    uint32_t count = r.u32();
    std::vector<NamedTensor> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t nlen = r.u16();
        const uint8_t* nb = r.raw(nlen);
        std::string name(reinterpret_cast<const char*>(nb), nlen);
        int64_t nd = r.u8();
        Shape shape(static_cast<size_t>(nd));
        for (int64_t d = 0; d < nd; ++d) shape[static_cast<size_t>(d)] = r.u32();
        Tensor<float> t(shape);
        for (int64_t j = 0; j < t.numel(); ++j) t.data()[j] = r.f32();
        out.push_back({std::move(name), std::move(t)});
    }
    require(r.remaining() == 0, "nvck: trailing bytes");
    return out;
}

namespace detail {

inline Tensor<float> f32_scalar(double v) { return Tensor<float>::scalar(float(v)); }

inline Tensor<float> f32_list(const std::vector<int64_t>& v) {
    Tensor<float> t({static_cast<int64_t>(v.size())});
    for (size_t i = 0; i < v.size(); ++i) t.data()[i] = float(v[i]);
    return t;
}

struct NvckIndex {
    std::map<std::string, const Tensor<float>*> by_name;

    explicit NvckIndex(const std::vector<NamedTensor>& entries) {
        for (const auto& e : entries) {
            require(by_name.emplace(e.name, &e.t).second, "checkpoint: duplicate entry '" + e.name + "'");
        }
    }

    const Tensor<float>& get(const std::string& name) const {
        auto it = by_name.find(name);
        require(it != by_name.end(), "checkpoint: missing entry '" + name + "'");
        return *it->second;
    }

    double scalar(const std::string& name) const {
        const Tensor<float>& t = get(name);
        require(t.numel() == 1, "checkpoint: entry '" + name + "' is not a scalar");
        return double(t.data()[0]);
    }

    std::vector<int64_t> list(const std::string& name) const {
        const Tensor<float>& t = get(name);
        std::vector<int64_t> out(static_cast<size_t>(t.numel()));
        for (int64_t i = 0; i < t.numel(); ++i) out[static_cast<size_t>(i)] = std::llround(double(t.data()[i]));
        return out;
    }
};

}  // namespace detail

inline std::vector<NamedTensor> config_entries(const HypernetConfig& cfg) {
    using detail::f32_list;
    using detail::f32_scalar;
    std::vector<NamedTensor> e;
    e.push_back({"config/nerv.pe_dim", f32_scalar(double(cfg.nerv.pe_dim))});
    e.push_back({"config/nerv.pe_base", f32_scalar(cfg.nerv.pe_base)});
    e.push_back({"config/nerv.upscales", f32_list(cfg.nerv.upscales)});
    e.push_back({"config/nerv.kernels", f32_list(cfg.nerv.kernels)});
    e.push_back({"config/nerv.width", f32_scalar(double(cfg.nerv.width))});
    e.push_back({"config/nerv.out_channels", f32_scalar(double(cfg.nerv.out_channels))});
    e.push_back({"config/nerv.frames", f32_scalar(double(cfg.nerv.frame_count))});
    e.push_back({"config/hyper.patch", f32_scalar(double(cfg.patch))});
    e.push_back({"config/hyper.dim", f32_scalar(double(cfg.dim))});
    e.push_back({"config/hyper.layers", f32_scalar(double(cfg.layers))});
    e.push_back({"config/hyper.heads", f32_scalar(double(cfg.heads))});
    e.push_back({"config/hyper.ffn", f32_scalar(double(cfg.ffn))});
    e.push_back({"config/hyper.dropout", f32_scalar(cfg.dropout)});
    e.push_back({"config/hyper.token_mode", f32_scalar(double(static_cast<int>(cfg.tokens.mode)))});
    e.push_back({"config/hyper.tokens", f32_list(cfg.tokens.counts)});
    e.push_back({"config/hyper.expand", f32_scalar(double(static_cast<int>(cfg.expand)))});
    e.push_back({"config/hyper.normalize", f32_scalar(cfg.normalize ? 1.0 : 0.0)});
    e.push_back({"config/hyper.conv_init", f32_scalar(cfg.conv_init ? 1.0 : 0.0)});
    e.push_back({"config/hyper.height", f32_scalar(double(cfg.height))});
    e.push_back({"config/hyper.width", f32_scalar(double(cfg.width))});
    return e;
}

inline HypernetConfig config_from_entries(const detail::NvckIndex& ix) {
    HypernetConfig cfg;
    cfg.nerv.pe_dim = std::llround(ix.scalar("config/nerv.pe_dim"));
    cfg.nerv.pe_base = ix.scalar("config/nerv.pe_base");
    cfg.nerv.upscales = ix.list("config/nerv.upscales");
    cfg.nerv.kernels = ix.list("config/nerv.kernels");
    cfg.nerv.width = std::llround(ix.scalar("config/nerv.width"));
    cfg.nerv.out_channels = std::llround(ix.scalar("config/nerv.out_channels"));
    cfg.nerv.frame_count = std::llround(ix.scalar("config/nerv.frames"));
    cfg.patch = std::llround(ix.scalar("config/hyper.patch"));
    cfg.dim = std::llround(ix.scalar("config/hyper.dim"));
    cfg.layers = std::llround(ix.scalar("config/hyper.layers"));
    cfg.heads = std::llround(ix.scalar("config/hyper.heads"));
    cfg.ffn = std::llround(ix.scalar("config/hyper.ffn"));
    cfg.dropout = ix.scalar("config/hyper.dropout");
    int tm = static_cast<int>(std::llround(ix.scalar("config/hyper.token_mode")));
    require(tm >= 0 && tm <= 2, "checkpoint: bad token mode");
    cfg.tokens.mode = static_cast<TokenMode>(tm);
    cfg.tokens.counts = ix.list("config/hyper.tokens");
    int em = static_cast<int>(std::llround(ix.scalar("config/hyper.expand")));
    require(em >= 0 && em <= 2, "checkpoint: bad expand mode");
    cfg.expand = static_cast<ExpandMode>(em);
    cfg.normalize = ix.scalar("config/hyper.normalize") != 0.0;
    cfg.conv_init = ix.scalar("config/hyper.conv_init") != 0.0;
    cfg.height = std::llround(ix.scalar("config/hyper.height"));
    cfg.width = std::llround(ix.scalar("config/hyper.width"));
    cfg.validate();
    return cfg;
}

// Encoder checkpoint: config entries plus every parameter tensor by name.
inline void save_checkpoint(const std::string& path, const HypernetConfig& cfg, HypernetParams<float>& params) {
    std::vector<NamedTensor> entries = config_entries(cfg);
    params.visit([&](const std::string& name, Tensor<float>& t) {
        if (t.numel() > 0) entries.push_back({name, t});
    });
    write_nvck(path, entries);
}

inline std::pair<HypernetConfig, HypernetParams<float>> load_checkpoint(const std::string& path) {
    std::vector<NamedTensor> entries = read_nvck(path);
    detail::NvckIndex ix(entries);
    HypernetConfig cfg = config_from_entries(ix);
    Rng rng(0);
    HypernetParams<float> params = init_params<float>(cfg, rng);
    params.visit([&](const std::string& name, Tensor<float>& t) {
        if (t.numel() == 0) return;
        const Tensor<float>& src = ix.get(name);
        require(src.shape() == t.shape(), "checkpoint: entry '" + name + "' has shape " + shape_str(src.shape()) +
                                              ", expected " + shape_str(t.shape()));
        t = src;
    });
    return {cfg, params};
}

// Binary PPM dump of one 3×H×W frame.
template <typename S>
void write_ppm(const std::string& path, const Tensor<S>& frame) {
    require(frame.rank() == 3 && frame.dim(0) == 3, "ppm: need 3×H×W frame");
    int64_t H = frame.dim(1), W = frame.dim(2);
    std::string header = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>(header.data()), header.size());
    const S* p = frame.data();
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < W; ++x)
            for (int64_t c = 0; c < 3; ++c) {
                double v = double(p[(c * H + y) * W + x]);
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                w.u8(static_cast<uint8_t>(std::lround(v * 255.0)));
            }
    write_file(path, w);
}

inline void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
    std::string text = "step,loss,lr,psnr\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%lld,%.8g,%.8g,%.4f\n", static_cast<long long>(r.step), r.loss, r.lr, r.psnr);
        text += buf;
    }
    write_file(path, reinterpret_cast<const uint8_t*>(text.data()), text.size());
}

inline void write_evals_csv(const std::string& path, const std::vector<EvalRow>& rows) {
    std::string text = "step,psnr\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%lld,%.4f\n", static_cast<long long>(r.step), r.psnr);
        text += buf;
    }
    write_file(path, reinterpret_cast<const uint8_t*>(text.data()), text.size());
}

}  // namespace nervc
