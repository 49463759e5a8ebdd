#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nervc/autograd.hpp"
#include "nervc/kernels.hpp"
#include "nervc/tensor.hpp"

// Frame decoder: a positional time embedding fed through conv + pixel-shuffle
// + GELU blocks, growing a 1×1 map to the full frame.

namespace nervc {

struct NervConfig {
    int64_t pe_dim = 16;
    double pe_base = 1.25;
    std::vector<int64_t> upscales{4, 4, 4, 4};
    std::vector<int64_t> kernels{1, 3, 3, 3};
    int64_t width = 16;
    int64_t out_channels = 3;
    int64_t frame_count = 1;
    double output_bias = 0.5;

    int64_t block_count() const { return static_cast<int64_t>(upscales.size()); }

    void validate() const {
        require(pe_dim > 0 && pe_dim % 2 == 0, "nerv config: pe_dim must be positive and even");
        require(!upscales.empty(), "nerv config: need at least one block");
        require(upscales.size() == kernels.size(), "nerv config: upscales/kernels length mismatch");
        for (int64_t s : upscales) require(s >= 1, "nerv config: upscale must be >= 1");
        for (int64_t k : kernels) require(k >= 1 && k % 2 == 1, "nerv config: kernel size must be odd");
        require(width > 0 && out_channels > 0 && frame_count > 0, "nerv config: counts must be positive");
    }

    // Spatial chain starts at 1×1 and multiplies by each upscale.
    int64_t output_size() const {
        int64_t s = 1;
        for (int64_t u : upscales) s *= u;
        return s;
    }

    int64_t c_in(int64_t l) const { return l == 0 ? pe_dim : width; }
    int64_t c_out(int64_t l) const {
        int64_t s = upscales[static_cast<size_t>(l)];
        return (l == block_count() - 1 ? out_channels : width) * s * s;
    }
    int64_t kernel(int64_t l) const { return kernels[static_cast<size_t>(l)]; }

    Shape kernel_shape(int64_t l) const { return {c_out(l), c_in(l), kernel(l), kernel(l)}; }
    Shape bias_shape(int64_t l) const { return {c_out(l)}; }

    std::vector<std::pair<Shape, Shape>> shapes_of() const {
        validate();
        std::vector<std::pair<Shape, Shape>> out;
        for (int64_t l = 0; l < block_count(); ++l) out.emplace_back(kernel_shape(l), bias_shape(l));
        return out;
    }

    int64_t param_count() const {
        int64_t n = 0;
        for (const auto& [k, b] : shapes_of()) n += shape_numel(k) + shape_numel(b);
        return n;
    }

    bool operator==(const NervConfig& o) const {
        return pe_dim == o.pe_dim && pe_base == o.pe_base && upscales == o.upscales && kernels == o.kernels &&
               width == o.width && out_channels == o.out_channels && frame_count == o.frame_count &&
               output_bias == o.output_bias;
    }
};

template <typename S>
struct NervWeights {
    std::vector<Tensor<S>> kernels;
    std::vector<Tensor<S>> biases;

    void validate(const NervConfig& cfg) const {
        require(static_cast<int64_t>(kernels.size()) == cfg.block_count() &&
                    static_cast<int64_t>(biases.size()) == cfg.block_count(),
                "nerv weights: block count mismatch");
        for (int64_t l = 0; l < cfg.block_count(); ++l) {
            require(kernels[static_cast<size_t>(l)].shape() == cfg.kernel_shape(l),
                    "nerv weights: kernel shape mismatch at block " + std::to_string(l));
            require(biases[static_cast<size_t>(l)].shape() == cfg.bias_shape(l),
                    "nerv weights: bias shape mismatch at block " + std::to_string(l));
        }
    }
};

// Fan-in uniform kernels, zero biases.
template <typename S>
NervWeights<S> init_nerv_weights(const NervConfig& cfg, Rng& rng) {
    NervWeights<S> w;
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        double bound = 1.0 / std::sqrt(double(cfg.c_in(l)) * double(cfg.kernel(l)) * double(cfg.kernel(l)));
        w.kernels.push_back(rng.template uniform_tensor<S>(cfg.kernel_shape(l), -bound, bound));
        w.biases.push_back(Tensor<S>(cfg.bias_shape(l)));
    }
    return w;
}

// [sin(π·b⁰·t̃), cos(π·b⁰·t̃), sin(π·b¹·t̃), cos(π·b¹·t̃), …] with
// t̃ = 2t/(T−1) − 1 (0 when T = 1).
template <typename S>
Tensor<S> time_embedding(int64_t t, int64_t T, int64_t pe_dim, double pe_base) {
    require(t >= 0 && t < T, "time_embedding: frame index " + std::to_string(t) + " out of range");
    require(pe_dim > 0 && pe_dim % 2 == 0, "time_embedding: pe_dim must be positive and even");
    double tn = T == 1 ? 0.0 : 2.0 * double(t) / double(T - 1) - 1.0;
    Tensor<S> e({pe_dim});
    S* p = e.data();
    double freq = 3.14159265358979323846;
    for (int64_t j = 0; j < pe_dim / 2; ++j) {
        p[2 * j] = S(std::sin(freq * tn));
        p[2 * j + 1] = S(std::cos(freq * tn));
        freq *= pe_base;
    }
    return e;
}

// One frame, clamped to [0,1]. Shape 3×H×W.
template <typename S>
Tensor<S> nerv_forward(const NervConfig& cfg, const NervWeights<S>& w, int64_t t) {
    cfg.validate();
    w.validate(cfg);
    Tensor<S> x = time_embedding<S>(t, cfg.frame_count, cfg.pe_dim, cfg.pe_base).reshaped({1, cfg.pe_dim, 1, 1});
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        int64_t K = cfg.kernel(l);
        x = conv2d(x, w.kernels[static_cast<size_t>(l)], &w.biases[static_cast<size_t>(l)], 1, (K - 1) / 2);
        x = pixel_shuffle(x, cfg.upscales[static_cast<size_t>(l)]);
        if (l < cfg.block_count() - 1) {
            x = gelu(x);
        } else {
            S* p = x.data();
            S ob = S(cfg.output_bias);
            for (int64_t i = 0; i < x.numel(); ++i) p[i] += ob;
        }
    }
    int64_t hw = cfg.output_size();
    return clamp01(x).reshaped({cfg.out_channels, hw, hw});
}

// Tape forward over a batch of frame indices; output B×3×H×W, unclamped so
// the loss keeps gradients at saturation.
template <typename S>
Value<S> nerv_forward_ad(Tape<S>& tape, const NervConfig& cfg, const std::vector<Value<S>>& kernels,
                         const std::vector<Value<S>>& biases, const std::vector<int64_t>& ts) {
    require(static_cast<int64_t>(kernels.size()) == cfg.block_count() &&
                static_cast<int64_t>(biases.size()) == cfg.block_count(),
            "nerv_forward_ad: weight count mismatch");
    int64_t B = static_cast<int64_t>(ts.size());
    Tensor<S> emb({B, cfg.pe_dim, 1, 1});
    for (int64_t i = 0; i < B; ++i) {
        Tensor<S> e = time_embedding<S>(ts[static_cast<size_t>(i)], cfg.frame_count, cfg.pe_dim, cfg.pe_base);
        std::copy(e.data(), e.data() + cfg.pe_dim, emb.data() + i * cfg.pe_dim);
    }
    Value<S> x = tape.constant(std::move(emb));
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        Value<S> b = biases[static_cast<size_t>(l)];
        x = ad::conv2d(x, kernels[static_cast<size_t>(l)], &b, 1, (cfg.kernel(l) - 1) / 2);
        x = ad::pixel_shuffle(x, cfg.upscales[static_cast<size_t>(l)]);
        if (l < cfg.block_count() - 1)
            x = ad::gelu(x);
        else
            x = ad::add_scalar(x, S(cfg.output_bias));
    }
    return x;
}

// All frames, clamped; shape T×3×H×W.
template <typename S>
Tensor<S> decode_video(const NervConfig& cfg, const NervWeights<S>& w) {
    int64_t hw = cfg.output_size();
    Tensor<S> out({cfg.frame_count, cfg.out_channels, hw, hw});
    for (int64_t t = 0; t < cfg.frame_count; ++t) {
        Tensor<S> f = nerv_forward(cfg, w, t);
        std::copy(f.data(), f.data() + f.numel(), out.data() + t * f.numel());
    }
    return out;
}

}  // namespace nervc
