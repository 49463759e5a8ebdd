#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "nervc/kernels.hpp"
#include "nervc/nerv.hpp"
#include "nervc/parallel.hpp"
#include "nervc/rng.hpp"
#include "nervc/tensor.hpp"

// Batched decoding: G models stacked along the output-channel axis run as one
// grouped-convolution network, decoding G videos per forward pass.

namespace nervc {

template <typename S>
struct WeightBatch {
    NervConfig config;
    int64_t groups = 1;
    std::vector<Tensor<S>> kernels;  // (G·C_out) × C_in × K × K per layer
    std::vector<Tensor<S>> biases;   // (G·C_out) per layer
};

template <typename S>
WeightBatch<S> stack_weights(const NervConfig& cfg, const std::vector<NervWeights<S>>& models) {
    require(!models.empty(), "stack_weights: no models");
    cfg.validate();
    for (const auto& m : models) m.validate(cfg);
    WeightBatch<S> b;
    b.config = cfg;
    b.groups = static_cast<int64_t>(models.size());
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        Shape ks = cfg.kernel_shape(l);
        int64_t co = ks[0];
        Tensor<S> k({b.groups * co, ks[1], ks[2], ks[3]});
        Tensor<S> bias({b.groups * co});
        for (int64_t g = 0; g < b.groups; ++g) {
            const Tensor<S>& mk = models[static_cast<size_t>(g)].kernels[static_cast<size_t>(l)];
            const Tensor<S>& mb = models[static_cast<size_t>(g)].biases[static_cast<size_t>(l)];
            std::copy(mk.data(), mk.data() + mk.numel(), k.data() + g * mk.numel());
            std::copy(mb.data(), mb.data() + mb.numel(), bias.data() + g * mb.numel());
        }
        b.kernels.push_back(std::move(k));
        b.biases.push_back(std::move(bias));
    }
    return b;
}

template <typename S>
std::vector<NervWeights<S>> unstack_weights(const WeightBatch<S>& b) {
    std::vector<NervWeights<S>> models(static_cast<size_t>(b.groups));
    for (int64_t l = 0; l < b.config.block_count(); ++l) {
        Shape ks = b.config.kernel_shape(l);
        int64_t kn = shape_numel(ks), bn = ks[0];
        for (int64_t g = 0; g < b.groups; ++g) {
            Tensor<S> k(ks);
            Tensor<S> bias({bn});
            std::copy(b.kernels[static_cast<size_t>(l)].data() + g * kn,
                      b.kernels[static_cast<size_t>(l)].data() + (g + 1) * kn, k.data());
            std::copy(b.biases[static_cast<size_t>(l)].data() + g * bn,
                      b.biases[static_cast<size_t>(l)].data() + (g + 1) * bn, bias.data());
            models[static_cast<size_t>(g)].kernels.push_back(std::move(k));
            models[static_cast<size_t>(g)].biases.push_back(std::move(bias));
        }
    }
    return models;
}

// One frame index, all G videos: the shared time embedding is repeated G
// times channel-wise, every conv runs with groups=G, and the (G·C)-channel
// maps flow through pixel shuffle and GELU unchanged in layout. Output
// G×3×H×W, clamped. Per-video arithmetic is identical to nerv_forward, so
// frames match it bit-exactly.
template <typename S>
Tensor<S> decode_batch(const WeightBatch<S>& b, int64_t t) {
    const NervConfig& cfg = b.config;
    int64_t G = b.groups;
    Tensor<S> emb = time_embedding<S>(t, cfg.frame_count, cfg.pe_dim, cfg.pe_base);
    Tensor<S> x({1, G * cfg.pe_dim, 1, 1});
    for (int64_t g = 0; g < G; ++g) std::copy(emb.data(), emb.data() + cfg.pe_dim, x.data() + g * cfg.pe_dim);
    for (int64_t l = 0; l < cfg.block_count(); ++l) {
        int64_t K = cfg.kernel(l);
        x = conv2d(x, b.kernels[static_cast<size_t>(l)], &b.biases[static_cast<size_t>(l)], G, (K - 1) / 2);
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
    return clamp01(x).reshaped({G, cfg.out_channels, hw, hw});
}

// All frames of all G videos: G×F×3×H×W.
template <typename S>
Tensor<S> decode_batch_all(const WeightBatch<S>& b) {
    const NervConfig& cfg = b.config;
    int64_t hw = cfg.output_size();
    int64_t frame = cfg.out_channels * hw * hw;
    Tensor<S> out({b.groups, cfg.frame_count, cfg.out_channels, hw, hw});
    for (int64_t t = 0; t < cfg.frame_count; ++t) {
        Tensor<S> frames = decode_batch(b, t);
        for (int64_t g = 0; g < b.groups; ++g)
            std::copy(frames.data() + g * frame, frames.data() + (g + 1) * frame,
                      out.data() + (g * cfg.frame_count + t) * frame);
    }
    return out;
}

struct ThroughputReport {
    int64_t group = 1;
    int64_t videos = 0;
    int64_t frames = 0;
    int threads = 1;
    double seconds = 0;
    double vps = 0;
};

// Decodes `videos` synthetic models, `frame_count` frames each, batched in
// groups of G. One untimed warm-up pass; best wall-clock of `reps` runs.
template <typename S>
ThroughputReport bench_decode(const NervConfig& cfg, int64_t group, int64_t videos, int threads, int reps = 3) {
    require(videos > 0 && group > 0 && videos % group == 0, "bench: videos must be a positive multiple of group");
    Rng rng(7);
    std::vector<NervWeights<S>> models;
    for (int64_t i = 0; i < videos; ++i) models.push_back(init_nerv_weights<S>(cfg, rng));
    std::vector<WeightBatch<S>> batches;
    for (int64_t i = 0; i < videos; i += group)
        batches.push_back(stack_weights(
            cfg, std::vector<NervWeights<S>>(models.begin() + i, models.begin() + i + group)));
    int old = detail::thread_override();
    set_threads(threads);
    auto pass = [&] {
        for (const auto& b : batches)
            for (int64_t t = 0; t < cfg.frame_count; ++t) {
                Tensor<S> frames = decode_batch(b, t);
                (void)frames;
            }
    };
    pass();  // warm-up
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        pass();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    set_threads(old);
    ThroughputReport rep;
    rep.group = group;
    rep.videos = videos;
    rep.frames = cfg.frame_count;
    rep.threads = threads;
    rep.seconds = best;
    rep.vps = double(videos) / best;
    return rep;
}

template <typename S>
std::vector<ThroughputReport> bench(const NervConfig& cfg, const std::vector<int64_t>& groups, int64_t videos,
                                    int threads, int reps = 3) {
    std::vector<ThroughputReport> out;
    for (int64_t g : groups) out.push_back(bench_decode<S>(cfg, g, videos, threads, reps));
    return out;
}

}  // namespace nervc
