#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nervc/rng.hpp"
#include "nervc/tensor.hpp"

// Procedural toy corpus (flat background, 1–3 translating rectangles) and the
// input degradations for restoration training. Videos are F×3×H×W in [0,1].

namespace nervc {

template <typename S>
Tensor<S> synth_video(int64_t F, int64_t H, int64_t W, Rng& rng) {
    Tensor<S> v({F, 3, H, W});
    S bg[3];
    for (auto& c : bg) c = S(rng.uniform());
    for (int64_t f = 0; f < F; ++f)
        for (int64_t c = 0; c < 3; ++c) {
            S* plane = v.data() + (f * 3 + c) * H * W;
            std::fill(plane, plane + H * W, bg[c]);
        }
    int64_t n_rect = rng.uniform_int(1, 3);
    for (int64_t r = 0; r < n_rect; ++r) {
        S col[3];
        for (auto& c : col) c = S(rng.uniform());
        int64_t rh = rng.uniform_int(H / 4, H / 2);
        int64_t rw = rng.uniform_int(W / 4, W / 2);
        int64_t y0 = rng.uniform_int(0, H - rh);
        int64_t x0 = rng.uniform_int(0, W - rw);
        int64_t vy = 0, vx = 0;
        while (vy == 0 && vx == 0) {
            vy = rng.uniform_int(-3, 3);
            vx = rng.uniform_int(-3, 3);
        }
        for (int64_t f = 0; f < F; ++f) {
            int64_t ry = y0 + vy * f, rx = x0 + vx * f;
            int64_t ya = std::max<int64_t>(0, ry), yb = std::min(H, ry + rh);
            int64_t xa = std::max<int64_t>(0, rx), xb = std::min(W, rx + rw);
            for (int64_t c = 0; c < 3; ++c) {
                S* plane = v.data() + (f * 3 + c) * H * W;
                for (int64_t y = ya; y < yb; ++y)
                    for (int64_t x = xa; x < xb; ++x) plane[y * W + x] = col[c];
            }
        }
    }
    return v;
}

template <typename S>
struct ToyDataset {
    std::vector<Tensor<S>> videos;
    int64_t train_count = 0;

    int64_t test_count() const { return static_cast<int64_t>(videos.size()) - train_count; }
    const Tensor<S>& train(int64_t i) const { return videos[static_cast<size_t>(i)]; }
    const Tensor<S>& test(int64_t i) const { return videos[static_cast<size_t>(train_count + i)]; }
};

// Pure function of the seed; the leading 3/4 of clips form the train split.
template <typename S>
ToyDataset<S> synth_dataset(int64_t count, int64_t F, int64_t H, int64_t W, uint64_t seed) {
    require(count > 0 && F > 0 && H >= 8 && W >= 8, "synth_dataset: bad dimensions");
    ToyDataset<S> ds;
    Rng root(seed);
    for (int64_t i = 0; i < count; ++i) {
        Rng vr = root.fork(static_cast<uint64_t>(i));
        ds.videos.push_back(synth_video<S>(F, H, W, vr));
    }
    ds.train_count = count - count / 4;
    return ds;
}

enum class Degrade { none, downsample, blur, mask };

inline Degrade parse_degrade(const std::string& s) {
    if (s == "none") return Degrade::none;
    if (s == "downsample") return Degrade::downsample;
    if (s == "blur") return Degrade::blur;
    if (s == "mask") return Degrade::mask;
    fail("unknown degradation mode '" + s + "'");
}

inline const char* degrade_name(Degrade d) {
    switch (d) {
        case Degrade::none: return "none";
        case Degrade::downsample: return "downsample";
        case Degrade::blur: return "blur";
        case Degrade::mask: return "mask";
    }
    return "?";
}

namespace detail {

// Half-pixel-centered bilinear resize of one plane.
template <typename S>
void resize_plane(const S* src, int64_t h, int64_t w, S* dst, int64_t h2, int64_t w2) {
    double sy = double(h) / double(h2), sx = double(w) / double(w2);
    for (int64_t y = 0; y < h2; ++y) {
        double fy = (double(y) + 0.5) * sy - 0.5;
        int64_t y0 = static_cast<int64_t>(std::floor(fy));
        double wy = fy - double(y0);
        int64_t ya = std::clamp<int64_t>(y0, 0, h - 1), yb = std::clamp<int64_t>(y0 + 1, 0, h - 1);
        for (int64_t x = 0; x < w2; ++x) {
            double fx = (double(x) + 0.5) * sx - 0.5;
            int64_t x0 = static_cast<int64_t>(std::floor(fx));
            double wx = fx - double(x0);
            int64_t xa = std::clamp<int64_t>(x0, 0, w - 1), xb = std::clamp<int64_t>(x0 + 1, 0, w - 1);
            double top = double(src[ya * w + xa]) * (1 - wx) + double(src[ya * w + xb]) * wx;
            double bot = double(src[yb * w + xa]) * (1 - wx) + double(src[yb * w + xb]) * wx;
            dst[y * w2 + x] = S(top * (1 - wy) + bot * wy);
        }
    }
}

// 5-tap Gaussian σ=2, mirrored indices at the borders.
template <typename S>
void blur_plane(S* plane, int64_t h, int64_t w) {
    double win[5];
    double sum = 0;
    for (int i = 0; i < 5; ++i) {
        double d = double(i - 2);
        win[i] = std::exp(-d * d / 8.0);
        sum += win[i];
    }
    for (auto& x : win) x /= sum;
    auto mirror = [](int64_t i, int64_t n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
        return i;
    };
    std::vector<double> tmp(static_cast<size_t>(h * w));
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            double acc = 0;
            for (int i = 0; i < 5; ++i) acc += win[i] * double(plane[y * w + mirror(x + i - 2, w)]);
            tmp[static_cast<size_t>(y * w + x)] = acc;
        }
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < w; ++x) {
            double acc = 0;
            for (int i = 0; i < 5; ++i) acc += win[i] * tmp[static_cast<size_t>(mirror(y + i - 2, h) * w + x)];
            plane[y * w + x] = S(acc);
        }
}

}  // namespace detail

// Degraded copy, same shape, values in [0,1]. The mask rectangle is H/2×W/2,
// placed uniformly, identical across frames.
template <typename S>
Tensor<S> degrade(const Tensor<S>& video, Degrade mode, Rng& rng) {
    require(video.rank() == 4, "degrade: need F×C×H×W video");
    if (mode == Degrade::none) return video;
    int64_t F = video.dim(0), C = video.dim(1), H = video.dim(2), W = video.dim(3);
    Tensor<S> out = video;
    if (mode == Degrade::downsample) {
        require(H % 4 == 0 && W % 4 == 0, "degrade: downsample needs sides divisible by 4");
        std::vector<S> small(static_cast<size_t>((H / 4) * (W / 4)));
        for (int64_t f = 0; f < F; ++f)
            for (int64_t c = 0; c < C; ++c) {
                S* plane = out.data() + (f * C + c) * H * W;
                detail::resize_plane(plane, H, W, small.data(), H / 4, W / 4);
                detail::resize_plane(small.data(), H / 4, W / 4, plane, H, W);
            }
    } else if (mode == Degrade::blur) {
        for (int64_t f = 0; f < F; ++f)
            for (int64_t c = 0; c < C; ++c) detail::blur_plane(out.data() + (f * C + c) * H * W, H, W);
    } else {
        int64_t mh = H / 2, mw = W / 2;
        int64_t y0 = rng.uniform_int(0, H - mh);
        int64_t x0 = rng.uniform_int(0, W - mw);
        for (int64_t f = 0; f < F; ++f)
            for (int64_t c = 0; c < C; ++c) {
                S* plane = out.data() + (f * C + c) * H * W;
                for (int64_t y = y0; y < y0 + mh; ++y)
                    for (int64_t x = x0; x < x0 + mw; ++x) plane[y * W + x] = S(0);
            }
    }
    S* p = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) p[i] = std::min(S(1), std::max(S(0), p[i]));
    return out;
}

// Temporal mean frame tiled back to F frames; the fixed reconstruction bar.
template <typename S>
Tensor<S> mean_frame_video(const Tensor<S>& video) {
    int64_t F = video.dim(0), n = video.numel() / F;
    Tensor<S> out(video.shape());
    const S* pv = video.data();
    for (int64_t i = 0; i < n; ++i) {
        double acc = 0;
        for (int64_t f = 0; f < F; ++f) acc += double(pv[f * n + i]);
        S m = S(acc / double(F));
        for (int64_t f = 0; f < F; ++f) out.data()[f * n + i] = m;
    }
    return out;
}

}  // namespace nervc
