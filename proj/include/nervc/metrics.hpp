#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nervc/tensor.hpp"

// Quality metrics over videos shaped F×C×H×W with values in [0,1].

namespace nervc {

// −10·log10(MSE) per frame, then averaged. Inputs clamped; MSE below 1e-10
// caps the frame at 100 dB.
template <typename S>
double psnr(const Tensor<S>& a, const Tensor<S>& b) {
    check_same_shape(a, b, "psnr");
    require(a.rank() == 4, "psnr: need F×C×H×W videos");
    int64_t F = a.dim(0), n = a.numel() / F;
    const S* pa = a.data();
    const S* pb = b.data();
    double total = 0;
    for (int64_t f = 0; f < F; ++f) {
        double acc = 0;
        for (int64_t i = 0; i < n; ++i) {
            double va = std::min(1.0, std::max(0.0, double(pa[f * n + i])));
            double vb = std::min(1.0, std::max(0.0, double(pb[f * n + i])));
            double d = va - vb;
            acc += d * d;
        }
        double mse = acc / double(n);
        total += mse < 1e-10 ? 100.0 : -10.0 * std::log10(mse);
    }
    return total / double(F);
}

namespace detail {
inline const std::vector<double>& ssim_window() {
    static const std::vector<double> w = [] {
        std::vector<double> v(11);
        double sum = 0;
        for (int i = 0; i < 11; ++i) {
            double d = double(i - 5);
            v[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            sum += v[static_cast<size_t>(i)];
        }
        for (auto& x : v) x /= sum;
        return v;
    }();
    return w;
}

// Separable valid-region filter: H×W → (H−10)×(W−10).
inline std::vector<double> ssim_filter(const std::vector<double>& img, int64_t H, int64_t W) {
    const auto& win = ssim_window();
    int64_t Wv = W - 10, Hv = H - 10;
    std::vector<double> tmp(static_cast<size_t>(H * Wv));
    for (int64_t y = 0; y < H; ++y)
        for (int64_t x = 0; x < Wv; ++x) {
            double acc = 0;
            for (int64_t k = 0; k < 11; ++k) acc += win[static_cast<size_t>(k)] * img[static_cast<size_t>(y * W + x + k)];
            tmp[static_cast<size_t>(y * Wv + x)] = acc;
        }
    std::vector<double> out(static_cast<size_t>(Hv * Wv));
    for (int64_t y = 0; y < Hv; ++y)
        for (int64_t x = 0; x < Wv; ++x) {
            double acc = 0;
            for (int64_t k = 0; k < 11; ++k) acc += win[static_cast<size_t>(k)] * tmp[static_cast<size_t>((y + k) * Wv + x)];
            out[static_cast<size_t>(y * Wv + x)] = acc;
        }
    return out;
}
}  // namespace detail

// 11×11 Gaussian window σ=1.5, K1=0.01, K2=0.03, dynamic range 1; computed
// per channel over valid windows only, averaged over channels and frames.
template <typename S>
double ssim(const Tensor<S>& a, const Tensor<S>& b) {
    check_same_shape(a, b, "ssim");
    require(a.rank() == 4, "ssim: need F×C×H×W videos");
    int64_t F = a.dim(0), C = a.dim(1), H = a.dim(2), W = a.dim(3);
    require(H >= 11 && W >= 11, "ssim: frame smaller than the 11×11 window");
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const S* pa = a.data();
    const S* pb = b.data();
    double total = 0;
    for (int64_t f = 0; f < F; ++f) {
        for (int64_t c = 0; c < C; ++c) {
            int64_t off = (f * C + c) * H * W;
            std::vector<double> x(static_cast<size_t>(H * W)), y(static_cast<size_t>(H * W));
            std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
            for (int64_t i = 0; i < H * W; ++i) {
                double va = std::min(1.0, std::max(0.0, double(pa[off + i])));
                double vb = std::min(1.0, std::max(0.0, double(pb[off + i])));
                x[static_cast<size_t>(i)] = va;
                y[static_cast<size_t>(i)] = vb;
                xx[static_cast<size_t>(i)] = va * va;
                yy[static_cast<size_t>(i)] = vb * vb;
                xy[static_cast<size_t>(i)] = va * vb;
            }
            auto mx = detail::ssim_filter(x, H, W);
            auto my = detail::ssim_filter(y, H, W);
            auto mxx = detail::ssim_filter(xx, H, W);
            auto myy = detail::ssim_filter(yy, H, W);
            auto mxy = detail::ssim_filter(xy, H, W);
            double acc = 0;
            for (size_t i = 0; i < mx.size(); ++i) {
                double vx = mxx[i] - mx[i] * mx[i];
                double vy = myy[i] - my[i] * my[i];
                double cov = mxy[i] - mx[i] * my[i];
                acc += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
                       ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
            }
            total += acc / double(mx.size());
        }
    }
    return total / double(F * C);
}

struct MetricsReport {
    std::vector<double> psnr_per_video;
    std::vector<double> ssim_per_video;
    double mean_psnr = 0;
    double mean_ssim = 0;
};

}  // namespace nervc
