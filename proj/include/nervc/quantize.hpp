#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nervc/tensor.hpp"

// b-bit linear quantization: symbol = Round((μ − μ_min)/scale) with
// scale = (μ_max − μ_min)/(2^b − 1), rounding half away from zero.

namespace nervc {

struct QuantizedTensor {
    Shape shape;
    int bits = 8;
    float mu_min = 0;
    float scale = 0;
    std::vector<uint16_t> symbols;

    bool operator==(const QuantizedTensor& o) const {
        return shape == o.shape && bits == o.bits && mu_min == o.mu_min && scale == o.scale && symbols == o.symbols;
    }
};

template <typename S>
QuantizedTensor quantize(const Tensor<S>& t, int bits) {
    require(bits >= 1 && bits <= 16, "quantize: bits must be in [1,16]");
    require(t.all_finite(), "quantize: non-finite input");
    QuantizedTensor q;
    q.shape = t.shape();
    q.bits = bits;
    q.symbols.resize(static_cast<size_t>(t.numel()));
    if (t.numel() == 0) return q;
    const S* p = t.data();
    double lo = double(p[0]), hi = double(p[0]);
    for (int64_t i = 1; i < t.numel(); ++i) {
        lo = std::min(lo, double(p[i]));
        hi = std::max(hi, double(p[i]));
    }
    q.mu_min = float(lo);
    int64_t levels = (int64_t(1) << bits) - 1;
    q.scale = hi == lo ? 0.0f : float((hi - lo) / double(levels));
    if (q.scale == 0.0f) return q;  // constant tensor: all symbols 0
    for (int64_t i = 0; i < t.numel(); ++i) {
        double s = std::round((double(p[i]) - double(q.mu_min)) / double(q.scale));
        int64_t sym = static_cast<int64_t>(s);
        sym = std::min(levels, std::max<int64_t>(0, sym));
        q.symbols[static_cast<size_t>(i)] = static_cast<uint16_t>(sym);
    }
    return q;
}

template <typename S>
Tensor<S> dequantize(const QuantizedTensor& q) {
    Tensor<S> t(q.shape);
    require(static_cast<int64_t>(q.symbols.size()) == t.numel(), "dequantize: symbol count mismatch");
    uint32_t limit = uint32_t(1) << q.bits;
    S* p = t.data();
    for (int64_t i = 0; i < t.numel(); ++i) {
        uint16_t s = q.symbols[static_cast<size_t>(i)];
        require(s < limit, "dequantize: symbol exceeds bit width (corrupt data)");
        p[i] = S(double(s) * double(q.scale) + double(q.mu_min));
    }
    return t;
}

}  // namespace nervc
