#pragma once

#include <cmath>
#include <cstdint>

#include "nervc/tensor.hpp"

namespace nervc {

// Counter-based generator: every draw is a pure function of (key, counter),
// so sequences survive re-threading and can be forked into independent
// streams for workers, videos and dropout sites.
class Rng {
public:
    explicit Rng(uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    Rng fork(uint64_t stream) const { return Rng(key_, mix(key_ ^ mix(stream + 0x632be59bd9b4e019ull))); }

    uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        while (u <= 1e-300) u = uniform();
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(6.283185307179586477 * v);
        have_spare_ = true;
        return r * std::cos(6.283185307179586477 * v);
    }

    template <typename S>
    Tensor<S> uniform_tensor(Shape shape, double lo, double hi) {
        Tensor<S> t(std::move(shape));
        for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<S>(uniform(lo, hi));
        return t;
    }

    template <typename S>
    Tensor<S> normal_tensor(Shape shape, double mean, double stddev) {
        Tensor<S> t(std::move(shape));
        for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<S>(mean + stddev * normal());
        return t;
    }

private:
    Rng(uint64_t key, uint64_t tag) : key_(mix(key ^ tag)) {}

    static uint64_t mix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    uint64_t key_ = 0;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace nervc
