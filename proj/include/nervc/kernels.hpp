#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "nervc/parallel.hpp"
#include "nervc/rng.hpp"
#include "nervc/tensor.hpp"

// Raw compute kernels. Every reduction walks its terms in one fixed sequential
// order per output element, so results are identical for any thread count.

namespace nervc {

// C[m×n] = A[m×k] · B[k×n]
template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul: need rank-2 operands");
    int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    require(b.dim(0) == k, "matmul: inner dims disagree " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor<S> c({m, n});
    const S* pa = a.data();
    const S* pb = b.data();
    S* pc = c.data();
    parallel_for(m, 4, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
            S* row = pc + i * n;
            for (int64_t kk = 0; kk < k; ++kk) {
                S av = pa[i * k + kk];
                const S* brow = pb + kk * n;
                for (int64_t j = 0; j < n; ++j) row[j] += av * brow[j];
            }
        }
    });
    return c;
}

// C[m×n] = Aᵀ[m×k] · B[k×n] where A is stored k×m
template <typename S>
Tensor<S> matmul_tn(const Tensor<S>& a, const Tensor<S>& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul_tn: need rank-2 operands");
    int64_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
    require(b.dim(0) == k, "matmul_tn: inner dims disagree");
    Tensor<S> c({m, n});
    const S* pa = a.data();
    const S* pb = b.data();
    S* pc = c.data();
    parallel_for(m, 4, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
            S* row = pc + i * n;
            for (int64_t kk = 0; kk < k; ++kk) {
                S av = pa[kk * m + i];
                const S* brow = pb + kk * n;
                for (int64_t j = 0; j < n; ++j) row[j] += av * brow[j];
            }
        }
    });
    return c;
}

// C[m×n] = A[m×k] · Bᵀ[k×n] where B is stored n×k
template <typename S>
Tensor<S> matmul_nt(const Tensor<S>& a, const Tensor<S>& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul_nt: need rank-2 operands");
    int64_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    require(b.dim(1) == k, "matmul_nt: inner dims disagree");
    Tensor<S> c({m, n});
    const S* pa = a.data();
    const S* pb = b.data();
    S* pc = c.data();
    parallel_for(m, 4, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
            const S* arow = pa + i * k;
            S* row = pc + i * n;
            for (int64_t j = 0; j < n; ++j) {
                S acc = 0;
                const S* brow = pb + j * k;
                for (int64_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
                row[j] = acc;
            }
        }
    });
    return c;
}

// Cross-correlation, stride 1, zero padding. input B×Cin×H×W, weight
// Cout×(Cin/G)×K×K, optional bias Cout. Accumulation order per output pixel:
// in-group channel, then kernel row, then kernel column.
template <typename S>
Tensor<S> conv2d(const Tensor<S>& input, const Tensor<S>& weight, const Tensor<S>* bias, int64_t groups,
                 int64_t padding) {
    require(input.rank() == 4 && weight.rank() == 4, "conv2d: need rank-4 input and weight");
    int64_t B = input.dim(0), Cin = input.dim(1), H = input.dim(2), W = input.dim(3);
    int64_t Cout = weight.dim(0), Cg = weight.dim(1), K = weight.dim(2);
    require(weight.dim(3) == K, "conv2d: kernel must be square");
    require(groups >= 1 && Cin % groups == 0 && Cout % groups == 0, "conv2d: channel counts not divisible by groups");
    require(Cg == Cin / groups, "conv2d: weight in-channels " + std::to_string(Cg) + " != Cin/groups");
    if (bias != nullptr) require(bias->numel() == Cout, "conv2d: bias size mismatch");
    int64_t p = padding;
    require(p >= 0 && K - 1 - p >= 0, "conv2d: bad padding");
    Tensor<S> out({B, Cout, H, W});
    int64_t cout_g = Cout / groups;
    const S* pin = input.data();
    const S* pw = weight.data();
    const S* pbias = bias == nullptr ? nullptr : bias->data();
    S* pout = out.data();
    parallel_for(B * Cout, 1, [&](int64_t lo, int64_t hi) {
        for (int64_t idx = lo; idx < hi; ++idx) {
            int64_t b = idx / Cout, oc = idx % Cout;
            int64_t g = oc / cout_g;
            const S* wbase = pw + oc * Cg * K * K;
            const S* ibase = pin + (b * Cin + g * Cg) * H * W;
            S bv = pbias == nullptr ? S(0) : pbias[oc];
            S* obase = pout + (b * Cout + oc) * H * W;
            for (int64_t oy = 0; oy < H; ++oy) {
                int64_t ky0 = std::max<int64_t>(0, p - oy);
                int64_t ky1 = std::min<int64_t>(K, H + p - oy);
                for (int64_t ox = 0; ox < W; ++ox) {
                    int64_t kx0 = std::max<int64_t>(0, p - ox);
                    int64_t kx1 = std::min<int64_t>(K, W + p - ox);
                    S acc = bv;
                    for (int64_t ic = 0; ic < Cg; ++ic) {
                        const S* iplane = ibase + ic * H * W;
                        const S* wplane = wbase + ic * K * K;
                        for (int64_t ky = ky0; ky < ky1; ++ky) {
                            const S* irow = iplane + (oy + ky - p) * W + (ox - p);
                            const S* wrow = wplane + ky * K;
                            for (int64_t kx = kx0; kx < kx1; ++kx) acc += irow[kx] * wrow[kx];
                        }
                    }
                    obase[oy * W + ox] = acc;
                }
            }
        }
    });
    return out;
}

template <typename S>
struct Conv2dGrads {
    Tensor<S> input, weight, bias;
};

template <typename S>
Conv2dGrads<S> conv2d_backward(const Tensor<S>& input, const Tensor<S>& weight, const Tensor<S>& grad_out,
                               bool has_bias, int64_t groups, int64_t padding) {
    int64_t B = input.dim(0), Cin = input.dim(1), H = input.dim(2), W = input.dim(3);
    int64_t Cout = weight.dim(0), Cg = weight.dim(1), K = weight.dim(2);
    int64_t p = padding;
    int64_t cout_g = Cout / groups;
    Conv2dGrads<S> g{Tensor<S>(input.shape()), Tensor<S>(weight.shape()),
                     has_bias ? Tensor<S>({Cout}) : Tensor<S>(Shape{0})};
    const S* pin = input.data();
    const S* pw = weight.data();
    const S* pgo = grad_out.data();

    // d bias: sum of grad_out over batch and space, per channel
    if (has_bias) {
        S* pgb = g.bias.data();
        parallel_for(Cout, 1, [&](int64_t lo, int64_t hi) {
            for (int64_t oc = lo; oc < hi; ++oc) {
                S acc = 0;
                for (int64_t b = 0; b < B; ++b) {
                    const S* plane = pgo + (b * Cout + oc) * H * W;
                    for (int64_t i = 0; i < H * W; ++i) acc += plane[i];
                }
                pgb[oc] = acc;
            }
        });
    }

    // d weight[oc,ic,ky,kx]: correlate grad_out channel oc with input channel
    // over the positions where the tap lands in-bounds
    {
        S* pgw = g.weight.data();
        parallel_for(Cout, 1, [&](int64_t lo, int64_t hi) {
            for (int64_t oc = lo; oc < hi; ++oc) {
                int64_t grp = oc / cout_g;
                for (int64_t ic = 0; ic < Cg; ++ic) {
                    for (int64_t ky = 0; ky < K; ++ky) {
                        int64_t oy0 = std::max<int64_t>(0, p - ky);
                        int64_t oy1 = std::min<int64_t>(H, H + p - ky);
                        for (int64_t kx = 0; kx < K; ++kx) {
                            int64_t ox0 = std::max<int64_t>(0, p - kx);
                            int64_t ox1 = std::min<int64_t>(W, W + p - kx);
                            S acc = 0;
                            for (int64_t b = 0; b < B; ++b) {
                                const S* goplane = pgo + (b * Cout + oc) * H * W;
                                const S* iplane = pin + (b * Cin + grp * Cg + ic) * H * W;
                                for (int64_t oy = oy0; oy < oy1; ++oy) {
                                    const S* gorow = goplane + oy * W;
                                    const S* irow = iplane + (oy + ky - p) * W + (kx - p);
                                    for (int64_t ox = ox0; ox < ox1; ++ox) acc += gorow[ox] * irow[ox];
                                }
                            }
                            pgw[((oc * Cg + ic) * K + ky) * K + kx] = acc;
                        }
                    }
                }
            }
        });
    }

    // d input: full correlation of grad_out with the kernel transposed in
    // channels; accumulation order: group out-channel, kernel row, column
    {
        S* pgi = g.input.data();
        parallel_for(B * Cin, 1, [&](int64_t lo, int64_t hi) {
            for (int64_t idx = lo; idx < hi; ++idx) {
                int64_t b = idx / Cin, ic_abs = idx % Cin;
                int64_t grp = ic_abs / Cg, ic = ic_abs % Cg;
                S* gplane = pgi + (b * Cin + ic_abs) * H * W;
                for (int64_t iy = 0; iy < H; ++iy) {
                    int64_t ky0 = std::max<int64_t>(0, iy + p - H + 1);
                    int64_t ky1 = std::min<int64_t>(K, iy + p + 1);
                    for (int64_t ix = 0; ix < W; ++ix) {
                        int64_t kx0 = std::max<int64_t>(0, ix + p - W + 1);
                        int64_t kx1 = std::min<int64_t>(K, ix + p + 1);
                        S acc = 0;
                        for (int64_t ocg = 0; ocg < cout_g; ++ocg) {
                            int64_t oc = grp * cout_g + ocg;
                            const S* goplane = pgo + (b * Cout + oc) * H * W;
                            const S* wplane = pw + (oc * Cg + ic) * K * K;
                            for (int64_t ky = ky0; ky < ky1; ++ky) {
                                const S* gorow = goplane + (iy - ky + p) * W + (ix + p);
                                const S* wrow = wplane + ky * K;
                                for (int64_t kx = kx0; kx < kx1; ++kx) acc += gorow[-kx] * wrow[kx];
                            }
                        }
                        gplane[iy * W + ix] = acc;
                    }
                }
            }
        });
    }
    return g;
}

// B×(C·S²)×H×W -> B×C×(H·S)×(W·S); channel block c·S²+sy·S+sx feeds output
// pixel (h·S+sy, w·S+sx) of channel c. Contiguous channel groups stay grouped.
template <typename S>
Tensor<S> pixel_shuffle(const Tensor<S>& x, int64_t s) {
    require(x.rank() == 4, "pixel_shuffle: need rank-4 input");
    int64_t B = x.dim(0), C2 = x.dim(1), H = x.dim(2), W = x.dim(3);
    require(s >= 1 && C2 % (s * s) == 0, "pixel_shuffle: channels not divisible by s^2");
    int64_t C = C2 / (s * s);
    Tensor<S> out({B, C, H * s, W * s});
    const S* px = x.data();
    S* po = out.data();
    parallel_for(B * C, 1, [&](int64_t lo, int64_t hi) {
        for (int64_t idx = lo; idx < hi; ++idx) {
            int64_t b = idx / C, c = idx % C;
            for (int64_t sy = 0; sy < s; ++sy) {
                for (int64_t sx = 0; sx < s; ++sx) {
                    const S* iplane = px + ((b * C2 + c * s * s + sy * s + sx) * H) * W;
                    for (int64_t h = 0; h < H; ++h) {
                        const S* irow = iplane + h * W;
                        S* orow = po + ((b * C + c) * H * s + h * s + sy) * W * s + sx;
                        for (int64_t w = 0; w < W; ++w) orow[w * s] = irow[w];
                    }
                }
            }
        }
    });
    return out;
}

// Exact inverse of pixel_shuffle; also its gradient.
template <typename S>
Tensor<S> pixel_unshuffle(const Tensor<S>& x, int64_t s) {
    require(x.rank() == 4, "pixel_unshuffle: need rank-4 input");
    int64_t B = x.dim(0), C = x.dim(1), Hs = x.dim(2), Ws = x.dim(3);
    require(s >= 1 && Hs % s == 0 && Ws % s == 0, "pixel_unshuffle: spatial dims not divisible by s");
    int64_t H = Hs / s, W = Ws / s;
    Tensor<S> out({B, C * s * s, H, W});
    const S* px = x.data();
    S* po = out.data();
    parallel_for(B * C, 1, [&](int64_t lo, int64_t hi) {
        for (int64_t idx = lo; idx < hi; ++idx) {
            int64_t b = idx / C, c = idx % C;
            for (int64_t sy = 0; sy < s; ++sy) {
                for (int64_t sx = 0; sx < s; ++sx) {
                    S* oplane = po + ((b * C * s * s + c * s * s + sy * s + sx) * H) * W;
                    for (int64_t h = 0; h < H; ++h) {
                        const S* irow = px + ((b * C + c) * Hs + h * s + sy) * Ws + sx;
                        S* orow = oplane + h * W;
                        for (int64_t w = 0; w < W; ++w) orow[w] = irow[w * s];
                    }
                }
            }
        }
    });
    return out;
}

template <typename S>
S gelu_scalar(S x) {
    return S(0.5) * x * (S(1) + std::erf(x * S(0.7071067811865476)));
}

template <typename S>
S gelu_grad_scalar(S x) {
    S cdf = S(0.5) * (S(1) + std::erf(x * S(0.7071067811865476)));
    S pdf = std::exp(S(-0.5) * x * x) * S(0.3989422804014327);
    return cdf + x * pdf;
}

template <typename S>
Tensor<S> gelu(const Tensor<S>& x) {
    Tensor<S> y(x.shape());
    const S* px = x.data();
    S* py = y.data();
    int64_t n = x.numel();
    parallel_for(n, 4096, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) py[i] = gelu_scalar(px[i]);
    });
    return y;
}

namespace detail {
// Split a shape at `axis` (negative allowed) into outer × n × inner extents.
inline void axis_split(const Shape& shape, int64_t axis, int64_t& outer, int64_t& n, int64_t& inner) {
    int64_t r = static_cast<int64_t>(shape.size());
    if (axis < 0) axis += r;
    require(axis >= 0 && axis < r, "axis out of range");
    outer = 1;
    inner = 1;
    for (int64_t i = 0; i < axis; ++i) outer *= shape[i];
    n = shape[axis];
    for (int64_t i = axis + 1; i < r; ++i) inner *= shape[i];
}
}  // namespace detail

template <typename S>
Tensor<S> softmax(const Tensor<S>& x, int64_t axis) {
    int64_t outer, n, inner;
    detail::axis_split(x.shape(), axis, outer, n, inner);
    Tensor<S> y(x.shape());
    const S* px = x.data();
    S* py = y.data();
    parallel_for(outer * inner, 16, [&](int64_t lo, int64_t hi) {
        for (int64_t idx = lo; idx < hi; ++idx) {
            int64_t o = idx / inner, in = idx % inner;
            const S* xs = px + o * n * inner + in;
            S* ys = py + o * n * inner + in;
            S mx = xs[0];
            for (int64_t i = 1; i < n; ++i) mx = std::max(mx, xs[i * inner]);
            S sum = 0;
            for (int64_t i = 0; i < n; ++i) {
                S e = std::exp(xs[i * inner] - mx);
                ys[i * inner] = e;
                sum += e;
            }
            S inv = S(1) / sum;
            for (int64_t i = 0; i < n; ++i) ys[i * inner] *= inv;
        }
    });
    return y;
}

// dx = y ⊙ (dy − Σ_axis dy⊙y)
template <typename S>
Tensor<S> softmax_backward(const Tensor<S>& y, const Tensor<S>& grad_out, int64_t axis) {
    int64_t outer, n, inner;
    detail::axis_split(y.shape(), axis, outer, n, inner);
    Tensor<S> gx(y.shape());
    const S* py = y.data();
    const S* pg = grad_out.data();
    S* px = gx.data();
    parallel_for(outer * inner, 16, [&](int64_t lo, int64_t hi) {
        for (int64_t idx = lo; idx < hi; ++idx) {
            int64_t o = idx / inner, in = idx % inner;
            const S* ys = py + o * n * inner + in;
            const S* gs = pg + o * n * inner + in;
            S* xs = px + o * n * inner + in;
            S dot = 0;
            for (int64_t i = 0; i < n; ++i) dot += gs[i * inner] * ys[i * inner];
            for (int64_t i = 0; i < n; ++i) xs[i * inner] = ys[i * inner] * (gs[i * inner] - dot);
        }
    });
    return gx;
}

inline constexpr double kLayerNormEps = 1e-5;

template <typename S>
Tensor<S> layer_norm(const Tensor<S>& x, int64_t axis, const Tensor<S>& gamma, const Tensor<S>& beta, S eps) {
    int64_t outer, n, inner;
    detail::axis_split(x.shape(), axis, outer, n, inner);
    require(gamma.numel() == n && beta.numel() == n, "layer_norm: affine params must match axis extent");
    Tensor<S> y(x.shape());
    const S* px = x.data();
    const S* pg = gamma.data();
    const S* pb = beta.data();
    S* py = y.data();
    parallel_for(outer * inner, 16, [&](int64_t lo, int64_t hi) {
        for (int64_t idx = lo; idx < hi; ++idx) {
            int64_t o = idx / inner, in = idx % inner;
            const S* xs = px + o * n * inner + in;
            S* ys = py + o * n * inner + in;
            S mean = 0;
            for (int64_t i = 0; i < n; ++i) mean += xs[i * inner];
            mean /= S(n);
            S var = 0;
            for (int64_t i = 0; i < n; ++i) {
                S d = xs[i * inner] - mean;
                var += d * d;
            }
            var /= S(n);
            S inv = S(1) / std::sqrt(var + eps);
            for (int64_t i = 0; i < n; ++i) ys[i * inner] = (xs[i * inner] - mean) * inv * pg[i] + pb[i];
        }
    });
    return y;
}

template <typename S>
struct LayerNormGrads {
    Tensor<S> input, gamma, beta;
};

template <typename S>
LayerNormGrads<S> layer_norm_backward(const Tensor<S>& x, int64_t axis, const Tensor<S>& gamma,
                                      const Tensor<S>& grad_out, S eps) {
    int64_t outer, n, inner;
    detail::axis_split(x.shape(), axis, outer, n, inner);
    LayerNormGrads<S> g{Tensor<S>(x.shape()), Tensor<S>(gamma.shape()), Tensor<S>(gamma.shape())};
    const S* px = x.data();
    const S* pg = gamma.data();
    const S* pgo = grad_out.data();
    S* pgi = g.input.data();
    // d input rows are independent; γ/β grads reduce over outer·inner in a
    // fixed single-thread pass afterwards
    parallel_for(outer * inner, 16, [&](int64_t lo, int64_t hi) {
        for (int64_t idx = lo; idx < hi; ++idx) {
            int64_t o = idx / inner, in = idx % inner;
            const S* xs = px + o * n * inner + in;
            const S* gs = pgo + o * n * inner + in;
            S* xo = pgi + o * n * inner + in;
            S mean = 0;
            for (int64_t i = 0; i < n; ++i) mean += xs[i * inner];
            mean /= S(n);
            S var = 0;
            for (int64_t i = 0; i < n; ++i) {
                S d = xs[i * inner] - mean;
                var += d * d;
            }
            var /= S(n);
            S inv = S(1) / std::sqrt(var + eps);
            S s1 = 0, s2 = 0;
            for (int64_t i = 0; i < n; ++i) {
                S xhat = (xs[i * inner] - mean) * inv;
                S gg = gs[i * inner] * pg[i];
                s1 += gg;
                s2 += gg * xhat;
            }
            s1 /= S(n);
            s2 /= S(n);
            for (int64_t i = 0; i < n; ++i) {
                S xhat = (xs[i * inner] - mean) * inv;
                S gg = gs[i * inner] * pg[i];
                xo[i * inner] = (gg - s1 - xhat * s2) * inv;
            }
        }
    });
    S* pgg = g.gamma.data();
    S* pgb = g.beta.data();
    for (int64_t o = 0; o < outer; ++o) {
        for (int64_t in = 0; in < inner; ++in) {
            const S* xs = px + o * n * inner + in;
            const S* gs = pgo + o * n * inner + in;
            S mean = 0;
            for (int64_t i = 0; i < n; ++i) mean += xs[i * inner];
            mean /= S(n);
            S var = 0;
            for (int64_t i = 0; i < n; ++i) {
                S d = xs[i * inner] - mean;
                var += d * d;
            }
            var /= S(n);
            S inv = S(1) / std::sqrt(var + eps);
            for (int64_t i = 0; i < n; ++i) {
                S xhat = (xs[i * inner] - mean) * inv;
                pgg[i] += gs[i * inner] * xhat;
                pgb[i] += gs[i * inner];
            }
        }
    }
    return g;
}

// Each fiber (row of the m×k view) divided by max(‖row‖₂, eps).
inline constexpr double kL2NormEps = 1e-8;

template <typename S>
Tensor<S> l2_normalize_rows(const Tensor<S>& x, S eps) {
    require(x.rank() == 2, "l2_normalize_rows: need rank-2 input");
    int64_t m = x.dim(0), k = x.dim(1);
    Tensor<S> y(x.shape());
    const S* px = x.data();
    S* py = y.data();
    for (int64_t i = 0; i < m; ++i) {
        const S* xs = px + i * k;
        S* ys = py + i * k;
        S sq = 0;
        for (int64_t j = 0; j < k; ++j) sq += xs[j] * xs[j];
        S norm = std::max(std::sqrt(sq), eps);
        S inv = S(1) / norm;
        for (int64_t j = 0; j < k; ++j) ys[j] = xs[j] * inv;
    }
    return y;
}

template <typename S>
Tensor<S> l2_normalize_rows_backward(const Tensor<S>& x, const Tensor<S>& grad_out, S eps) {
    int64_t m = x.dim(0), k = x.dim(1);
    Tensor<S> gx(x.shape());
    const S* px = x.data();
    const S* pg = grad_out.data();
    S* po = gx.data();
    for (int64_t i = 0; i < m; ++i) {
        const S* xs = px + i * k;
        const S* gs = pg + i * k;
        S* os = po + i * k;
        S sq = 0;
        for (int64_t j = 0; j < k; ++j) sq += xs[j] * xs[j];
        S norm = std::sqrt(sq);
        if (norm > eps) {
            S inv = S(1) / norm;
            S dot = 0;
            for (int64_t j = 0; j < k; ++j) dot += xs[j] * gs[j];
            S c = dot * inv * inv * inv;
            for (int64_t j = 0; j < k; ++j) os[j] = gs[j] * inv - xs[j] * c;
        } else {
            // below the clamp the denominator is the constant eps
            S inv = S(1) / eps;
            for (int64_t j = 0; j < k; ++j) os[j] = gs[j] * inv;
        }
    }
    return gx;
}

// Bernoulli keep mask holding 0 or 1/(1−p); multiply by it to drop.
template <typename S>
Tensor<S> dropout_mask(const Shape& shape, double p, Rng& rng) {
    require(p >= 0.0 && p < 1.0, "dropout: p must be in [0,1)");
    Tensor<S> mask(shape);
    S* pm = mask.data();
    S keep = S(1.0 / (1.0 - p));
    int64_t n = mask.numel();
    for (int64_t i = 0; i < n; ++i) pm[i] = rng.uniform() < p ? S(0) : keep;
    return mask;
}

template <typename S>
double mse(const Tensor<S>& a, const Tensor<S>& b) {
    check_same_shape(a, b, "mse");
    const S* pa = a.data();
    const S* pb = b.data();
    double acc = 0;
    int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) {
        double d = double(pa[i]) - double(pb[i]);
        acc += d * d;
    }
    return n == 0 ? 0.0 : acc / double(n);
}

template <typename S>
Tensor<S> clamp01(const Tensor<S>& x) {
    Tensor<S> y(x.shape());
    const S* px = x.data();
    S* py = y.data();
    int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) py[i] = std::min(S(1), std::max(S(0), px[i]));
    return y;
}

}  // namespace nervc
