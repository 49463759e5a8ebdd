#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nervc/autograd.hpp"
#include "nervc/nerv.hpp"
#include "nervc/rng.hpp"
#include "nervc/tensor.hpp"

// Video-to-weights encoder: patch tokens and learned weight tokens run
// through a transformer; trailing token embeddings are projected per layer
// and combined with shared carrier weights into a complete decoder.

namespace nervc {

enum class TokenMode { uniform, layer_specific, layer_adaptive };
enum class ExpandMode { out_channel, in_channel, kernel };

inline TokenMode parse_token_mode(const std::string& s) {
    if (s == "uniform") return TokenMode::uniform;
    if (s == "layer-specific") return TokenMode::layer_specific;
    if (s == "layer-adaptive") return TokenMode::layer_adaptive;
    fail("unknown token mode '" + s + "'");
}

inline const char* token_mode_name(TokenMode m) {
    switch (m) {
        case TokenMode::uniform: return "uniform";
        case TokenMode::layer_specific: return "layer-specific";
        case TokenMode::layer_adaptive: return "layer-adaptive";
    }
    return "?";
}

inline ExpandMode parse_expand_mode(const std::string& s) {
    if (s == "out-channel") return ExpandMode::out_channel;
    if (s == "in-channel") return ExpandMode::in_channel;
    if (s == "kernel") return ExpandMode::kernel;
    fail("unknown expand mode '" + s + "'");
}

inline const char* expand_mode_name(ExpandMode m) {
    switch (m) {
        case ExpandMode::out_channel: return "out-channel";
        case ExpandMode::in_channel: return "in-channel";
        case ExpandMode::kernel: return "kernel";
    }
    return "?";
}

// Per-layer token counts. Token width is pinned to d_l = C_in·K², so the
// counts alone fix the video-specific parameter budget Σ N_l·d_l.
struct TokenSpec {
    TokenMode mode = TokenMode::layer_adaptive;
    std::vector<int64_t> counts;

    int64_t total() const {
        int64_t n = 0;
        for (int64_t c : counts) n += c;
        return n;
    }

    int64_t token_width(const NervConfig& cfg, int64_t l) const {
        return cfg.c_in(l) * cfg.kernel(l) * cfg.kernel(l);
    }

    int64_t param_count(const NervConfig& cfg) const {
        int64_t n = 0;
        for (size_t l = 0; l < counts.size(); ++l) n += counts[l] * token_width(cfg, static_cast<int64_t>(l));
        return n;
    }

    void validate(const NervConfig& cfg) const {
        require(static_cast<int64_t>(counts.size()) == cfg.block_count(),
                "token spec: need one count per decoder layer");
        require(total() > 0, "token spec: at least one token required");
        for (size_t l = 0; l < counts.size(); ++l) {
            require(counts[l] >= 0, "token spec: negative count");
            if (counts[l] > 0)
                require(cfg.c_out(static_cast<int64_t>(l)) % counts[l] == 0,
                        "token spec: layer " + std::to_string(l) + " count " + std::to_string(counts[l]) +
                            " does not divide " + std::to_string(cfg.c_out(static_cast<int64_t>(l))) +
                            " output channels");
        }
        if (mode == TokenMode::uniform) {
            for (int64_t c : counts)
                require(c == counts[0], "token spec: uniform mode needs equal counts per layer");
        } else if (mode == TokenMode::layer_specific) {
            int64_t nonzero = 0;
            for (int64_t c : counts) nonzero += c > 0 ? 1 : 0;
            require(nonzero == 1, "token spec: layer-specific mode needs exactly one nonzero count");
        }
    }
};

inline TokenSpec token_spec_uniform(const NervConfig& cfg, int64_t per_layer) {
    TokenSpec s{TokenMode::uniform, std::vector<int64_t>(static_cast<size_t>(cfg.block_count()), per_layer)};
    s.validate(cfg);
    return s;
}

inline TokenSpec token_spec_layer_specific(const NervConfig& cfg, int64_t layer, int64_t n) {
    require(layer >= 0 && layer < cfg.block_count(), "token spec: layer out of range");
    TokenSpec s{TokenMode::layer_specific, std::vector<int64_t>(static_cast<size_t>(cfg.block_count()), 0)};
    s.counts[static_cast<size_t>(layer)] = n;
    s.validate(cfg);
    return s;
}

inline TokenSpec token_spec_adaptive(const NervConfig& cfg, std::vector<int64_t> counts) {
    TokenSpec s{TokenMode::layer_adaptive, std::move(counts)};
    s.validate(cfg);
    return s;
}

struct HypernetConfig {
    NervConfig nerv;
    TokenSpec tokens;
    int64_t patch = 16;
    int64_t dim = 128;
    int64_t layers = 3;
    int64_t heads = 4;
    int64_t ffn = 256;
    double dropout = 0.0;
    ExpandMode expand = ExpandMode::out_channel;
    bool normalize = true;
    bool conv_init = true;
    int64_t height = 32, width = 32;

    int64_t frames() const { return nerv.frame_count; }

    int64_t patch_token_count() const { return frames() * (height / patch) * (width / patch); }

    void validate() const {
        nerv.validate();
        tokens.validate(nerv);
        require(patch > 0 && height % patch == 0 && width % patch == 0,
                "hypernet config: frame sides must be divisible by the patch size");
        require(dim > 0 && heads > 0 && dim % heads == 0, "hypernet config: dim must be divisible by heads");
        require(layers >= 0 && ffn > 0, "hypernet config: bad encoder dims");
        require(dropout >= 0.0 && dropout < 1.0, "hypernet config: dropout must be in [0,1)");
        require(height == nerv.output_size() && width == nerv.output_size(),
                "hypernet config: video size must equal the decoder output size");
    }
};

template <typename T>
struct EncoderLayerP {
    T ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
};

// One field list shared by the tensor and tape-value mirrors of the
// parameters, so lockstep traversal cannot drift.
template <typename T>
struct HypernetParamsT {
    T fc1_w, fc1_b, pos, theta0;
    std::vector<EncoderLayerP<T>> enc;
    std::vector<T> fc2_w, fc2_b;      // per decoder layer; unused slots stay empty
    std::vector<T> theta1_k, theta1_b;

    template <typename F>
    void visit(F&& fn) {
        fn("fc1.w", fc1_w);
        fn("fc1.b", fc1_b);
        fn("pos", pos);
        fn("theta0", theta0);
        for (size_t i = 0; i < enc.size(); ++i) {
            std::string p = "enc" + std::to_string(i) + ".";
            auto& e = enc[i];
            fn(p + "ln1.g", e.ln1_g);
            fn(p + "ln1.b", e.ln1_b);
            fn(p + "wq", e.wq);
            fn(p + "bq", e.bq);
            fn(p + "wk", e.wk);
            fn(p + "bk", e.bk);
            fn(p + "wv", e.wv);
            fn(p + "bv", e.bv);
            fn(p + "wo", e.wo);
            fn(p + "bo", e.bo);
            fn(p + "ln2.g", e.ln2_g);
            fn(p + "ln2.b", e.ln2_b);
            fn(p + "ffn1.w", e.w1);
            fn(p + "ffn1.b", e.b1);
            fn(p + "ffn2.w", e.w2);
            fn(p + "ffn2.b", e.b2);
        }
        for (size_t l = 0; l < fc2_w.size(); ++l) {
            fn("head" + std::to_string(l) + ".w", fc2_w[l]);
            fn("head" + std::to_string(l) + ".b", fc2_b[l]);
        }
        for (size_t l = 0; l < theta1_k.size(); ++l) {
            fn("base" + std::to_string(l) + ".k", theta1_k[l]);
            fn("base" + std::to_string(l) + ".b", theta1_b[l]);
        }
    }
};

template <typename S>
using HypernetParams = HypernetParamsT<Tensor<S>>;

template <typename S>
using HypernetValues = HypernetParamsT<Value<S>>;

template <typename S>
HypernetParams<S> init_params(const HypernetConfig& cfg, Rng& rng) {
    cfg.validate();
    const NervConfig& nc = cfg.nerv;
    HypernetParams<S> p;
    auto fan_in_uniform = [&](Shape shape, int64_t fan) {
        double b = 1.0 / std::sqrt(double(fan));
        return rng.template uniform_tensor<S>(shape, -b, b);
    };
    int64_t pd = 3 * cfg.patch * cfg.patch;
    p.fc1_w = fan_in_uniform({pd, cfg.dim}, pd);
    p.fc1_b = Tensor<S>({cfg.dim});
    p.pos = rng.template normal_tensor<S>({cfg.patch_token_count(), cfg.dim}, 0.0, 0.02);
    p.theta0 = rng.template normal_tensor<S>({cfg.dim, cfg.tokens.total()}, 0.0, 0.02);
    for (int64_t i = 0; i < cfg.layers; ++i) {
        EncoderLayerP<Tensor<S>> e;
        e.ln1_g = Tensor<S>::full({cfg.dim}, S(1));
        e.ln1_b = Tensor<S>({cfg.dim});
        e.wq = fan_in_uniform({cfg.dim, cfg.dim}, cfg.dim);
        e.bq = Tensor<S>({cfg.dim});
        e.wk = fan_in_uniform({cfg.dim, cfg.dim}, cfg.dim);
        e.bk = Tensor<S>({cfg.dim});
        e.wv = fan_in_uniform({cfg.dim, cfg.dim}, cfg.dim);
        e.bv = Tensor<S>({cfg.dim});
        e.wo = fan_in_uniform({cfg.dim, cfg.dim}, cfg.dim);
        e.bo = Tensor<S>({cfg.dim});
        e.ln2_g = Tensor<S>::full({cfg.dim}, S(1));
        e.ln2_b = Tensor<S>({cfg.dim});
        e.w1 = fan_in_uniform({cfg.dim, cfg.ffn}, cfg.dim);
        e.b1 = Tensor<S>({cfg.ffn});
        e.w2 = fan_in_uniform({cfg.ffn, cfg.dim}, cfg.ffn);
        e.b2 = Tensor<S>({cfg.dim});
        p.enc.push_back(std::move(e));
    }
    for (int64_t l = 0; l < nc.block_count(); ++l) {
        if (cfg.tokens.counts[static_cast<size_t>(l)] > 0) {
            int64_t dl = cfg.tokens.token_width(nc, l);
            p.fc2_w.push_back(fan_in_uniform({cfg.dim, dl}, cfg.dim));
            p.fc2_b.push_back(Tensor<S>({dl}));
        } else {
            p.fc2_w.emplace_back();
            p.fc2_b.emplace_back();
        }
    }
    for (int64_t l = 0; l < nc.block_count(); ++l) {
        int64_t fan = nc.c_in(l) * nc.kernel(l) * nc.kernel(l);
        p.theta1_k.push_back(cfg.conv_init ? fan_in_uniform(nc.kernel_shape(l), fan)
                                           : rng.template normal_tensor<S>(nc.kernel_shape(l), 0.0, 0.02));
        p.theta1_b.push_back(Tensor<S>(nc.bias_shape(l)));
    }
    return p;
}

// Mirror the parameter tensors onto a tape as leaves. Empty slots stay
// detached (id -1).
template <typename S>
HypernetValues<S> lift_params(Tape<S>& tape, HypernetParams<S>& p, bool requires_grad) {
    HypernetValues<S> v;
    v.enc.resize(p.enc.size());
    v.fc2_w.resize(p.fc2_w.size());
    v.fc2_b.resize(p.fc2_b.size());
    v.theta1_k.resize(p.theta1_k.size());
    v.theta1_b.resize(p.theta1_b.size());
    std::vector<Tensor<S>*> ts;
    p.visit([&](const std::string&, Tensor<S>& t) { ts.push_back(&t); });
    std::vector<Value<S>*> vs;
    v.visit([&](const std::string&, Value<S>& x) { vs.push_back(&x); });
    require(ts.size() == vs.size(), "lift_params: field walk mismatch");
    for (size_t i = 0; i < ts.size(); ++i)
        if (ts[i]->numel() > 0) *vs[i] = tape.leaf(*ts[i], requires_grad);
    return v;
}

// Flat index map realizing the token-to-kernel expansion. Source is the
// N×d_l token matrix, destination the C_out×(C_in·K²) kernel view.
inline std::shared_ptr<std::vector<int64_t>> expand_map(ExpandMode mode, int64_t c_out, int64_t c_in, int64_t k,
                                                        int64_t n_tokens) {
    int64_t d = c_in * k * k;
    require(n_tokens > 0 && c_out % n_tokens == 0,
            "expand: token count " + std::to_string(n_tokens) + " does not divide " + std::to_string(c_out) +
                " output channels");
    int64_t f = c_out / n_tokens;
    auto map = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(c_out * d));
    if (mode == ExpandMode::out_channel) {
        // rows repeat f times consecutively along the output-channel axis
        for (int64_t c = 0; c < c_out; ++c)
            for (int64_t j = 0; j < d; ++j) (*map)[static_cast<size_t>(c * d + j)] = (c / f) * d + j;
    } else if (mode == ExpandMode::in_channel) {
        // token buffer viewed as C_out×(C_in/f)×K×K, repeated along input channels
        require(c_in % f == 0, "expand: repetition factor " + std::to_string(f) + " does not divide " +
                                   std::to_string(c_in) + " input channels");
        int64_t cg = c_in / f;
        for (int64_t c = 0; c < c_out; ++c)
            for (int64_t ic = 0; ic < c_in; ++ic)
                for (int64_t kk = 0; kk < k * k; ++kk)
                    (*map)[static_cast<size_t>((c * c_in + ic) * k * k + kk)] = (c * cg + ic / f) * k * k + kk;
    } else {
        // token buffer viewed as C_out×C_in×(K²/f), repeated along the kernel axis
        require((k * k) % f == 0, "expand: repetition factor " + std::to_string(f) + " does not divide " +
                                      std::to_string(k * k) + " kernel taps");
        int64_t kg = k * k / f;
        for (int64_t c = 0; c < c_out; ++c)
            for (int64_t ic = 0; ic < c_in; ++ic)
                for (int64_t kk = 0; kk < k * k; ++kk)
                    (*map)[static_cast<size_t>((c * c_in + ic) * k * k + kk)] = (c * c_in + ic) * kg + kk / f;
    }
    return map;
}

// F×3×H×W video to M×(3P²) patch rows: frame-major, then patch rows, then
// patch columns; each patch flattens channel-major.
template <typename S>
Tensor<S> patch_tokens(const Tensor<S>& video, int64_t patch) {
    require(video.rank() == 4 && video.dim(1) == 3, "patch_tokens: need F×3×H×W video");
    int64_t F = video.dim(0), H = video.dim(2), W = video.dim(3);
    require(H % patch == 0 && W % patch == 0, "patch_tokens: frame sides must be divisible by the patch size");
    int64_t py = H / patch, px = W / patch;
    int64_t d = 3 * patch * patch;
    Tensor<S> out({F * py * px, d});
    const S* pv = video.data();
    S* po = out.data();
    int64_t row = 0;
    for (int64_t f = 0; f < F; ++f)
        for (int64_t gy = 0; gy < py; ++gy)
            for (int64_t gx = 0; gx < px; ++gx, ++row) {
                S* dst = po + row * d;
                for (int64_t c = 0; c < 3; ++c)
                    for (int64_t y = 0; y < patch; ++y)
                        for (int64_t x = 0; x < patch; ++x)
                            *dst++ = pv[((f * 3 + c) * H + gy * patch + y) * W + gx * patch + x];
            }
    return out;
}

template <typename S>
struct EncodedWeights {
    std::vector<Value<S>> kernels, biases;
};

namespace detail {

template <typename S>
Value<S> linear(Value<S> x, Value<S> w, Value<S> b) {
    return ad::add_rowvec(ad::matmul(x, w), b);
}

template <typename S>
Value<S> encoder_block(Value<S> tokens, EncoderLayerP<Value<S>>& e, int64_t heads, double dropout_p, bool training,
                       Rng& rng) {
    int64_t d = tokens.dim(1);
    int64_t dh = d / heads;
    Value<S> h = ad::layer_norm(tokens, 1, e.ln1_g, e.ln1_b);
    Value<S> q = linear(h, e.wq, e.bq);
    Value<S> k = linear(h, e.wk, e.bk);
    Value<S> v = linear(h, e.wv, e.bv);
    std::vector<Value<S>> head_outs;
    S inv_sqrt = S(1.0 / std::sqrt(double(dh)));
    for (int64_t i = 0; i < heads; ++i) {
        Value<S> qh = ad::slice_cols(q, i * dh, (i + 1) * dh);
        Value<S> kh = ad::slice_cols(k, i * dh, (i + 1) * dh);
        Value<S> vh = ad::slice_cols(v, i * dh, (i + 1) * dh);
        Value<S> scores = ad::scale(ad::matmul(qh, ad::transpose2d(kh)), inv_sqrt);
        Value<S> attn = ad::softmax(scores, 1);
        attn = ad::dropout(attn, dropout_p, training, rng);
        head_outs.push_back(ad::matmul(attn, vh));
    }
    Value<S> o = linear(ad::concat_cols(head_outs), e.wo, e.bo);
    o = ad::dropout(o, dropout_p, training, rng);
    tokens = ad::add(tokens, o);
    Value<S> h2 = ad::layer_norm(tokens, 1, e.ln2_g, e.ln2_b);
    Value<S> f = linear(ad::gelu(linear(h2, e.w1, e.b1)), e.w2, e.b2);
    f = ad::dropout(f, dropout_p, training, rng);
    return ad::add(tokens, f);
}

}  // namespace detail

// Full encoder graph on the tape: tokenize, transformer, per-layer token
// heads, modulation against the carrier weights. Layers with no tokens pass
// their carrier through untouched (and unnormalized).
template <typename S>
EncodedWeights<S> hypernet_encode_ad(Tape<S>& tape, const HypernetConfig& cfg, HypernetValues<S>& P,
                                     const Tensor<S>& video, bool training, Rng& rng) {
    const NervConfig& nc = cfg.nerv;
    require(video.rank() == 4 && video.dim(0) == cfg.frames() && video.dim(2) == cfg.height &&
                video.dim(3) == cfg.width,
            "encode: video shape " + shape_str(video.shape()) + " does not match the configured geometry");
    Value<S> x0 = tape.constant(patch_tokens(video, cfg.patch));
    Value<S> x = ad::add(detail::linear(x0, P.fc1_w, P.fc1_b), P.pos);
    Value<S> tokens = ad::concat_rows<S>({x, ad::transpose2d(P.theta0)});
    for (int64_t i = 0; i < cfg.layers; ++i)
        tokens = detail::encoder_block(tokens, P.enc[static_cast<size_t>(i)], cfg.heads, cfg.dropout, training, rng);
    int64_t m = cfg.patch_token_count();
    Value<S> trail = ad::slice_rows(tokens, m, m + cfg.tokens.total());
    EncodedWeights<S> out;
    int64_t off = 0;
    for (int64_t l = 0; l < nc.block_count(); ++l) {
        int64_t n = cfg.tokens.counts[static_cast<size_t>(l)];
        if (n == 0) {
            out.kernels.push_back(P.theta1_k[static_cast<size_t>(l)]);
        } else {
            Value<S> rows = ad::slice_rows(trail, off, off + n);
            Value<S> v = detail::linear(rows, P.fc2_w[static_cast<size_t>(l)], P.fc2_b[static_cast<size_t>(l)]);
            off += n;
            int64_t co = nc.c_out(l), ci = nc.c_in(l), k = nc.kernel(l);
            auto map = expand_map(cfg.expand, co, ci, k, n);
            Value<S> mod = ad::gather_map(v, map, {co, ci * k * k});
            Value<S> carrier = ad::reshape(P.theta1_k[static_cast<size_t>(l)], {co, ci * k * k});
            Value<S> w = ad::mul(carrier, mod);
            if (cfg.normalize) w = ad::l2_normalize_rows(w);
            out.kernels.push_back(ad::reshape(w, nc.kernel_shape(l)));
        }
        out.biases.push_back(P.theta1_b[static_cast<size_t>(l)]);
    }
    return out;
}

// Deterministic weights from frozen parameters (no dropout, throwaway tape).
template <typename S>
NervWeights<S> hypernet_encode(const HypernetConfig& cfg, HypernetParams<S>& params, const Tensor<S>& video) {
    Tape<S> tape;
    HypernetValues<S> P = lift_params(tape, params, false);
    Rng rng(0);
    EncodedWeights<S> ew = hypernet_encode_ad(tape, cfg, P, video, false, rng);
    NervWeights<S> w;
    for (auto& kv : ew.kernels) w.kernels.push_back(kv.val());
    for (auto& bv : ew.biases) w.biases.push_back(bv.val());
    return w;
}

}  // namespace nervc
