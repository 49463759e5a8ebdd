#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "nervc/kernels.hpp"
#include "nervc/tensor.hpp"

// Reverse-mode tape. Nodes append in evaluation order, which doubles as the
// topological order for the backward sweep. A Value is a (tape, node id) pair.

namespace nervc {

template <typename S>
class Tape;

template <typename S>
struct Value {
    Tape<S>* tape = nullptr;
    int64_t id = -1;
    const Tensor<S>& val() const;
    const Tensor<S>& grad() const;
    const Shape& shape() const { return val().shape(); }
    int64_t dim(int64_t i) const { return val().dim(i); }
};

template <typename S>
class Tape {
public:
    struct Node {
        Tensor<S> value;
        Tensor<S> grad;
        bool needs = false;
        std::function<void(Tape&)> backward;  // empty for leaves/constants
    };

    Value<S> leaf(Tensor<S> v, bool requires_grad) {
        nodes_.push_back(Node{std::move(v), Tensor<S>(), requires_grad, {}});
        return Value<S>{this, static_cast<int64_t>(nodes_.size()) - 1};
    }
    Value<S> constant(Tensor<S> v) { return leaf(std::move(v), false); }

    Value<S> emit(Tensor<S> v, bool needs, std::function<void(Tape&)> bw) {
        nodes_.push_back(Node{std::move(v), Tensor<S>(), needs, needs ? std::move(bw) : std::function<void(Tape&)>{}});
        return Value<S>{this, static_cast<int64_t>(nodes_.size()) - 1};
    }

    Node& node(int64_t id) { return nodes_[static_cast<size_t>(id)]; }
    const Node& node(int64_t id) const { return nodes_[static_cast<size_t>(id)]; }

    // Accumulate into a node's grad buffer, allocating on first touch.
    Tensor<S>& grad_buf(int64_t id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.numel() == 0 && n.value.numel() != 0) n.grad = Tensor<S>(n.value.shape());
        return n.grad;
    }

    void accumulate(int64_t id, const Tensor<S>& g) {
        Tensor<S>& buf = grad_buf(id);
        check_same_shape(buf, g, "grad accumulate");
        S* pb = buf.data();
        const S* pg = g.data();
        int64_t n = buf.numel();
        for (int64_t i = 0; i < n; ++i) pb[i] += pg[i];
    }

    void backward(Value<S> loss) {
        require(loss.tape == this, "backward: value from another tape");
        require(node(loss.id).value.numel() == 1, "backward: loss must be scalar");
        grad_buf(loss.id).data()[0] = S(1);
        for (int64_t i = loss.id; i >= 0; --i) {
            Node& n = nodes_[static_cast<size_t>(i)];
            if (n.backward && n.grad.numel() != 0) n.backward(*this);
        }
    }

    size_t size() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

template <typename S>
const Tensor<S>& Value<S>::val() const {
    return tape->node(id).value;
}
template <typename S>
const Tensor<S>& Value<S>::grad() const {
    return tape->node(id).grad;
}

namespace ad {

template <typename S>
bool needs(Value<S> a) {
    return a.tape->node(a.id).needs;
}

template <typename S>
Value<S> add(Value<S> a, Value<S> b) {
    check_same_shape(a.val(), b.val(), "add");
    Tensor<S> out(a.val().shape());
    const S* pa = a.val().data();
    const S* pb = b.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + pb[i];
    bool ng = needs(a) || needs(b);
    int64_t ia = a.id, ib = b.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        if (t.node(ia).needs) t.accumulate(ia, g);
        if (t.node(ib).needs) t.accumulate(ib, g);
    });
}

template <typename S>
Value<S> sub(Value<S> a, Value<S> b) {
    check_same_shape(a.val(), b.val(), "sub");
    Tensor<S> out(a.val().shape());
    const S* pa = a.val().data();
    const S* pb = b.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] - pb[i];
    bool ng = needs(a) || needs(b);
    int64_t ia = a.id, ib = b.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        if (t.node(ia).needs) t.accumulate(ia, g);
        if (t.node(ib).needs) {
            Tensor<S> neg(g.shape());
            const S* pg = g.data();
            S* pn = neg.data();
            for (int64_t i = 0; i < neg.numel(); ++i) pn[i] = -pg[i];
            t.accumulate(ib, neg);
        }
    });
}

template <typename S>
Value<S> mul(Value<S> a, Value<S> b) {
    check_same_shape(a.val(), b.val(), "mul");
    Tensor<S> out(a.val().shape());
    const S* pa = a.val().data();
    const S* pb = b.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * pb[i];
    bool ng = needs(a) || needs(b);
    int64_t ia = a.id, ib = b.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        const S* pg = g.data();
        if (t.node(ia).needs) {
            Tensor<S> ga(g.shape());
            const S* pbv = t.node(ib).value.data();
            S* p = ga.data();
            for (int64_t i = 0; i < ga.numel(); ++i) p[i] = pg[i] * pbv[i];
            t.accumulate(ia, ga);
        }
        if (t.node(ib).needs) {
            Tensor<S> gb(g.shape());
            const S* pav = t.node(ia).value.data();
            S* p = gb.data();
            for (int64_t i = 0; i < gb.numel(); ++i) p[i] = pg[i] * pav[i];
            t.accumulate(ib, gb);
        }
    });
}

template <typename S>
Value<S> scale(Value<S> a, S c) {
    Tensor<S> out(a.val().shape());
    const S* pa = a.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * c;
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), needs(a), [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        Tensor<S> ga(g.shape());
        const S* pg = g.data();
        S* p = ga.data();
        for (int64_t i = 0; i < ga.numel(); ++i) p[i] = pg[i] * c;
        t.accumulate(ia, ga);
    });
}

template <typename S>
Value<S> add_scalar(Value<S> a, S c) {
    Tensor<S> out(a.val().shape());
    const S* pa = a.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + c;
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), needs(a),
                        [=](Tape<S>& t) { t.accumulate(ia, t.node(self).grad); });
}

// x[m×n] + row[n] broadcast over rows
template <typename S>
Value<S> add_rowvec(Value<S> x, Value<S> row) {
    require(x.val().rank() == 2 && row.val().rank() == 1, "add_rowvec: need matrix and vector");
    int64_t m = x.dim(0), n = x.dim(1);
    require(row.val().numel() == n, "add_rowvec: width mismatch");
    Tensor<S> out({m, n});
    const S* px = x.val().data();
    const S* pr = row.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) po[i * n + j] = px[i * n + j] + pr[j];
    bool ng = needs(x) || needs(row);
    int64_t ix = x.id, ir = row.id, self = static_cast<int64_t>(x.tape->size());
    return x.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        if (t.node(ix).needs) t.accumulate(ix, g);
        if (t.node(ir).needs) {
            Tensor<S> gr({n});
            const S* pg = g.data();
            S* p = gr.data();
            for (int64_t i = 0; i < m; ++i)
                for (int64_t j = 0; j < n; ++j) p[j] += pg[i * n + j];
            t.accumulate(ir, gr);
        }
    });
}

template <typename S>
Value<S> matmul(Value<S> a, Value<S> b) {
    Tensor<S> out = nervc::matmul(a.val(), b.val());
    bool ng = needs(a) || needs(b);
    int64_t ia = a.id, ib = b.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        if (t.node(ia).needs) t.accumulate(ia, matmul_nt(g, t.node(ib).value));
        if (t.node(ib).needs) t.accumulate(ib, matmul_tn(t.node(ia).value, g));
    });
}

template <typename S>
Value<S> reshape(Value<S> a, Shape shape) {
    Tensor<S> out = a.val().reshaped(shape);
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    Shape orig = a.val().shape();
    return a.tape->emit(std::move(out), needs(a), [=](Tape<S>& t) {
        t.accumulate(ia, t.node(self).grad.reshaped(orig));
    });
}

template <typename S>
Value<S> transpose2d(Value<S> a) {
    require(a.val().rank() == 2, "transpose2d: need rank-2 input");
    int64_t m = a.dim(0), n = a.dim(1);
    Tensor<S> out({n, m});
    const S* pa = a.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) po[j * m + i] = pa[i * n + j];
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), needs(a), [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        Tensor<S> gt({m, n});
        const S* pg = g.data();
        S* p = gt.data();
        for (int64_t j = 0; j < n; ++j)
            for (int64_t i = 0; i < m; ++i) p[i * n + j] = pg[j * m + i];
        t.accumulate(ia, gt);
    });
}

template <typename S>
Value<S> slice_rows(Value<S> a, int64_t r0, int64_t r1) {
    require(a.val().rank() == 2, "slice_rows: need rank-2 input");
    int64_t m = a.dim(0), n = a.dim(1);
    require(0 <= r0 && r0 <= r1 && r1 <= m, "slice_rows: bad range");
    Tensor<S> out({r1 - r0, n});
    std::copy(a.val().data() + r0 * n, a.val().data() + r1 * n, out.data());
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), needs(a), [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        Tensor<S> gx({m, n});
        std::copy(g.data(), g.data() + g.numel(), gx.data() + r0 * n);
        t.accumulate(ia, gx);
    });
}

template <typename S>
Value<S> slice_cols(Value<S> a, int64_t c0, int64_t c1) {
    require(a.val().rank() == 2, "slice_cols: need rank-2 input");
    int64_t m = a.dim(0), n = a.dim(1);
    require(0 <= c0 && c0 <= c1 && c1 <= n, "slice_cols: bad range");
    int64_t w = c1 - c0;
    Tensor<S> out({m, w});
    const S* pa = a.val().data();
    S* po = out.data();
    for (int64_t i = 0; i < m; ++i) std::copy(pa + i * n + c0, pa + i * n + c1, po + i * w);
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), needs(a), [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        Tensor<S> gx({m, n});
        const S* pg = g.data();
        S* p = gx.data();
        for (int64_t i = 0; i < m; ++i) std::copy(pg + i * w, pg + (i + 1) * w, p + i * n + c0);
        t.accumulate(ia, gx);
    });
}

template <typename S>
Value<S> concat_rows(const std::vector<Value<S>>& parts) {
    require(!parts.empty(), "concat_rows: empty input");
    Tape<S>* tape = parts[0].tape;
    int64_t n = parts[0].val().dim(1);
    int64_t m = 0;
    bool ng = false;
    for (const auto& p : parts) {
        require(p.val().rank() == 2 && p.val().dim(1) == n, "concat_rows: column mismatch");
        m += p.val().dim(0);
        ng = ng || needs(p);
    }
    Tensor<S> out({m, n});
    int64_t r = 0;
    std::vector<int64_t> ids, offs;
    for (const auto& p : parts) {
        std::copy(p.val().data(), p.val().data() + p.val().numel(), out.data() + r * n);
        ids.push_back(p.id);
        offs.push_back(r);
        r += p.val().dim(0);
    }
    int64_t self = static_cast<int64_t>(tape->size());
    return tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        for (size_t i = 0; i < ids.size(); ++i) {
            if (!t.node(ids[i]).needs) continue;
            int64_t rows = t.node(ids[i]).value.dim(0);
            Tensor<S> gp({rows, n});
            std::copy(g.data() + offs[i] * n, g.data() + (offs[i] + rows) * n, gp.data());
            t.accumulate(ids[i], gp);
        }
    });
}

template <typename S>
Value<S> concat_cols(const std::vector<Value<S>>& parts) {
    require(!parts.empty(), "concat_cols: empty input");
    Tape<S>* tape = parts[0].tape;
    int64_t m = parts[0].val().dim(0);
    int64_t n = 0;
    bool ng = false;
    for (const auto& p : parts) {
        require(p.val().rank() == 2 && p.val().dim(0) == m, "concat_cols: row mismatch");
        n += p.val().dim(1);
        ng = ng || needs(p);
    }
    Tensor<S> out({m, n});
    std::vector<int64_t> ids, offs;
    int64_t c = 0;
    for (const auto& p : parts) {
        int64_t w = p.val().dim(1);
        for (int64_t i = 0; i < m; ++i)
            std::copy(p.val().data() + i * w, p.val().data() + (i + 1) * w, out.data() + i * n + c);
        ids.push_back(p.id);
        offs.push_back(c);
        c += w;
    }
    int64_t self = static_cast<int64_t>(tape->size());
    return tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        for (size_t i = 0; i < ids.size(); ++i) {
            if (!t.node(ids[i]).needs) continue;
            int64_t w = t.node(ids[i]).value.dim(1);
            Tensor<S> gp({m, w});
            for (int64_t r = 0; r < m; ++r)
                std::copy(g.data() + r * n + offs[i], g.data() + r * n + offs[i] + w, gp.data() + r * w);
            t.accumulate(ids[i], gp);
        }
    });
}

template <typename S>
Value<S> gelu(Value<S> a) {
    Tensor<S> out = nervc::gelu(a.val());
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), needs(a), [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        const Tensor<S>& x = t.node(ia).value;
        Tensor<S> gx(x.shape());
        const S* pg = g.data();
        const S* px = x.data();
        S* p = gx.data();
        for (int64_t i = 0; i < gx.numel(); ++i) p[i] = pg[i] * gelu_grad_scalar(px[i]);
        t.accumulate(ia, gx);
    });
}

template <typename S>
Value<S> softmax(Value<S> a, int64_t axis) {
    Tensor<S> out = nervc::softmax(a.val(), axis);
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), needs(a), [=](Tape<S>& t) {
        t.accumulate(ia, softmax_backward(t.node(self).value, t.node(self).grad, axis));
    });
}

template <typename S>
Value<S> layer_norm(Value<S> x, int64_t axis, Value<S> gamma, Value<S> beta, S eps = S(kLayerNormEps)) {
    Tensor<S> out = nervc::layer_norm(x.val(), axis, gamma.val(), beta.val(), eps);
    bool ng = needs(x) || needs(gamma) || needs(beta);
    int64_t ix = x.id, ig = gamma.id, ib = beta.id, self = static_cast<int64_t>(x.tape->size());
    return x.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        auto grads = layer_norm_backward(t.node(ix).value, axis, t.node(ig).value, t.node(self).grad, eps);
        if (t.node(ix).needs) t.accumulate(ix, grads.input);
        if (t.node(ig).needs) t.accumulate(ig, grads.gamma);
        if (t.node(ib).needs) t.accumulate(ib, grads.beta);
    });
}

template <typename S>
Value<S> l2_normalize_rows(Value<S> x, S eps = S(kL2NormEps)) {
    Tensor<S> out = nervc::l2_normalize_rows(x.val(), eps);
    int64_t ix = x.id, self = static_cast<int64_t>(x.tape->size());
    return x.tape->emit(std::move(out), needs(x), [=](Tape<S>& t) {
        t.accumulate(ix, l2_normalize_rows_backward(t.node(ix).value, t.node(self).grad, eps));
    });
}

template <typename S>
Value<S> conv2d(Value<S> input, Value<S> weight, Value<S>* bias, int64_t groups, int64_t padding) {
    Tensor<S> out = nervc::conv2d(input.val(), weight.val(), bias == nullptr ? nullptr : &bias->val(), groups,
                                  padding);
    bool has_bias = bias != nullptr;
    bool ng = needs(input) || needs(weight) || (has_bias && needs(*bias));
    int64_t ii = input.id, iw = weight.id, ib = has_bias ? bias->id : -1;
    int64_t self = static_cast<int64_t>(input.tape->size());
    return input.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        auto grads = conv2d_backward(t.node(ii).value, t.node(iw).value, t.node(self).grad, has_bias, groups,
                                     padding);
        if (t.node(ii).needs) t.accumulate(ii, grads.input);
        if (t.node(iw).needs) t.accumulate(iw, grads.weight);
        if (has_bias && t.node(ib).needs) t.accumulate(ib, grads.bias);
    });
}

template <typename S>
Value<S> pixel_shuffle(Value<S> x, int64_t s) {
    Tensor<S> out = nervc::pixel_shuffle(x.val(), s);
    int64_t ix = x.id, self = static_cast<int64_t>(x.tape->size());
    return x.tape->emit(std::move(out), needs(x), [=](Tape<S>& t) {
        t.accumulate(ix, pixel_unshuffle(t.node(self).grad, s));
    });
}

// out.flat[i] = x.flat[map[i]]; backward scatter-adds along the same map.
template <typename S>
Value<S> gather_map(Value<S> x, std::shared_ptr<const std::vector<int64_t>> map, Shape out_shape) {
    int64_t n_out = shape_numel(out_shape);
    require(static_cast<int64_t>(map->size()) == n_out, "gather_map: map size != output size");
    Tensor<S> out(out_shape);
    const S* px = x.val().data();
    S* po = out.data();
    int64_t n_in = x.val().numel();
    for (int64_t i = 0; i < n_out; ++i) {
        int64_t src = (*map)[static_cast<size_t>(i)];
        require(src >= 0 && src < n_in, "gather_map: index out of range");
        po[i] = px[src];
    }
    int64_t ix = x.id, self = static_cast<int64_t>(x.tape->size());
    return x.tape->emit(std::move(out), needs(x), [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        Tensor<S> gx(t.node(ix).value.shape());
        const S* pg = g.data();
        S* p = gx.data();
        for (int64_t i = 0; i < g.numel(); ++i) p[(*map)[static_cast<size_t>(i)]] += pg[i];
        t.accumulate(ix, gx);
    });
}

// Multiplies by a fresh Bernoulli mask when training, else passes through.
template <typename S>
Value<S> dropout(Value<S> x, double p, bool training, Rng& rng) {
    if (!training || p <= 0.0) return x;
    Tensor<S> mask = dropout_mask<S>(x.val().shape(), p, rng);
    Tensor<S> out(x.val().shape());
    const S* px = x.val().data();
    const S* pm = mask.data();
    S* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = px[i] * pm[i];
    int64_t ix = x.id, self = static_cast<int64_t>(x.tape->size());
    auto mask_ptr = std::make_shared<Tensor<S>>(std::move(mask));
    return x.tape->emit(std::move(out), needs(x), [=](Tape<S>& t) {
        const Tensor<S>& g = t.node(self).grad;
        Tensor<S> gx(g.shape());
        const S* pg = g.data();
        const S* pmm = mask_ptr->data();
        S* pp = gx.data();
        for (int64_t i = 0; i < gx.numel(); ++i) pp[i] = pg[i] * pmm[i];
        t.accumulate(ix, gx);
    });
}

// Mean squared error over all elements, as a scalar node.
template <typename S>
Value<S> mse_loss(Value<S> a, Value<S> b) {
    check_same_shape(a.val(), b.val(), "mse_loss");
    double acc = 0;
    const S* pa = a.val().data();
    const S* pb = b.val().data();
    int64_t n = a.val().numel();
    for (int64_t i = 0; i < n; ++i) {
        double d = double(pa[i]) - double(pb[i]);
        acc += d * d;
    }
    Tensor<S> out = Tensor<S>::scalar(S(acc / double(n)));
    bool ng = needs(a) || needs(b);
    int64_t ia = a.id, ib = b.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(std::move(out), ng, [=](Tape<S>& t) {
        S go = t.node(self).grad.data()[0];
        const S* va = t.node(ia).value.data();
        const S* vb = t.node(ib).value.data();
        S c = go * S(2) / S(n);
        if (t.node(ia).needs) {
            Tensor<S> ga(t.node(ia).value.shape());
            S* p = ga.data();
            for (int64_t i = 0; i < n; ++i) p[i] = c * (va[i] - vb[i]);
            t.accumulate(ia, ga);
        }
        if (t.node(ib).needs) {
            Tensor<S> gb(t.node(ib).value.shape());
            S* p = gb.data();
            for (int64_t i = 0; i < n; ++i) p[i] = c * (vb[i] - va[i]);
            t.accumulate(ib, gb);
        }
    });
}

template <typename S>
Value<S> sum(Value<S> a) {
    const S* pa = a.val().data();
    S acc = 0;
    int64_t n = a.val().numel();
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    int64_t ia = a.id, self = static_cast<int64_t>(a.tape->size());
    return a.tape->emit(Tensor<S>::scalar(acc), needs(a), [=](Tape<S>& t) {
        S go = t.node(self).grad.data()[0];
        Tensor<S> ga(t.node(ia).value.shape());
        ga.fill(go);
        t.accumulate(ia, ga);
    });
}

}  // namespace ad

// Decoupled-decay Adam with bias correction. Slot order must stay stable
// between steps; slots are keyed by position in the params list.
template <typename S>
class AdamW {
public:
    AdamW(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), wd_(weight_decay) {}

    double& lr() { return lr_; }

    void step(const std::vector<Tensor<S>*>& params, const std::vector<const Tensor<S>*>& grads) {
        require(params.size() == grads.size(), "adamw: params/grads length mismatch");
        if (m_.empty()) {
            for (auto* p : params) {
                m_.emplace_back(p->shape());
                v_.emplace_back(p->shape());
            }
        }
        require(m_.size() == params.size(), "adamw: slot count changed between steps");
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, double(t_));
        double bc2 = 1.0 - std::pow(beta2_, double(t_));
        for (size_t k = 0; k < params.size(); ++k) {
            Tensor<S>& p = *params[k];
            const Tensor<S>& g = *grads[k];
            check_same_shape(p, m_[k], "adamw: param shape changed");
            S* pp = p.data();
            const S* pg = g.numel() == 0 ? nullptr : g.data();
            S* pm = m_[k].data();
            S* pv = v_[k].data();
            for (int64_t i = 0; i < p.numel(); ++i) {
                double gi = pg == nullptr ? 0.0 : double(pg[i]);
                double m = beta1_ * double(pm[i]) + (1.0 - beta1_) * gi;
                double v = beta2_ * double(pv[i]) + (1.0 - beta2_) * gi * gi;
                pm[i] = S(m);
                pv[i] = S(v);
                double mhat = m / bc1;
                double vhat = v / bc2;
                double upd = mhat / (std::sqrt(vhat) + eps_) + wd_ * double(pp[i]);
                pp[i] = S(double(pp[i]) - lr_ * upd);
            }
        }
    }

    int64_t steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_, wd_;
    int64_t t_ = 0;
    std::vector<Tensor<S>> m_, v_;
};

// Step-decay schedule: base rate, then base·0.1 from 90% of total steps on.
inline double lr_at(double base, int64_t step, int64_t total_steps) {
    int64_t boundary = (total_steps * 9 + 9) / 10;  // ceil(0.9·total)
    return step >= boundary ? base * 0.1 : base;
}

}  // namespace nervc
