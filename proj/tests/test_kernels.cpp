#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <functional>

#include "nervc/kernels.hpp"
#include "nervc/rng.hpp"

using namespace nervc;

namespace {

// Straightforward septuple-loop convolution used as the oracle.
Tensor<double> ref_conv2d(const Tensor<double>& input, const Tensor<double>& weight, const Tensor<double>* bias,
                          int64_t groups, int64_t padding) {
    int64_t B = input.dim(0), Cin = input.dim(1), H = input.dim(2), W = input.dim(3);
    int64_t Cout = weight.dim(0), Cg = weight.dim(1), K = weight.dim(2);
    Tensor<double> out({B, Cout, H, W});
    int64_t cin_g = Cin / groups, cout_g = Cout / groups;
    for (int64_t b = 0; b < B; ++b)
        for (int64_t oc = 0; oc < Cout; ++oc) {
            int64_t g = oc / cout_g;
            for (int64_t oy = 0; oy < H; ++oy)
                for (int64_t ox = 0; ox < W; ++ox) {
                    double acc = bias ? bias->data()[oc] : 0.0;
                    for (int64_t icg = 0; icg < Cg; ++icg)
                        for (int64_t ky = 0; ky < K; ++ky)
                            for (int64_t kx = 0; kx < K; ++kx) {
                                int64_t iy = oy + ky - padding, ix = ox + kx - padding;
                                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                int64_t ic = g * cin_g + icg;
                                acc += input.at(b, ic, iy, ix) * weight.at(oc, icg, ky, kx);
                            }
                    out.at(b, oc, oy, ox) = acc;
                }
        }
    return out;
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
    double s = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
    return s;
}

// Central finite differences of scalar(x) against the analytic gradient.
void fd_check(Tensor<double>& x, const std::function<double()>& scalar, const Tensor<double>& analytic,
              double h = 1e-5, double tol = 1e-6) {
    REQUIRE(analytic.shape() == x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) {
        double keep = x[i];
        x[i] = keep + h;
        double up = scalar();
        x[i] = keep - h;
        double dn = scalar();
        x[i] = keep;
        double fd = (up - dn) / (2.0 * h);
        double denom = std::max({1.0, std::abs(fd), std::abs(analytic[i])});
        INFO("element " << i << " fd " << fd << " analytic " << analytic[i]);
        CHECK(std::abs(fd - analytic[i]) / denom < tol);
    }
}

}  // namespace

TEST_CASE("matmul matches hand case") {
    Tensor<double> a = Tensor<double>::of({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor<double> b = Tensor<double>::of({3, 2}, {7, 8, 9, 10, 11, 12});
    Tensor<double> c = matmul(a, b);
    CHECK(c.at(0, 0) == 58.0);
    CHECK(c.at(0, 1) == 64.0);
    CHECK(c.at(1, 0) == 139.0);
    CHECK(c.at(1, 1) == 154.0);
}

TEST_CASE("matmul transposed variants agree with plain matmul") {
    Rng rng(5);
    Tensor<double> a = rng.uniform_tensor<double>({4, 6}, -1, 1);
    Tensor<double> b = rng.uniform_tensor<double>({6, 3}, -1, 1);
    Tensor<double> at({6, 4});
    for (int64_t i = 0; i < 4; ++i)
        for (int64_t j = 0; j < 6; ++j) at.at(j, i) = a.at(i, j);
    Tensor<double> bt({3, 6});
    for (int64_t i = 0; i < 6; ++i)
        for (int64_t j = 0; j < 3; ++j) bt.at(j, i) = b.at(i, j);
    Tensor<double> c = matmul(a, b);
    Tensor<double> c_tn = matmul_tn(at, b);
    Tensor<double> c_nt = matmul_nt(a, bt);
    for (int64_t i = 0; i < c.numel(); ++i) {
        CHECK(c[i] == Catch::Approx(c_tn[i]).epsilon(1e-12));
        CHECK(c[i] == Catch::Approx(c_nt[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d identity kernel passes input through") {
    Tensor<double> input = Tensor<double>::of({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor<double> weight = Tensor<double>::of({1, 1, 1, 1}, {1});
    Tensor<double> out = conv2d<double>(input, weight, nullptr, 1, 0);
    for (int64_t i = 0; i < 4; ++i) CHECK(out[i] == input[i]);
}

TEST_CASE("conv2d matches reference on varied shapes") {
    Rng rng(11);
    struct Case {
        int64_t B, Cin, Cout, H, K, G;
    };
    for (Case cs : {Case{1, 1, 1, 3, 3, 1}, Case{2, 4, 6, 5, 3, 1}, Case{1, 4, 8, 4, 1, 4}, Case{2, 6, 6, 5, 5, 3},
                    Case{1, 2, 4, 7, 3, 2}}) {
        Tensor<double> input = rng.uniform_tensor<double>({cs.B, cs.Cin, cs.H, cs.H}, -1, 1);
        Tensor<double> weight = rng.uniform_tensor<double>({cs.Cout, cs.Cin / cs.G, cs.K, cs.K}, -1, 1);
        Tensor<double> bias = rng.uniform_tensor<double>({cs.Cout}, -1, 1);
        int64_t pad = (cs.K - 1) / 2;
        Tensor<double> got = conv2d(input, weight, &bias, cs.G, pad);
        Tensor<double> want = ref_conv2d(input, weight, &bias, cs.G, pad);
        REQUIRE(got.shape() == want.shape());
        for (int64_t i = 0; i < got.numel(); ++i) CHECK(got[i] == Catch::Approx(want[i]).margin(1e-12));
    }
}

TEST_CASE("conv2d rejects bad shapes") {
    Tensor<double> input({1, 4, 3, 3});
    Tensor<double> weight({6, 2, 3, 3});
    CHECK_THROWS(conv2d<double>(input, weight, nullptr, 1, 1));   // Cin/groups mismatch
    CHECK_NOTHROW(conv2d<double>(input, weight, nullptr, 2, 1));  // groups=2: 4/2 == 2
    Tensor<double> bad_bias({5});
    CHECK_THROWS(conv2d(input, weight, &bad_bias, 2, 1));
}

TEST_CASE("conv2d backward matches finite differences") {
    Rng rng(13);
    for (int64_t G : {int64_t(1), int64_t(2)}) {
        Tensor<double> input = rng.uniform_tensor<double>({2, 4, 4, 4}, -1, 1);
        Tensor<double> weight = rng.uniform_tensor<double>({6, 4 / G, 3, 3}, -1, 1);
        Tensor<double> bias = rng.uniform_tensor<double>({6}, -1, 1);
        Tensor<double> ref = rng.uniform_tensor<double>({2, 6, 4, 4}, -1, 1);
        auto scalar = [&] { return dot(conv2d(input, weight, &bias, G, 1), ref); };
        Conv2dGrads<double> g = conv2d_backward(input, weight, ref, true, G, 1);
        fd_check(input, scalar, g.input);
        fd_check(weight, scalar, g.weight);
        fd_check(bias, scalar, g.bias);
    }
}

TEST_CASE("pixel shuffle rearranges depth to space") {
    // 4 channels, 1x1 -> 1 channel, 2x2 in channel-major scan order
    Tensor<double> x = Tensor<double>::of({1, 4, 1, 1}, {1, 2, 3, 4});
    Tensor<double> y = pixel_shuffle(x, 2);
    REQUIRE((y.shape() == Shape{1, 1, 2, 2}));
    CHECK(y.at(0, 0, 0, 0) == 1.0);
    CHECK(y.at(0, 0, 0, 1) == 2.0);
    CHECK(y.at(0, 0, 1, 0) == 3.0);
    CHECK(y.at(0, 0, 1, 1) == 4.0);
}

TEST_CASE("pixel shuffle keeps channel blocks contiguous") {
    Rng rng(17);
    Tensor<double> x = rng.uniform_tensor<double>({2, 8, 3, 3}, -1, 1);
    Tensor<double> y = pixel_shuffle(x, 2);
    REQUIRE((y.shape() == Shape{2, 2, 6, 6}));
    // output channel c at (sy*2+dy, sx*2+dx) reads input channel c*4 + dy*2 + dx
    for (int64_t b = 0; b < 2; ++b)
        for (int64_t c = 0; c < 2; ++c)
            for (int64_t sy = 0; sy < 3; ++sy)
                for (int64_t sx = 0; sx < 3; ++sx)
                    for (int64_t dy = 0; dy < 2; ++dy)
                        for (int64_t dx = 0; dx < 2; ++dx)
                            CHECK(y.at(b, c, sy * 2 + dy, sx * 2 + dx) == x.at(b, c * 4 + dy * 2 + dx, sy, sx));
}

TEST_CASE("pixel unshuffle inverts pixel shuffle") {
    Rng rng(19);
    Tensor<double> x = rng.uniform_tensor<double>({2, 12, 2, 2}, -1, 1);
    Tensor<double> y = pixel_unshuffle(pixel_shuffle(x, 2), 2);
    REQUIRE(y.shape() == x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("gelu matches the exact gaussian form") {
    CHECK(gelu_scalar(0.0) == 0.0);
    CHECK(gelu_scalar(1.0) == Catch::Approx(0.8413447460685429).epsilon(1e-12));
    CHECK(gelu_scalar(-1.0) == Catch::Approx(-0.15865525393145707).epsilon(1e-12));
    CHECK(gelu_scalar(3.0) == Catch::Approx(3.0 * 0.9986501019683699).epsilon(1e-10));
    Tensor<double> x = Tensor<double>::of({3}, {-2.0, 0.5, 2.0});
    Tensor<double> y = gelu(x);
    for (int64_t i = 0; i < 3; ++i) CHECK(y[i] == Catch::Approx(gelu_scalar(x[i])).epsilon(1e-14));
}

TEST_CASE("gelu gradient matches finite differences") {
    for (double v : {-2.0, -0.7, 0.0, 0.3, 1.5, 4.0}) {
        double h = 1e-6;
        double fd = (gelu_scalar(v + h) - gelu_scalar(v - h)) / (2.0 * h);
        CHECK(gelu_grad_scalar(v) == Catch::Approx(fd).margin(1e-8));
    }
}

TEST_CASE("softmax rows are distributions") {
    Rng rng(23);
    Tensor<double> x = rng.uniform_tensor<double>({4, 7}, -5, 5);
    Tensor<double> y = softmax(x, 1);
    for (int64_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < 7; ++j) {
            CHECK(y.at(i, j) > 0.0);
            s += y.at(i, j);
        }
        CHECK(s == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("softmax known two-element case") {
    Tensor<double> x = Tensor<double>::of({1, 2}, {0.0, 1.0});
    Tensor<double> y = softmax(x, 1);
    double e = std::exp(1.0);
    CHECK(y.at(0, 0) == Catch::Approx(1.0 / (1.0 + e)).epsilon(1e-12));
    CHECK(y.at(0, 1) == Catch::Approx(e / (1.0 + e)).epsilon(1e-12));
}

TEST_CASE("softmax is shift-invariant and overflow-safe") {
    Tensor<double> x = Tensor<double>::of({1, 3}, {1000.0, 1001.0, 999.0});
    Tensor<double> y = softmax(x, 1);
    Tensor<double> xs = Tensor<double>::of({1, 3}, {0.0, 1.0, -1.0});
    Tensor<double> ys = softmax(xs, 1);
    for (int64_t i = 0; i < 3; ++i) CHECK(y[i] == Catch::Approx(ys[i]).epsilon(1e-12));
}

TEST_CASE("softmax over the middle axis") {
    Rng rng(29);
    Tensor<double> x = rng.uniform_tensor<double>({2, 3, 4}, -2, 2);
    Tensor<double> y = softmax(x, 1);
    for (int64_t o = 0; o < 2; ++o)
        for (int64_t i = 0; i < 4; ++i) {
            double s = 0.0;
            for (int64_t j = 0; j < 3; ++j) s += y.at(o, j, i);
            CHECK(s == Catch::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("softmax backward matches finite differences") {
    Rng rng(31);
    Tensor<double> x = rng.uniform_tensor<double>({3, 5}, -2, 2);
    Tensor<double> ref = rng.uniform_tensor<double>({3, 5}, -1, 1);
    auto scalar = [&] { return dot(softmax(x, 1), ref); };
    Tensor<double> y = softmax(x, 1);
    Tensor<double> g = softmax_backward(y, ref, 1);
    fd_check(x, scalar, g);
}

TEST_CASE("layer_norm output has zero mean and unit variance") {
    Rng rng(37);
    Tensor<double> x = rng.uniform_tensor<double>({4, 9}, -3, 3);
    Tensor<double> gamma = Tensor<double>::full({9}, 1.0);
    Tensor<double> beta = Tensor<double>::zeros({9});
    Tensor<double> y = layer_norm(x, 1, gamma, beta, 1e-5);
    for (int64_t i = 0; i < 4; ++i) {
        double m = 0.0, v = 0.0;
        for (int64_t j = 0; j < 9; ++j) m += y.at(i, j);
        m /= 9.0;
        for (int64_t j = 0; j < 9; ++j) v += (y.at(i, j) - m) * (y.at(i, j) - m);
        v /= 9.0;
        CHECK(std::abs(m) < 1e-12);
        CHECK(v == Catch::Approx(1.0).epsilon(1e-4));  // eps shifts variance slightly below 1
    }
}

TEST_CASE("layer_norm applies affine parameters") {
    Tensor<double> x = Tensor<double>::of({1, 2}, {0.0, 2.0});
    Tensor<double> gamma = Tensor<double>::of({2}, {3.0, 3.0});
    Tensor<double> beta = Tensor<double>::of({2}, {0.5, 0.5});
    // mean 1, biased var 1 -> normalized {-1, 1} / sqrt(1+eps)
    Tensor<double> y = layer_norm(x, 1, gamma, beta, 1e-5);
    double inv = 1.0 / std::sqrt(1.0 + 1e-5);
    CHECK(y.at(0, 0) == Catch::Approx(-3.0 * inv + 0.5).epsilon(1e-12));
    CHECK(y.at(0, 1) == Catch::Approx(3.0 * inv + 0.5).epsilon(1e-12));
}

TEST_CASE("layer_norm backward matches finite differences") {
    Rng rng(41);
    Tensor<double> x = rng.uniform_tensor<double>({3, 6}, -2, 2);
    Tensor<double> gamma = rng.uniform_tensor<double>({6}, 0.5, 1.5);
    Tensor<double> beta = rng.uniform_tensor<double>({6}, -0.5, 0.5);
    Tensor<double> ref = rng.uniform_tensor<double>({3, 6}, -1, 1);
    auto scalar = [&] { return dot(layer_norm(x, 1, gamma, beta, 1e-5), ref); };
    LayerNormGrads<double> g = layer_norm_backward(x, 1, gamma, ref, 1e-5);
    fd_check(x, scalar, g.input, 1e-5, 1e-5);
    fd_check(gamma, scalar, g.gamma, 1e-5, 1e-5);
    // beta gradient is the per-feature sum of upstream grads
    Tensor<double> want_beta({6});
    for (int64_t i = 0; i < 3; ++i)
        for (int64_t j = 0; j < 6; ++j) want_beta[j] += ref.at(i, j);
    for (int64_t j = 0; j < 6; ++j) CHECK(g.beta[j] == Catch::Approx(want_beta[j]).epsilon(1e-12));
}

TEST_CASE("l2_normalize_rows produces unit rows") {
    Rng rng(43);
    Tensor<double> x = rng.uniform_tensor<double>({5, 8}, -2, 2);
    Tensor<double> y = l2_normalize_rows(x, 1e-8);
    for (int64_t i = 0; i < 5; ++i) {
        double n = 0.0;
        for (int64_t j = 0; j < 8; ++j) n += y.at(i, j) * y.at(i, j);
        CHECK(std::sqrt(n) == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("l2_normalize_rows clamps tiny norms") {
    Tensor<double> x = Tensor<double>::of({1, 2}, {1e-12, 0.0});
    Tensor<double> y = l2_normalize_rows(x, 1e-8);
    CHECK(y.at(0, 0) == Catch::Approx(1e-12 / 1e-8).epsilon(1e-12));
    CHECK(y.at(0, 1) == 0.0);
}

TEST_CASE("l2_normalize_rows backward matches finite differences") {
    Rng rng(47);
    Tensor<double> x = rng.uniform_tensor<double>({4, 6}, 0.5, 2.0);
    Tensor<double> ref = rng.uniform_tensor<double>({4, 6}, -1, 1);
    auto scalar = [&] { return dot(l2_normalize_rows(x, 1e-8), ref); };
    Tensor<double> g = l2_normalize_rows_backward(x, ref, 1e-8);
    fd_check(x, scalar, g);
}

TEST_CASE("dropout mask values and scale") {
    Rng rng(53);
    Tensor<double> m = dropout_mask<double>({10000}, 0.25, rng);
    int64_t kept = 0;
    for (int64_t i = 0; i < m.numel(); ++i) {
        bool zero = m[i] == 0.0;
        bool scaled = std::abs(m[i] - 1.0 / 0.75) < 1e-12;
        CHECK((zero || scaled));
        kept += scaled ? 1 : 0;
    }
    CHECK(kept > 7200);
    CHECK(kept < 7800);
    Rng rng2(53);
    Tensor<double> m2 = dropout_mask<double>({10000}, 0.25, rng2);
    for (int64_t i = 0; i < m.numel(); ++i) CHECK(m[i] == m2[i]);
}

TEST_CASE("mse and clamp01") {
    Tensor<double> a = Tensor<double>::of({4}, {0.0, 0.5, 1.0, 2.0});
    Tensor<double> b = Tensor<double>::of({4}, {0.0, 0.0, 1.0, 2.0});
    CHECK(mse(a, b) == Catch::Approx(0.0625).epsilon(1e-14));
    Tensor<double> c = clamp01(a);
    CHECK(c[3] == 1.0);
    Tensor<double> d = Tensor<double>::of({1}, {-0.5});
    CHECK(clamp01(d)[0] == 0.0);
}
