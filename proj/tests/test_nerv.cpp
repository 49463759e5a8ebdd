#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nervc/nerv.hpp"
#include "nervc/rng.hpp"

using namespace nervc;

namespace {

constexpr double kPi = 3.14159265358979323846;

NervConfig tiny_config() {
    NervConfig c;
    c.pe_dim = 4;
    c.width = 4;
    c.upscales = {2, 2};
    c.kernels = {1, 3};
    c.frame_count = 3;
    c.validate();
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    NervConfig c = tiny_config();
    CHECK(c.block_count() == 2);
    CHECK(c.output_size() == 4);
    c.kernels = {1};
    CHECK_THROWS(c.validate());
    c = tiny_config();
    c.pe_dim = 3;  // embedding pairs sin/cos entries
    CHECK_THROWS(c.validate());
    c = tiny_config();
    c.kernels = {1, 4};  // even kernels cannot center
    CHECK_THROWS(c.validate());
    c = tiny_config();
    c.upscales = {0, 2};
    CHECK_THROWS(c.validate());
}

TEST_CASE("layer channel arithmetic") {
    NervConfig c = tiny_config();
    CHECK(c.c_in(0) == 4);
    CHECK(c.c_out(0) == 4 * 2 * 2);   // width * S0^2
    CHECK(c.c_in(1) == 4);
    CHECK(c.c_out(1) == 3 * 2 * 2);   // out_channels * S1^2
    CHECK((c.kernel_shape(0) == Shape{16, 4, 1, 1}));
    CHECK((c.kernel_shape(1) == Shape{12, 4, 3, 3}));
    CHECK((c.bias_shape(1) == Shape{12}));
    CHECK(c.param_count() == 16 * 4 + 16 + 12 * 4 * 9 + 12);
}

TEST_CASE("desk configuration shape walk") {
    NervConfig c;
    c.pe_dim = 8;
    c.width = 8;
    c.upscales = {2, 2, 2, 4};
    c.kernels = {1, 3, 3, 3};
    c.frame_count = 4;
    c.validate();
    CHECK(c.output_size() == 32);
    CHECK(shape_numel(c.kernel_shape(0)) == 32 * 8);          // 256
    CHECK(shape_numel(c.kernel_shape(1)) == 32 * 8 * 9);      // 2304
    CHECK(shape_numel(c.kernel_shape(2)) == 32 * 8 * 9);      // 2304
    CHECK(shape_numel(c.kernel_shape(3)) == 48 * 8 * 9);      // 3456
}

TEST_CASE("time embedding for a single frame video") {
    Tensor<double> e = time_embedding<double>(0, 1, 6, 1.25);
    REQUIRE(e.numel() == 6);
    for (int64_t j = 0; j < 3; ++j) {
        CHECK(e[2 * j] == 0.0);      // sin(0)
        CHECK(e[2 * j + 1] == 1.0);  // cos(0)
    }
}

TEST_CASE("time embedding interleaves growing frequencies") {
    const int64_t T = 5, t = 3;
    const double base = 1.25;
    Tensor<double> e = time_embedding<double>(t, T, 8, base);
    double tn = 2.0 * double(t) / double(T - 1) - 1.0;
    double freq = 1.0;
    for (int64_t j = 0; j < 4; ++j) {
        CHECK(e[2 * j] == Catch::Approx(std::sin(kPi * freq * tn)).margin(1e-12));
        CHECK(e[2 * j + 1] == Catch::Approx(std::cos(kPi * freq * tn)).margin(1e-12));
        freq *= base;
    }
}

TEST_CASE("time embedding endpoint mapping") {
    Tensor<double> lo = time_embedding<double>(0, 4, 2, 2.0);
    Tensor<double> hi = time_embedding<double>(3, 4, 2, 2.0);
    CHECK(lo[0] == Catch::Approx(std::sin(-kPi)).margin(1e-12));
    CHECK(lo[1] == Catch::Approx(std::cos(-kPi)).margin(1e-12));
    CHECK(hi[0] == Catch::Approx(std::sin(kPi)).margin(1e-12));
    CHECK(hi[1] == Catch::Approx(std::cos(kPi)).margin(1e-12));
}

TEST_CASE("zero weights decode to the output bias") {
    NervConfig c = tiny_config();
    NervWeights<double> w;
    for (int64_t l = 0; l < c.block_count(); ++l) {
        w.kernels.emplace_back(c.kernel_shape(l));
        w.biases.emplace_back(c.bias_shape(l));
    }
    Tensor<double> frame = nerv_forward(c, w, 0);
    REQUIRE((frame.shape() == Shape{3, 4, 4}));
    for (int64_t i = 0; i < frame.numel(); ++i) CHECK(frame[i] == 0.5);
}

TEST_CASE("single block forward matches a hand computation") {
    NervConfig c;
    c.pe_dim = 2;
    c.width = 1;  // unused by a single block
    c.upscales = {2};
    c.kernels = {1};
    c.frame_count = 4;
    c.validate();
    REQUIRE(c.c_out(0) == 12);
    Rng rng(3);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    for (int64_t i = 0; i < 12; ++i) w.biases[0][i] = 0.01 * double(i);
    const int64_t t = 2;
    Tensor<double> frame = nerv_forward(c, w, t);
    Tensor<double> e = time_embedding<double>(t, 4, 2, c.pe_base);
    // last (only) block: conv 1x1, no activation, pixel shuffle by 2, +0.5, clamp
    for (int64_t ch = 0; ch < 3; ++ch)
        for (int64_t dy = 0; dy < 2; ++dy)
            for (int64_t dx = 0; dx < 2; ++dx) {
                int64_t oc = ch * 4 + dy * 2 + dx;
                double v = w.biases[0][oc];
                for (int64_t ic = 0; ic < 2; ++ic) v += w.kernels[0].at(oc, ic, 0, 0) * e[ic];
                v += 0.5;
                v = std::min(1.0, std::max(0.0, v));
                CHECK(frame.at(ch, dy, dx) == Catch::Approx(v).margin(1e-12));
            }
}

TEST_CASE("intermediate blocks apply gelu, the last does not") {
    NervConfig c = tiny_config();
    Rng rng(5);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    for (auto& b : w.biases) b.fill(0.25);
    Tensor<double> frame = nerv_forward(c, w, 1);
    // reimplementation: embed -> conv1x1 -> shuffle -> gelu -> conv3x3 -> shuffle -> +0.5
    Tensor<double> e = time_embedding<double>(1, c.frame_count, c.pe_dim, c.pe_base);
    Tensor<double> x = e.reshaped({1, c.pe_dim, 1, 1});
    x = conv2d(x, w.kernels[0], &w.biases[0], 1, 0);
    x = pixel_shuffle(x, 2);
    x = gelu(x);
    x = conv2d(x, w.kernels[1], &w.biases[1], 1, 1);
    x = pixel_shuffle(x, 2);
    for (int64_t i = 0; i < frame.numel(); ++i) {
        double v = std::min(1.0, std::max(0.0, x[i] + 0.5));
        CHECK(frame[i] == Catch::Approx(v).margin(1e-12));
    }
}

TEST_CASE("forward output is clamped to the unit interval") {
    NervConfig c = tiny_config();
    Rng rng(7);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    for (auto& k : w.kernels)
        for (int64_t i = 0; i < k.numel(); ++i) k[i] *= 50.0;
    Tensor<double> frame = nerv_forward(c, w, 0);
    for (int64_t i = 0; i < frame.numel(); ++i) {
        CHECK(frame[i] >= 0.0);
        CHECK(frame[i] <= 1.0);
    }
}

TEST_CASE("graph forward matches direct forward after clamping") {
    NervConfig c = tiny_config();
    Rng rng(9);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    Tape<double> tape;
    std::vector<Value<double>> ks, bs;
    for (auto& k : w.kernels) ks.push_back(tape.leaf(k, false));
    for (auto& b : w.biases) bs.push_back(tape.leaf(b, false));
    Value<double> batch = nerv_forward_ad(tape, c, ks, bs, {0, 1, 2});
    REQUIRE((batch.shape() == Shape{3, 3, 4, 4}));
    for (int64_t t = 0; t < 3; ++t) {
        Tensor<double> direct = nerv_forward(c, w, t);
        for (int64_t i = 0; i < direct.numel(); ++i) {
            double raw = batch.val()[t * direct.numel() + i];
            double clamped = std::min(1.0, std::max(0.0, raw));
            CHECK(direct[i] == Catch::Approx(clamped).margin(1e-12));
        }
    }
}

TEST_CASE("decode_video stacks per-frame forwards") {
    NervConfig c = tiny_config();
    Rng rng(13);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    Tensor<double> video = decode_video(c, w);
    REQUIRE((video.shape() == Shape{3, 3, 4, 4}));
    for (int64_t t = 0; t < 3; ++t) {
        Tensor<double> frame = nerv_forward(c, w, t);
        for (int64_t i = 0; i < frame.numel(); ++i) CHECK(video[t * frame.numel() + i] == frame[i]);
    }
}

TEST_CASE("initialization bounds follow fan-in") {
    NervConfig c = tiny_config();
    Rng rng(15);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    for (int64_t l = 0; l < c.block_count(); ++l) {
        double bound = 1.0 / std::sqrt(double(c.c_in(l) * c.kernel(l) * c.kernel(l)));
        for (int64_t i = 0; i < w.kernels[l].numel(); ++i) {
            CHECK(w.kernels[l][i] >= -bound);
            CHECK(w.kernels[l][i] < bound);
        }
        for (int64_t i = 0; i < w.biases[l].numel(); ++i) CHECK(w.biases[l][i] == 0.0);
    }
}

TEST_CASE("weights validate against their config") {
    NervConfig c = tiny_config();
    Rng rng(17);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    CHECK_NOTHROW(w.validate(c));
    w.kernels[0] = Tensor<double>({3, 3});
    CHECK_THROWS(w.validate(c));
}

TEST_CASE("frame index bounds are enforced") {
    NervConfig c = tiny_config();
    Rng rng(19);
    NervWeights<double> w = init_nerv_weights<double>(c, rng);
    CHECK_THROWS(nerv_forward(c, w, -1));
    CHECK_THROWS(nerv_forward(c, w, 3));
}
