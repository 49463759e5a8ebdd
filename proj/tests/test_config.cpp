#include <catch2/catch_amalgamated.hpp>

#include "nervc/config.hpp"

using namespace nervc;

TEST_CASE("defaults bind to a working hypernet config") {
    RunConfig rc;
    HypernetConfig h = rc.hypernet(4, 256, 256);
    CHECK(h.dim == 128);
    CHECK(h.nerv.frame_count == 4);
    CHECK(h.tokens.counts == std::vector<int64_t>{1, 1, 1, 1});
}

TEST_CASE("assignments override defaults") {
    RunConfig rc;
    rc.apply_text(
        "nerv.pe_dim = 8\n"
        "nerv.width = 8\n"
        "nerv.upscales = 2, 2, 2, 4\n"
        "nerv.kernels = 1,3,3,3\n"
        "hyper.patch = 16\n"
        "hyper.dim = 64\n"
        "hyper.layers = 2\n"
        "hyper.heads = 4\n"
        "hyper.ffn = 128\n"
        "hyper.dropout = 0.1\n"
        "hyper.token_mode = layer-adaptive\n"
        "hyper.tokens = 2, 8, 4, 0\n"
        "hyper.expand = in-channel\n"
        "hyper.normalize = false\n"
        "hyper.conv_init = no\n"
        "train.steps = 500\n"
        "train.batch = 4\n"
        "train.lr = 0.002\n"
        "train.seed = 9\n"
        "train.degradation = blur\n"
        "train.eval_every = 50\n");
    CHECK(rc.nerv.pe_dim == 8);
    CHECK((rc.nerv.upscales == std::vector<int64_t>{2, 2, 2, 4}));
    CHECK(rc.dim == 64);
    CHECK(rc.dropout == 0.1);
    CHECK(rc.token_mode == TokenMode::layer_adaptive);
    CHECK((rc.tokens == std::vector<int64_t>{2, 8, 4, 0}));
    CHECK(rc.expand == ExpandMode::in_channel);
    CHECK_FALSE(rc.normalize);
    CHECK_FALSE(rc.conv_init);
    CHECK(rc.train.steps == 500);
    CHECK(rc.train.batch == 4);
    CHECK(rc.train.lr == 0.002);
    CHECK(rc.train.seed == 9);
    CHECK(rc.train.degradation == Degrade::blur);
    CHECK(rc.train.eval_every == 50);
    HypernetConfig h = rc.hypernet(4, 32, 32);
    CHECK(h.tokens.param_count(h.nerv) == 2 * 8 + 8 * 72 + 4 * 72);
}

TEST_CASE("comments and blank lines are ignored") {
    RunConfig rc;
    rc.apply_text(
        "# a comment line\n"
        "\n"
        "   \n"
        "hyper.dim = 32   # trailing comment\n"
        "hyper.heads=2\n");
    CHECK(rc.dim == 32);
    CHECK(rc.heads == 2);
}

TEST_CASE("later assignments win") {
    RunConfig rc;
    rc.apply_text("hyper.dim = 32\nhyper.dim = 48\n");
    CHECK(rc.dim == 48);
    rc.set("hyper.dim", "64");
    CHECK(rc.dim == 64);
}

TEST_CASE("malformed input is diagnosed") {
    RunConfig rc;
    CHECK_THROWS(rc.apply_line("just words"));
    CHECK_THROWS(rc.set("hyper.unknown", "1"));
    CHECK_THROWS(rc.set("hyper.dim", "abc"));
    CHECK_THROWS(rc.set("hyper.dim", "12x"));
    CHECK_THROWS(rc.set("train.lr", "fast"));
    CHECK_THROWS(rc.set("hyper.normalize", "maybe"));
    CHECK_THROWS(rc.set("nerv.upscales", "2,,2"));
    CHECK_THROWS(rc.set("nerv.upscales", ""));
    CHECK_THROWS(rc.set("train.degradation", "rain"));
    CHECK_THROWS(rc.set("hyper.token_mode", "all"));
}

TEST_CASE("binding validates the combined geometry") {
    RunConfig rc;
    rc.apply_text("nerv.upscales = 2,2\nnerv.kernels = 1,3\nnerv.pe_dim = 4\nnerv.width = 4\n");
    CHECK_THROWS(rc.hypernet(2, 8, 8));  // patch 16 does not divide 4x4 frames
    rc.apply_text("hyper.patch = 2\nhyper.dim = 8\nhyper.heads = 2\nhyper.ffn = 16\n");
    HypernetConfig h = rc.hypernet(2, 4, 4);
    CHECK(h.patch_token_count() == 2 * 2 * 2);
    CHECK_THROWS(rc.hypernet(2, 8, 8));  // decoder output is 4x4
    NervConfig nc = rc.nerv_for(3);
    CHECK(nc.frame_count == 3);
    CHECK(nc.output_size() == 4);
}

TEST_CASE("token mode interacts with counts at binding time") {
    RunConfig rc;
    rc.apply_text(
        "nerv.upscales = 2,2\nnerv.kernels = 1,3\nnerv.pe_dim = 4\nnerv.width = 4\n"
        "hyper.patch = 2\nhyper.dim = 8\nhyper.heads = 2\nhyper.ffn = 16\n"
        "hyper.token_mode = uniform\nhyper.tokens = 2,2\n");
    CHECK_NOTHROW(rc.hypernet(2, 4, 4));
    rc.set("hyper.tokens", "2,4");
    CHECK_THROWS(rc.hypernet(2, 4, 4));  // uniform mode needs equal counts
    rc.set("hyper.token_mode", "layer-specific");
    rc.set("hyper.tokens", "0,4");
    CHECK_NOTHROW(rc.hypernet(2, 4, 4));
}
