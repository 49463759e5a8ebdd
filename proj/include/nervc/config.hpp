#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nervc/dataset.hpp"
#include "nervc/hypernet.hpp"
#include "nervc/nerv.hpp"
#include "nervc/tensor.hpp"
#include "nervc/training.hpp"

// Plain key=value run configuration shared by the CLI subcommands. Lines
// hold one assignment each; '#' starts a comment; later assignments win.

namespace nervc {

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline int64_t parse_i64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int64_t r = std::stoll(v, &pos);
        require(pos == v.size(), "config: bad integer for " + key + ": '" + v + "'");
        return r;
    } catch (const std::invalid_argument&) {
        fail("config: bad integer for " + key + ": '" + v + "'");
    } catch (const std::out_of_range&) {
        fail("config: integer out of range for " + key + ": '" + v + "'");
    }
}

inline double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        require(pos == v.size(), "config: bad number for " + key + ": '" + v + "'");
        return r;
    } catch (const std::invalid_argument&) {
        fail("config: bad number for " + key + ": '" + v + "'");
    } catch (const std::out_of_range&) {
        fail("config: number out of range for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    fail("config: bad boolean for " + key + ": '" + v + "'");
}

inline std::vector<int64_t> parse_i64_list(const std::string& key, const std::string& v) {
    std::vector<int64_t> out;
    size_t start = 0;
    while (start <= v.size()) {
        size_t comma = v.find(',', start);
        std::string item = trim(comma == std::string::npos ? v.substr(start) : v.substr(start, comma - start));
        require(!item.empty(), "config: empty list element for " + key);
        out.push_back(parse_i64(key, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    require(!out.empty(), "config: empty list for " + key);
    return out;
}

}  // namespace detail

struct RunConfig {
    NervConfig nerv;
    int64_t patch = 16;
    int64_t dim = 128;
    int64_t layers = 3;
    int64_t heads = 4;
    int64_t ffn = 256;
    double dropout = 0.0;
    TokenMode token_mode = TokenMode::layer_adaptive;
    std::vector<int64_t> tokens;  // per decoder layer; empty = one per layer
    ExpandMode expand = ExpandMode::out_channel;
    bool normalize = true;
    bool conv_init = true;
    TrainConfig train;

    void set(const std::string& key, const std::string& value) {
        using namespace detail;
        if (key == "nerv.pe_dim")
            nerv.pe_dim = parse_i64(key, value);
        else if (key == "nerv.pe_base")
            nerv.pe_base = parse_f64(key, value);
        else if (key == "nerv.upscales")
            nerv.upscales = parse_i64_list(key, value);
        else if (key == "nerv.kernels")
            nerv.kernels = parse_i64_list(key, value);
        else if (key == "nerv.width")
            nerv.width = parse_i64(key, value);
        else if (key == "hyper.patch")
            patch = parse_i64(key, value);
        else if (key == "hyper.dim")
            dim = parse_i64(key, value);
        else if (key == "hyper.layers")
            layers = parse_i64(key, value);
        else if (key == "hyper.heads")
            heads = parse_i64(key, value);
        else if (key == "hyper.ffn")
            ffn = parse_i64(key, value);
        else if (key == "hyper.dropout")
            dropout = parse_f64(key, value);
        else if (key == "hyper.token_mode")
            token_mode = parse_token_mode(value);
        else if (key == "hyper.tokens")
            tokens = parse_i64_list(key, value);
        else if (key == "hyper.expand")
            expand = parse_expand_mode(value);
        else if (key == "hyper.normalize")
            normalize = parse_bool(key, value);
        else if (key == "hyper.conv_init")
            conv_init = parse_bool(key, value);
        else if (key == "train.steps")
            train.steps = parse_i64(key, value);
        else if (key == "train.batch")
            train.batch = parse_i64(key, value);
        else if (key == "train.lr")
            train.lr = parse_f64(key, value);
        else if (key == "train.seed")
            train.seed = static_cast<uint64_t>(parse_i64(key, value));
        else if (key == "train.degradation")
            train.degradation = parse_degrade(value);
        else if (key == "train.eval_every")
            train.eval_every = parse_i64(key, value);
        else
            fail("config: unknown key '" + key + "'");
    }

    void apply_line(const std::string& line) {
        std::string s = line;
        size_t hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) return;
        size_t eq = s.find('=');
        require(eq != std::string::npos, "config: expected key=value, got '" + s + "'");
        set(detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    }

    void apply_text(const std::string& text) {
        size_t start = 0;
        while (start <= text.size()) {
            size_t nl = text.find('\n', start);
            apply_line(nl == std::string::npos ? text.substr(start) : text.substr(start, nl - start));
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
    }

    // Bind the run options to a concrete video geometry.
    HypernetConfig hypernet(int64_t frames, int64_t height, int64_t width) const {
        HypernetConfig h;
        h.nerv = nerv;
        h.nerv.frame_count = frames;
        std::vector<int64_t> counts =
            tokens.empty() ? std::vector<int64_t>(static_cast<size_t>(h.nerv.block_count()), 1) : tokens;
        h.tokens = TokenSpec{token_mode, counts};
        h.patch = patch;
        h.dim = dim;
        h.layers = layers;
        h.heads = heads;
        h.ffn = ffn;
        h.dropout = dropout;
        h.expand = expand;
        h.normalize = normalize;
        h.conv_init = conv_init;
        h.height = height;
        h.width = width;
        h.validate();
        return h;
    }

    NervConfig nerv_for(int64_t frames) const {
        NervConfig c = nerv;
        c.frame_count = frames;
        c.validate();
        return c;
    }
};

}  // namespace nervc
