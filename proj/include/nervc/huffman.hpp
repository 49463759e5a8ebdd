#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "nervc/tensor.hpp"

// Canonical Huffman coder. Only code lengths are stored; codes are assigned
// shorter lengths first, ties broken by symbol value. Bits are packed
// MSB-first. A single-symbol alphabet gets code length 1.

namespace nervc {

struct HuffmanTable {
    std::vector<uint8_t> lengths;  // indexed by symbol, 0 = absent

    // canonical assignment, derived from lengths
    std::vector<uint32_t> codes;
    std::vector<uint16_t> sorted_symbols;  // by (length, symbol)
    std::vector<int32_t> first_code;       // per length 1..max_len
    std::vector<int32_t> sym_base;
    int max_len = 0;

    void finalize() {
        size_t n = lengths.size();
        codes.assign(n, 0);
        sorted_symbols.clear();
        max_len = 0;
        double kraft = 0;
        for (size_t s = 0; s < n; ++s)
            if (lengths[s] > 0) {
                sorted_symbols.push_back(static_cast<uint16_t>(s));
                max_len = std::max<int>(max_len, lengths[s]);
                kraft += std::ldexp(1.0, -lengths[s]);
            }
        require(kraft <= 1.0 + 1e-9, "huffman: code lengths violate the Kraft inequality");
        std::sort(sorted_symbols.begin(), sorted_symbols.end(), [&](uint16_t a, uint16_t b) {
            if (lengths[a] != lengths[b]) return lengths[a] < lengths[b];
            return a < b;
        });
        std::vector<int64_t> counts(static_cast<size_t>(max_len) + 1, 0);
        for (uint16_t s : sorted_symbols) ++counts[lengths[s]];
        first_code.assign(static_cast<size_t>(max_len) + 2, 0);
        sym_base.assign(static_cast<size_t>(max_len) + 2, 0);
        int64_t code = 0;
        for (int len = 1; len <= max_len + 1; ++len) {
            int64_t shorter = len >= 2 ? counts[static_cast<size_t>(len) - 1] : 0;
            code = (code + shorter) << 1;
            first_code[static_cast<size_t>(len)] = static_cast<int32_t>(code);
            sym_base[static_cast<size_t>(len)] = sym_base[static_cast<size_t>(len) - 1] + shorter;
        }
        std::vector<int64_t> next(first_code.begin(), first_code.end());
        for (uint16_t s : sorted_symbols) {
            int len = lengths[s];
            int64_t c = next[static_cast<size_t>(len)]++;
            require(c < (int64_t(1) << len), "huffman: canonical codes overflow their length");
            codes[s] = static_cast<uint32_t>(c);
        }
    }
};

inline HuffmanTable huffman_build(const std::vector<int64_t>& histogram) {
    HuffmanTable t;
    t.lengths.assign(histogram.size(), 0);
    std::vector<size_t> present;
    for (size_t s = 0; s < histogram.size(); ++s) {
        require(histogram[s] >= 0, "huffman: negative count");
        if (histogram[s] > 0) present.push_back(s);
    }
    if (present.empty()) {
        t.finalize();
        return t;
    }
    if (present.size() == 1) {
        t.lengths[present[0]] = 1;
        t.finalize();
        return t;
    }
    struct Node {
        int64_t weight;
        int64_t order;  // creation order, the deterministic tie-break
        int32_t left, right;
    };
    std::vector<Node> nodes;
    auto cmp = [&](int32_t a, int32_t b) {
        if (nodes[static_cast<size_t>(a)].weight != nodes[static_cast<size_t>(b)].weight)
            return nodes[static_cast<size_t>(a)].weight > nodes[static_cast<size_t>(b)].weight;
        return nodes[static_cast<size_t>(a)].order > nodes[static_cast<size_t>(b)].order;
    };
    std::priority_queue<int32_t, std::vector<int32_t>, decltype(cmp)> pq(cmp);
    for (size_t s : present) {
        nodes.push_back({histogram[s], static_cast<int64_t>(nodes.size()), -1, -1});
        pq.push(static_cast<int32_t>(nodes.size() - 1));
    }
    std::vector<size_t> leaf_symbol(present);  // node index -> symbol, for leaves
    while (pq.size() > 1) {
        int32_t a = pq.top();
        pq.pop();
        int32_t b = pq.top();
        pq.pop();
        nodes.push_back({nodes[static_cast<size_t>(a)].weight + nodes[static_cast<size_t>(b)].weight,
                         static_cast<int64_t>(nodes.size()), a, b});
        pq.push(static_cast<int32_t>(nodes.size() - 1));
    }
    // depth-first walk assigns leaf depths = code lengths
    std::vector<std::pair<int32_t, int>> stack{{pq.top(), 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        const Node& nd = nodes[static_cast<size_t>(id)];
        if (nd.left < 0) {
            require(depth <= 255, "huffman: code length exceeds 255 bits");
            t.lengths[leaf_symbol[static_cast<size_t>(id)]] = static_cast<uint8_t>(depth);
        } else {
            stack.push_back({nd.left, depth + 1});
            stack.push_back({nd.right, depth + 1});
        }
    }
    t.finalize();
    return t;
}

struct Bitstream {
    std::vector<uint8_t> bytes;
    int64_t bit_count = 0;
};

inline Bitstream huffman_encode(const std::vector<uint16_t>& symbols, const HuffmanTable& t) {
    Bitstream out;
    for (uint16_t s : symbols) {
        require(s < t.lengths.size() && t.lengths[s] > 0, "huffman: symbol " + std::to_string(s) + " not in table");
        uint32_t code = t.codes[s];
        for (int b = t.lengths[s] - 1; b >= 0; --b) {
            if (out.bit_count % 8 == 0) out.bytes.push_back(0);
            if ((code >> b) & 1u) out.bytes.back() |= static_cast<uint8_t>(0x80u >> (out.bit_count % 8));
            ++out.bit_count;
        }
    }
    return out;
}

inline std::vector<uint16_t> huffman_decode(const uint8_t* data, int64_t payload_bits, const HuffmanTable& t,
                                            int64_t count) {
    std::vector<uint16_t> out;
    out.reserve(static_cast<size_t>(count));
    int64_t pos = 0;
    while (static_cast<int64_t>(out.size()) < count) {
        int32_t code = 0;
        int len = 0;
        for (;;) {
            require(pos < payload_bits, "huffman: payload ends mid-code (corrupt data)");
            int bit = (data[pos / 8] >> (7 - pos % 8)) & 1;
            ++pos;
            code = (code << 1) | bit;
            ++len;
            require(len <= t.max_len, "huffman: no code matches (corrupt data)");
            int32_t off = code - t.first_code[static_cast<size_t>(len)];
            int32_t n_at_len = t.sym_base[static_cast<size_t>(len) + 1] - t.sym_base[static_cast<size_t>(len)];
            if (off >= 0 && off < n_at_len) {
                out.push_back(t.sorted_symbols[static_cast<size_t>(t.sym_base[static_cast<size_t>(len)] + off)]);
                break;
            }
        }
    }
    return out;
}

// Shannon entropy in bits/symbol of a histogram; 0 for degenerate inputs.
inline double histogram_entropy(const std::vector<int64_t>& histogram) {
    int64_t total = 0;
    for (int64_t c : histogram) total += c;
    if (total == 0) return 0;
    double h = 0;
    for (int64_t c : histogram)
        if (c > 0) {
            double p = double(c) / double(total);
            h -= p * std::log2(p);
        }
    return h;
}

}  // namespace nervc
