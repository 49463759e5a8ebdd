#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "nervc/tensor.hpp"

// Little-endian byte packing and whole-file helpers for the binary formats.

namespace nervc {

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v));
        buf_.push_back(static_cast<uint8_t>(v >> 8));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void bytes(const void* p, size_t n) {
        const uint8_t* b = static_cast<const uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void magic(const char (&m)[5]) { bytes(m, 4); }

    const std::vector<uint8_t>& data() const { return buf_; }
    size_t size() const { return buf_.size(); }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const uint8_t* p, size_t n) : p_(p), n_(n) {}
    explicit ByteReader(const std::vector<uint8_t>& v) : p_(v.data()), n_(v.size()) {}

    uint8_t u8() {
        need(1);
        return p_[pos_++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p_[pos_] | (p_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p_[pos_ + static_cast<size_t>(i)]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    const uint8_t* raw(size_t n) {
        need(n);
        const uint8_t* p = p_ + pos_;
        pos_ += n;
        return p;
    }
    void expect_magic(const char (&m)[5], const std::string& what) {
        need(4);
        if (std::memcmp(p_ + pos_, m, 4) != 0) fail(what + ": bad magic");
        pos_ += 4;
    }
    size_t remaining() const { return n_ - pos_; }

private:
    void need(size_t n) const {
        if (pos_ + n > n_) fail("truncated file (wanted " + std::to_string(n) + " more bytes)");
    }
    const uint8_t* p_;
    size_t n_;
    size_t pos_ = 0;
};

inline std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("cannot open " + path);
    f.seekg(0, std::ios::end);
    std::streamoff len = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> buf(static_cast<size_t>(len));
    if (len > 0) f.read(reinterpret_cast<char*>(buf.data()), len);
    if (!f) fail("read failed on " + path);
    return buf;
}

// Writes via a temp file then renames, so failures leave no partial output.
inline void write_file(const std::string& path, const void* data, size_t n) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail("cannot create " + tmp);
        if (n > 0) f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!f) {
            f.close();
            std::remove(tmp.c_str());
            fail("write failed on " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        fail("cannot move " + tmp + " to " + path);
    }
}

inline void write_file(const std::string& path, const ByteWriter& w) {
    write_file(path, w.data().data(), w.size());
}

}  // namespace nervc
