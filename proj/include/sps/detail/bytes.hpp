// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/error.hpp"

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sps::detail {

// Little-endian writer over a growing byte buffer.
class ByteWriter {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void i32(std::int32_t v) { put(std::uint32_t(v), 4); }
    void i8(std::int8_t v) { buf_.push_back(std::uint8_t(v)); }

    std::vector<std::uint8_t>& buffer() { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    void put(std::uint64_t v, int n)
    {
        for (int i = 0; i < n; ++i) {
            buf_.push_back(std::uint8_t(v >> (8 * i)));
        }
    }
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    void expect(std::string_view magic)
    {
        need(magic.size());
        if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0) {
            throw FormatError("bad magic, expected \"" + std::string(magic) + "\"");
        }
        pos_ += magic.size();
    }
    std::uint8_t u8()
    {
        need(1);
        return data_[pos_++];
    }
    std::uint16_t u16() { return std::uint16_t(get(2)); }
    std::uint32_t u32() { return std::uint32_t(get(4)); }
    std::int32_t i32() { return std::int32_t(std::uint32_t(get(4))); }
    std::int8_t i8() { return std::int8_t(u8()); }

    std::span<const std::uint8_t> take(std::size_t n)
    {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (data_.size() - pos_ < n) {
            throw FormatError("truncated input at byte " + std::to_string(pos_));
        }
    }
    std::uint64_t get(int n)
    {
        need(std::size_t(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= std::uint64_t(data_[pos_++]) << (8 * i);
        }
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

// LSB-first bit packing.
class BitPacker {
public:
    void put(std::uint32_t value, unsigned bits)
    {
        for (unsigned b = 0; b < bits; ++b) {
            if (nbits_ % 8 == 0) {
                out_.push_back(0);
            }
            if ((value >> b) & 1u) {
                out_.back() |= std::uint8_t(1u << (nbits_ % 8));
            }
            ++nbits_;
        }
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
    std::size_t nbits_ = 0;
};

class BitUnpacker {
public:
    explicit BitUnpacker(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint32_t get(unsigned bits)
    {
        std::uint32_t v = 0;
        for (unsigned b = 0; b < bits; ++b, ++pos_) {
            if (pos_ / 8 >= data_.size()) {
                throw FormatError("bit stream exhausted");
            }
            v |= std::uint32_t((data_[pos_ / 8] >> (pos_ % 8)) & 1u) << b;
        }
        return v;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> data);

}  // namespace sps::detail
