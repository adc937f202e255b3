#pragma once

// Little-endian byte buffers for model persistence. Doubles travel as their
// IEEE-754 bit patterns, so a save/load cycle is bit-exact.

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "eatrad/error.hpp"

namespace eatrad {

class BlobWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void f64s(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
    void raw(const std::vector<std::uint8_t>& b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

    [[nodiscard]] const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class BlobReader {
public:
    BlobReader(const std::uint8_t* data, std::size_t size, std::size_t base_offset = 0)
        : data_(data), size_(size), base_(base_offset) {}
    explicit BlobReader(const std::vector<std::uint8_t>& b) : BlobReader(b.data(), b.size()) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * k);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * k);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = length(1);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    std::vector<double> f64s() {
        const auto n = length(8);
        std::vector<double> v(n);
        for (auto& d : v) d = f64();
        return v;
    }
    std::vector<std::uint8_t> raw(std::size_t n) {
        need(n);
        std::vector<std::uint8_t> out(data_ + pos_, data_ + pos_ + n);
        pos_ += n;
        return out;
    }
    /// Reads a u64 element count and checks that `elem` bytes per element remain.
    std::size_t length(std::size_t elem) {
        const auto n = u64();
        if (elem != 0 && n > (size_ - pos_) / elem) throw FormatError("length field exceeds remaining bytes", offset());
        return static_cast<std::size_t>(n);
    }

    [[nodiscard]] bool done() const noexcept { return pos_ == size_; }
    [[nodiscard]] std::size_t offset() const noexcept { return base_ + pos_; }
    [[nodiscard]] std::size_t remaining() const noexcept { return size_ - pos_; }

private:
    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw FormatError("unexpected end of model data", offset());
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

}  // namespace eatrad
