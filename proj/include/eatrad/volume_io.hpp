#pragma once

// RVOL / RMSK on-disk formats.
//
//   RVOL1 nx ny nz sx sy sz ox oy oz\n  + nx*ny*nz little-endian int16
//   RMSK1 nx ny nz sx sy sz ox oy oz\n  + nx*ny*nz bytes, each 0x00 or 0x01
//
// Header fields are separated by exactly one space. Reals are written in
// shortest round-trip form so a write/read cycle is bit-exact.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "eatrad/error.hpp"
#include "eatrad/volume.hpp"

namespace eatrad {

namespace io_detail {

inline constexpr std::size_t kMaxHeader = 1024;

inline std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw IoError("cannot format real");
    return {buf.data(), end};
}

inline std::string header(std::string_view magic, const Grid& g) {
    std::string h(magic);
    for (auto d : g.dims) h += ' ' + std::to_string(d);
    for (auto s : g.spacing) h += ' ' + format_real(s);
    for (auto o : g.origin) h += ' ' + format_real(o);
    h += '\n';
    return h;
}

inline std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

/// Parses the header; returns the grid and sets `payload_offset`.
inline Grid parse_header(const std::vector<unsigned char>& bytes, std::string_view magic,
                         std::size_t& payload_offset) {
    for (std::size_t i = 0; i < magic.size(); ++i) {
        if (i >= bytes.size() || bytes[i] != static_cast<unsigned char>(magic[i])) {
            throw FormatError("bad magic, expected " + std::string(magic), i);
        }
    }
    const std::size_t limit = std::min(bytes.size(), kMaxHeader);
    std::size_t eol = magic.size();
    while (eol < limit && bytes[eol] != '\n') ++eol;
    if (eol >= limit) throw FormatError("header line not terminated", eol);

    const char* base = reinterpret_cast<const char*>(bytes.data());
    std::size_t pos = magic.size();
    auto next_token = [&](const char* what) -> std::pair<std::size_t, std::size_t> {
        if (pos >= eol || bytes[pos] != ' ') throw FormatError(std::string("expected space before ") + what, pos);
        ++pos;
        const std::size_t start = pos;
        while (pos < eol && bytes[pos] != ' ') ++pos;
        if (pos == start) throw FormatError(std::string("empty field ") + what, start);
        return {start, pos};
    };

    Grid g;
    for (int a = 0; a < 3; ++a) {
        auto [s, e] = next_token("dimension");
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(base + s, base + e, v);
        if (ec != std::errc{} || p != base + e || v == 0) throw FormatError("invalid dimension", s);
        g.dims[a] = v;
    }
    constexpr std::size_t kMaxVoxels = std::size_t{1} << 40;
    if (g.dims[0] > kMaxVoxels / g.dims[1] || g.dims[0] * g.dims[1] > kMaxVoxels / g.dims[2]) {
        throw FormatError("dimensions too large", magic.size());
    }
    for (int k = 0; k < 6; ++k) {
        auto [s, e] = next_token("real");
        double v = 0;
        auto [p, ec] = std::from_chars(base + s, base + e, v);
        if (ec != std::errc{} || p != base + e || !std::isfinite(v)) throw FormatError("invalid real", s);
        if (k < 3) {
            if (!(v > 0.0)) throw FormatError("spacing must be positive", s);
            g.spacing[k] = v;
        } else {
            g.origin[k - 3] = v;
        }
    }
    if (pos != eol) throw FormatError("trailing header content", pos);
    payload_offset = eol + 1;
    return g;
}

inline void check_payload(std::size_t have, std::size_t need, std::size_t offset) {
    if (have < need) throw TruncationError(need, have);
    if (have > need) throw FormatError("trailing bytes after payload", offset + need);
}

}  // namespace io_detail

/// Counters reported while ingesting a volume.
struct IngestStats {
    std::size_t clamped_voxels = 0;
};

/// Decodes an in-memory RVOL image; HU outside the CT range is clamped.
inline Volume decode_volume(const std::vector<unsigned char>& bytes, IngestStats* stats = nullptr) {
    std::size_t off = 0;
    const Grid g = io_detail::parse_header(bytes, "RVOL1", off);
    const std::size_t n = g.size();
    io_detail::check_payload(bytes.size() - off, n * 2, off);
    std::vector<std::int16_t> vox(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto lo = static_cast<std::uint16_t>(bytes[off + 2 * i]);
        const auto hi = static_cast<std::uint16_t>(bytes[off + 2 * i + 1]);
        vox[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
    }
    std::size_t clamped = 0;
    auto v = Volume::clamped(g, std::move(vox), &clamped);
    if (stats) stats->clamped_voxels = clamped;
    return v;
}

inline std::vector<unsigned char> encode_volume(const Volume& v) {
    const auto head = io_detail::header("RVOL1", v.grid());
    const auto vox = v.voxels();
    std::vector<unsigned char> out(head.begin(), head.end());
    out.reserve(head.size() + vox.size() * 2);
    for (auto h : vox) {
        const auto u = static_cast<std::uint16_t>(h);
        out.push_back(static_cast<unsigned char>(u & 0xFF));
        out.push_back(static_cast<unsigned char>(u >> 8));
    }
    return out;
}

inline Mask decode_mask(const std::vector<unsigned char>& bytes) {
    std::size_t off = 0;
    const Grid g = io_detail::parse_header(bytes, "RMSK1", off);
    const std::size_t n = g.size();
    io_detail::check_payload(bytes.size() - off, n, off);
    std::vector<std::uint8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = bytes[off + i];
        if (b > 1) throw FormatError("mask byte must be 0x00 or 0x01", off + i);
        bits[i] = b;
    }
    return Mask(g, std::move(bits));
}

inline std::vector<unsigned char> encode_mask(const Mask& m) {
    const auto head = io_detail::header("RMSK1", m.grid());
    const auto bits = m.bits();
    std::vector<unsigned char> out(head.begin(), head.end());
    out.insert(out.end(), bits.begin(), bits.end());
    return out;
}

inline Volume read_volume(const std::filesystem::path& path, IngestStats* stats = nullptr) {
    return decode_volume(io_detail::slurp(path), stats);
}

inline void write_volume(const Volume& v, const std::filesystem::path& path) {
    io_detail::spit(path, encode_volume(v));
}

inline Mask read_mask(const std::filesystem::path& path) { return decode_mask(io_detail::slurp(path)); }

inline void write_mask(const Mask& m, const std::filesystem::path& path) { io_detail::spit(path, encode_mask(m)); }

}  // namespace eatrad
