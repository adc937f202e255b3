#pragma once

// Plain CSV: comma separated, no quoting, LF line ends. Lines starting with
// '#' are comments; our writers put the tool version and config hash there.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eatrad/error.hpp"
#include "eatrad/version.hpp"

namespace eatrad::csv {

/// Shortest text that parses back to the same double.
inline std::string format(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ManifestError(where + ": '" + std::string(s) + "' is not a number");
    return v;
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string provenance_line(const std::string& config_hash) {
    return std::string("# eatrad ") + kToolVersion + " config_hash=" + config_hash;
}

struct Table {
    std::vector<std::string> comments;  ///< without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name, const std::string& file) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw ManifestError(file + ": missing column '" + name + "'");
    }
    [[nodiscard]] bool has(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

inline Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            t.comments.push_back(line.substr(1));
            continue;
        }
        auto fields = split(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw ManifestError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw ManifestError(path.string() + ": no header line");
    return t;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ',';
        s += v[k];
    }
    return s;
}

/// Identifier-safe field check, since the dialect has no quoting.
inline void check_field(const std::string& s, const std::string& what) {
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw ManifestError(what + " '" + s + "' contains a comma or line break");
}

}  // namespace eatrad::csv
