#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eatrad/error.hpp"

namespace eatrad {

/// Ordered, uniquely named feature values.
class FeatureVector {
public:
    using Entry = std::pair<std::string, double>;

    void add(std::string name, double value) {
        if (find(name)) throw SpecError("duplicate feature name " + name);
        entries_.emplace_back(std::move(name), value);
    }

    void append(const FeatureVector& other, std::string_view prefix = {}) {
        for (const auto& [n, v] : other.entries_) add(std::string(prefix) + n, v);
    }

    [[nodiscard]] std::optional<double> find(std::string_view name) const {
        for (const auto& [n, v] : entries_) {
            if (n == name) return v;
        }
        return std::nullopt;
    }

    /// Throws ManifestError when absent.
    [[nodiscard]] double at(std::string_view name) const {
        auto v = find(name);
        if (!v) throw ManifestError("missing feature " + std::string(name));
        return *v;
    }

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
    [[nodiscard]] auto end() const noexcept { return entries_.end(); }

    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.first);
        return out;
    }

    [[nodiscard]] bool all_finite() const noexcept {
        for (const auto& e : entries_) {
            if (!std::isfinite(e.second)) return false;
        }
        return true;
    }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::vector<Entry> entries_;
};

}  // namespace eatrad
