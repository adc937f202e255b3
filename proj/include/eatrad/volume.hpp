#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eatrad/error.hpp"

namespace eatrad {

inline constexpr std::int16_t kMinHu = -1024;
inline constexpr std::int16_t kMaxHu = 3071;

using Index3 = std::array<std::ptrdiff_t, 3>;

/// Voxel lattice geometry shared by volumes and masks. Spacing and origin in mm.
struct Grid {
    std::array<std::size_t, 3> dims{1, 1, 1};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    [[nodiscard]] std::size_t size() const noexcept { return dims[0] * dims[1] * dims[2]; }

    // x-fastest linear index
    [[nodiscard]] std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
        return x + dims[0] * (y + dims[1] * z);
    }

    [[nodiscard]] Index3 coords(std::size_t i) const noexcept {
        const auto x = i % dims[0];
        const auto y = (i / dims[0]) % dims[1];
        const auto z = i / (dims[0] * dims[1]);
        return {static_cast<std::ptrdiff_t>(x), static_cast<std::ptrdiff_t>(y),
                static_cast<std::ptrdiff_t>(z)};
    }

    [[nodiscard]] bool contains(const Index3& p) const noexcept {
        for (int a = 0; a < 3; ++a) {
            if (p[a] < 0 || p[a] >= static_cast<std::ptrdiff_t>(dims[a])) return false;
        }
        return true;
    }

    [[nodiscard]] double voxel_volume_mm3() const noexcept {
        return spacing[0] * spacing[1] * spacing[2];
    }

    friend bool operator==(const Grid&, const Grid&) = default;

    /// Throws SpecError when dims or spacing are not positive.
    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] == 0) throw SpecError("grid dimension " + std::to_string(a) + " is zero");
            if (!(spacing[a] > 0.0)) throw SpecError("grid spacing must be positive");
        }
    }
};

inline void require_aligned(const Grid& a, const Grid& b, const char* what = "grids") {
    if (!(a == b)) throw AlignmentError(std::string(what) + " are not aligned (dims/spacing/origin differ)");
}

/// CT volume in Hounsfield units, immutable after construction.
class Volume {
public:
    Volume() = default;

    /// Throws if the voxel count mismatches or any HU lies outside [-1024, 3071].
    Volume(Grid grid, std::vector<std::int16_t> voxels) : grid_(grid), voxels_(std::move(voxels)) {
        grid_.validate();
        if (voxels_.size() != grid_.size()) throw SpecError("voxel count does not match dims");
        for (auto v : voxels_) {
            if (v < kMinHu || v > kMaxHu) throw DomainError("HU value " + std::to_string(v) + " outside CT range");
        }
    }

    /// Builds a volume clamping out-of-range HU; `clamped` receives the number of altered voxels.
    static Volume clamped(Grid grid, std::vector<std::int16_t> voxels, std::size_t* clamped = nullptr) {
        std::size_t n = 0;
        for (auto& v : voxels) {
            const auto c = std::clamp(v, kMinHu, kMaxHu);
            if (c != v) {
                v = c;
                ++n;
            }
        }
        if (clamped) *clamped = n;
        return Volume(grid, std::move(voxels));
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const std::int16_t> voxels() const noexcept { return voxels_; }
    [[nodiscard]] std::int16_t at(std::size_t i) const noexcept { return voxels_[i]; }
    [[nodiscard]] std::int16_t at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
        return voxels_[grid_.index(x, y, z)];
    }

    friend bool operator==(const Volume&, const Volume&) = default;

private:
    Grid grid_{};
    std::vector<std::int16_t> voxels_{0};
};

/// Binary region aligned to a Volume. Bits are stored one byte per voxel (0 or 1).
class Mask {
public:
    Mask() = default;

    explicit Mask(Grid grid) : grid_(grid), bits_(grid.size(), 0) { grid_.validate(); }

    Mask(Grid grid, std::vector<std::uint8_t> bits) : grid_(grid), bits_(std::move(bits)) {
        grid_.validate();
        if (bits_.size() != grid_.size()) throw SpecError("mask bit count does not match dims");
        for (auto& b : bits_) b = b ? 1 : 0;
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    [[nodiscard]] bool at(std::size_t i) const noexcept { return bits_[i] != 0; }
    [[nodiscard]] bool at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
        return bits_[grid_.index(x, y, z)] != 0;
    }
    [[nodiscard]] bool at(const Index3& p) const noexcept {
        return grid_.contains(p) &&
               bits_[grid_.index(static_cast<std::size_t>(p[0]), static_cast<std::size_t>(p[1]),
                                 static_cast<std::size_t>(p[2]))] != 0;
    }
    void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }

    [[nodiscard]] std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }
    [[nodiscard]] bool empty() const noexcept { return count() == 0; }

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    Grid grid_{};
    std::vector<std::uint8_t> bits_{0};
};

inline bool is_subset(const Mask& inner, const Mask& outer) {
    require_aligned(inner.grid(), outer.grid(), "masks");
    for (std::size_t i = 0; i < inner.grid().size(); ++i) {
        if (inner.at(i) && !outer.at(i)) return false;
    }
    return true;
}

}  // namespace eatrad
