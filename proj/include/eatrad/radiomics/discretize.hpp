#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "eatrad/error.hpp"
#include "eatrad/volume.hpp"

namespace eatrad::radiomics {

/// Gray-level image of a masked region, cropped to the mask bounding box.
/// Levels are 1..Ng inside the mask and 0 outside.
struct DiscretizedRegion {
    std::array<std::size_t, 3> dims{};
    std::array<double, 3> spacing{};
    std::vector<int> levels;
    int ng = 0;
    double bin_width = 0.0;
    double min_hu = 0.0;
    std::size_t np = 0;

    [[nodiscard]] std::size_t index(std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z) const noexcept {
        return static_cast<std::size_t>(x) + dims[0] * (static_cast<std::size_t>(y) + dims[1] * static_cast<std::size_t>(z));
    }

    /// 0 outside the box or outside the mask.
    [[nodiscard]] int level(std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z) const noexcept {
        if (x < 0 || y < 0 || z < 0 || x >= static_cast<std::ptrdiff_t>(dims[0]) ||
            y >= static_cast<std::ptrdiff_t>(dims[1]) || z >= static_cast<std::ptrdiff_t>(dims[2]))
            return 0;
        return levels[index(x, y, z)];
    }

    template <typename Fn>
    void for_each_voxel(Fn&& fn) const {
        for (std::ptrdiff_t z = 0; z < static_cast<std::ptrdiff_t>(dims[2]); ++z)
            for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(dims[1]); ++y)
                for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(dims[0]); ++x) {
                    const int g = levels[index(x, y, z)];
                    if (g > 0) fn(x, y, z, g);
                }
    }
};

/// The 13 unique 3D offsets at distance 1 (one of each +/- pair).
inline constexpr std::array<Index3, 13> kDirections13{{
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1},
    {1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1},
}};

/// Neighbor offsets for 26- or 6-connectivity.
inline std::vector<Index3> neighborhood(int connectivity) {
    if (connectivity != 26 && connectivity != 6) throw DomainError("connectivity must be 6 or 26");
    std::vector<Index3> out;
    for (std::ptrdiff_t dz = -1; dz <= 1; ++dz)
        for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
            for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                const auto manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 0) continue;
                if (connectivity == 6 && manhattan != 1) continue;
                out.push_back({dx, dy, dz});
            }
    return out;
}

/// Fixed-bin-width discretization: level = floor((HU - min) / bin_width) + 1,
/// with Ng = ceil((max - min + 1) / bin_width) over the masked voxels.
inline DiscretizedRegion discretize(const Volume& v, const Mask& m, double bin_width) {
    require_aligned(v.grid(), m.grid(), "volume and mask");
    if (!(bin_width > 0.0)) throw DomainError("bin width must be positive");
    const Grid& g = v.grid();
    std::array<std::size_t, 3> lo{g.dims}, hi{0, 0, 0};
    int hu_min = std::numeric_limits<int>::max(), hu_max = std::numeric_limits<int>::min();
    std::size_t np = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!m.at(i)) continue;
        const auto p = g.coords(i);
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], static_cast<std::size_t>(p[a]));
            hi[a] = std::max(hi[a], static_cast<std::size_t>(p[a]));
        }
        hu_min = std::min<int>(hu_min, v.at(i));
        hu_max = std::max<int>(hu_max, v.at(i));
        ++np;
    }
    if (np == 0) throw EmptyRegionError("region mask is empty");

    DiscretizedRegion d;
    for (int a = 0; a < 3; ++a) d.dims[a] = hi[a] - lo[a] + 1;
    d.spacing = g.spacing;
    d.bin_width = bin_width;
    d.min_hu = hu_min;
    d.np = np;
    d.ng = static_cast<int>(std::ceil(static_cast<double>(hu_max - hu_min + 1) / bin_width));
    d.levels.assign(d.dims[0] * d.dims[1] * d.dims[2], 0);
    for (std::size_t z = lo[2]; z <= hi[2]; ++z)
        for (std::size_t y = lo[1]; y <= hi[1]; ++y)
            for (std::size_t x = lo[0]; x <= hi[0]; ++x) {
                const auto i = g.index(x, y, z);
                if (!m.at(i)) continue;
                int level = static_cast<int>(std::floor((v.at(i) - hu_min) / bin_width)) + 1;
                level = std::clamp(level, 1, d.ng);
                d.levels[d.index(static_cast<std::ptrdiff_t>(x - lo[0]), static_cast<std::ptrdiff_t>(y - lo[1]),
                                 static_cast<std::ptrdiff_t>(z - lo[2]))] = level;
            }
    return d;
}

}  // namespace eatrad::radiomics
