#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "eatrad/error.hpp"
#include "eatrad/volume.hpp"

namespace eatrad {

enum class FilterMode { volume3d, slice2d };

struct EatParams {
    std::int16_t hu_low = -190;   // inclusive
    std::int16_t hu_high = -30;   // inclusive
    int filter_radius = 1;
    FilterMode filter_mode = FilterMode::volume3d;
};

struct AttenuationStats {
    double mean = 0.0;
    double sd = 0.0;  // population
    double min = 0.0;
    double max = 0.0;
};

struct EatResult {
    Mask eat_mask;
    double eat_volume_ml = 0.0;
    std::size_t voxel_count = 0;
    AttenuationStats attenuation;
};

inline double mask_volume_ml(const Mask& m) {
    return static_cast<double>(m.count()) * m.grid().voxel_volume_mm3() / 1000.0;
}

/// Binary majority filter over the (2r+1)^3 box (or (2r+1)^2 in-slice box for
/// slice2d), clipped at the grid edge. The center voxel is part of its own
/// neighborhood; an exact tie keeps the input bit.
inline Mask median_filter(const Mask& m, int radius, FilterMode mode = FilterMode::volume3d) {
    if (radius < 0) throw DomainError("median filter radius must be >= 0");
    if (radius == 0) return m;
    const Grid& g = m.grid();
    const auto nx = static_cast<std::ptrdiff_t>(g.dims[0]);
    const auto ny = static_cast<std::ptrdiff_t>(g.dims[1]);
    const auto nz = static_cast<std::ptrdiff_t>(g.dims[2]);
    const std::ptrdiff_t rz = mode == FilterMode::slice2d ? 0 : radius;

    // summed-volume table with a one-voxel zero pad on the low side
    const auto sx = nx + 1, sy = ny + 1;
    std::vector<std::int64_t> sat(static_cast<std::size_t>(sx * sy * (nz + 1)), 0);
    auto S = [&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z) -> std::int64_t& {
        return sat[static_cast<std::size_t>(x + sx * (y + sy * z))];
    };
    for (std::ptrdiff_t z = 1; z <= nz; ++z)
        for (std::ptrdiff_t y = 1; y <= ny; ++y)
            for (std::ptrdiff_t x = 1; x <= nx; ++x) {
                const std::int64_t b = m.at(static_cast<std::size_t>(x - 1), static_cast<std::size_t>(y - 1),
                                            static_cast<std::size_t>(z - 1));
                S(x, y, z) = b + S(x - 1, y, z) + S(x, y - 1, z) + S(x, y, z - 1) - S(x - 1, y - 1, z) -
                             S(x - 1, y, z - 1) - S(x, y - 1, z - 1) + S(x - 1, y - 1, z - 1);
            }

    Mask out(g);
    for (std::ptrdiff_t z = 0; z < nz; ++z)
        for (std::ptrdiff_t y = 0; y < ny; ++y)
            for (std::ptrdiff_t x = 0; x < nx; ++x) {
                const auto x0 = std::max<std::ptrdiff_t>(0, x - radius), x1 = std::min(nx, x + radius + 1);
                const auto y0 = std::max<std::ptrdiff_t>(0, y - radius), y1 = std::min(ny, y + radius + 1);
                const auto z0 = std::max<std::ptrdiff_t>(0, z - rz), z1 = std::min(nz, z + rz + 1);
                const std::int64_t ones = S(x1, y1, z1) - S(x0, y1, z1) - S(x1, y0, z1) - S(x1, y1, z0) +
                                          S(x0, y0, z1) + S(x0, y1, z0) + S(x1, y0, z0) - S(x0, y0, z0);
                const std::int64_t total = (x1 - x0) * (y1 - y0) * (z1 - z0);
                const auto i = g.index(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                                       static_cast<std::size_t>(z));
                if (2 * ones > total)
                    out.set(i, true);
                else if (2 * ones < total)
                    out.set(i, false);
                else
                    out.set(i, m.at(i));
            }
    return out;
}

/// Heart voxels whose HU lies in the closed fat window.
inline Mask threshold_in_mask(const Volume& v, const Mask& region, std::int16_t lo, std::int16_t hi) {
    require_aligned(v.grid(), region.grid(), "volume and mask");
    Mask out(v.grid());
    for (std::size_t i = 0; i < v.grid().size(); ++i) {
        const auto hu = v.at(i);
        out.set(i, region.at(i) && hu >= lo && hu <= hi);
    }
    return out;
}

inline AttenuationStats attenuation_stats(const Volume& v, const Mask& m) {
    AttenuationStats s;
    std::size_t n = 0;
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < m.grid().size(); ++i) {
        if (!m.at(i)) continue;
        const double hu = v.at(i);
        sum += hu;
        lo = std::min(lo, hu);
        hi = std::max(hi, hu);
        ++n;
    }
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < m.grid().size(); ++i) {
        if (m.at(i)) ss += (v.at(i) - s.mean) * (v.at(i) - s.mean);
    }
    s.sd = std::sqrt(ss / static_cast<double>(n));
    s.min = lo;
    s.max = hi;
    return s;
}

/// Threshold inside the heart contour, then smooth with the majority filter.
/// Smoothing only removes voxels: the filtered mask is intersected with the
/// thresholded candidate set, so the result stays inside the heart and inside
/// the HU window.
inline EatResult extract_eat(const Volume& v, const Mask& heart, const EatParams& params = {}) {
    require_aligned(v.grid(), heart.grid(), "volume and heart mask");
    if (params.hu_low > params.hu_high) throw DomainError("EAT threshold window is empty");
    const Mask candidate = threshold_in_mask(v, heart, params.hu_low, params.hu_high);
    Mask eat = median_filter(candidate, params.filter_radius, params.filter_mode);
    for (std::size_t i = 0; i < eat.grid().size(); ++i) {
        if (eat.at(i) && !candidate.at(i)) eat.set(i, false);
    }
    EatResult r;
    r.voxel_count = eat.count();
    r.eat_volume_ml = static_cast<double>(r.voxel_count) * v.grid().voxel_volume_mm3() / 1000.0;
    r.attenuation = attenuation_stats(v, eat);
    r.eat_mask = std::move(eat);
    return r;
}

}  // namespace eatrad
