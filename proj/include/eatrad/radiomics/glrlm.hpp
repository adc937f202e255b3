#pragma once

#include <array>
#include <string>

#include "eatrad/radiomics/discretize.hpp"
#include "eatrad/radiomics/feature_vector.hpp"
#include "eatrad/radiomics/size_matrix.hpp"

namespace eatrad::radiomics {

/// Run-length matrix along one direction: P(i, j) = number of maximal runs of
/// level i with length j.
inline SizeMatrix glrlm_matrix(const DiscretizedRegion& d, const Index3& dir) {
    SizeMatrix m;
    d.for_each_voxel([&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z, int g) {
        if (d.level(x - dir[0], y - dir[1], z - dir[2]) == g) return;  // not a run start
        std::size_t len = 1;
        while (d.level(x + static_cast<std::ptrdiff_t>(len) * dir[0], y + static_cast<std::ptrdiff_t>(len) * dir[1],
                       z + static_cast<std::ptrdiff_t>(len) * dir[2]) == g)
            ++len;
        m[{g, len}] += 1.0;
    });
    return m;
}

/// 16 run-length features averaged over the 13 directions.
inline FeatureVector glrlm_features(const DiscretizedRegion& d) {
    constexpr std::array<const char*, 16> names{
        "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
        "RunLengthNonUniformity", "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance",
        "RunVariance", "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
        "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
        "LongRunHighGrayLevelEmphasis"};
    std::array<double, 16> acc{};
    const double np = static_cast<double>(d.np);
    for (const auto& dir : kDirections13) {
        const auto s = size_matrix_stats(glrlm_matrix(d, dir));
        const std::array<double, 16> v{s.small,     s.large,         s.gln,      s.gln / s.n, s.sn,
                                       s.sn / s.n,  s.n / np,        s.gl_variance, s.size_variance,
                                       s.entropy,   s.low,           s.high,     s.small_low, s.small_high,
                                       s.large_low, s.large_high};
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += v[k];
    }
    FeatureVector f;
    for (std::size_t k = 0; k < acc.size(); ++k) {
        f.add(std::string("original_glrlm_") + names[k], acc[k] / static_cast<double>(kDirections13.size()));
    }
    return f;
}

}  // namespace eatrad::radiomics
