#pragma once

#include <string>
#include <vector>

#include "eatrad/radiomics/discretize.hpp"
#include "eatrad/radiomics/feature_vector.hpp"
#include "eatrad/radiomics/size_matrix.hpp"

namespace eatrad::radiomics {

/// Size-zone matrix: P(i, j) = number of connected zones of level i with j voxels.
inline SizeMatrix glszm_matrix(const DiscretizedRegion& d, int connectivity = 26) {
    const auto offsets = neighborhood(connectivity);
    std::vector<std::uint8_t> seen(d.levels.size(), 0);
    std::vector<Index3> stack;
    SizeMatrix m;
    d.for_each_voxel([&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z, int g) {
        if (seen[d.index(x, y, z)]) return;
        std::size_t size = 0;
        stack.assign(1, {x, y, z});
        seen[d.index(x, y, z)] = 1;
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            ++size;
            for (const auto& o : offsets) {
                const Index3 q{p[0] + o[0], p[1] + o[1], p[2] + o[2]};
                if (d.level(q[0], q[1], q[2]) != g) continue;
                auto& s = seen[d.index(q[0], q[1], q[2])];
                if (s) continue;
                s = 1;
                stack.push_back(q);
            }
        }
        m[{g, size}] += 1.0;
    });
    return m;
}

inline FeatureVector glszm_features(const DiscretizedRegion& d, int connectivity = 26) {
    const auto s = size_matrix_stats(glszm_matrix(d, connectivity));
    const double np = static_cast<double>(d.np);
    FeatureVector f;
    auto add = [&f](const char* name, double value) { f.add(std::string("original_glszm_") + name, value); };
    add("SmallAreaEmphasis", s.small);
    add("LargeAreaEmphasis", s.large);
    add("GrayLevelNonUniformity", s.gln);
    add("GrayLevelNonUniformityNormalized", s.gln / s.n);
    add("SizeZoneNonUniformity", s.sn);
    add("SizeZoneNonUniformityNormalized", s.sn / s.n);
    add("ZonePercentage", s.n / np);
    add("GrayLevelVariance", s.gl_variance);
    add("ZoneVariance", s.size_variance);
    add("ZoneEntropy", s.entropy);
    add("LowGrayLevelZoneEmphasis", s.low);
    add("HighGrayLevelZoneEmphasis", s.high);
    add("SmallAreaLowGrayLevelEmphasis", s.small_low);
    add("SmallAreaHighGrayLevelEmphasis", s.small_high);
    add("LargeAreaLowGrayLevelEmphasis", s.large_low);
    add("LargeAreaHighGrayLevelEmphasis", s.large_high);
    return f;
}

}  // namespace eatrad::radiomics
