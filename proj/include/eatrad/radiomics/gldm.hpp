#pragma once

#include <string>

#include "eatrad/radiomics/discretize.hpp"
#include "eatrad/radiomics/feature_vector.hpp"
#include "eatrad/radiomics/size_matrix.hpp"

namespace eatrad::radiomics {

/// Dependence matrix with distance 1 and alpha = 0: P(i, j) counts voxels of
/// level i having j - 1 same-level neighbors (the voxel itself is counted).
inline SizeMatrix gldm_matrix(const DiscretizedRegion& d, int connectivity = 26) {
    const auto offsets = neighborhood(connectivity);
    SizeMatrix m;
    d.for_each_voxel([&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z, int g) {
        std::size_t dep = 1;
        for (const auto& o : offsets) {
            if (d.level(x + o[0], y + o[1], z + o[2]) == g) ++dep;
        }
        m[{g, dep}] += 1.0;
    });
    return m;
}

inline FeatureVector gldm_features(const DiscretizedRegion& d, int connectivity = 26) {
    const auto s = size_matrix_stats(gldm_matrix(d, connectivity));
    FeatureVector f;
    auto add = [&f](const char* name, double value) { f.add(std::string("original_gldm_") + name, value); };
    add("SmallDependenceEmphasis", s.small);
    add("LargeDependenceEmphasis", s.large);
    add("GrayLevelNonUniformity", s.gln);
    add("DependenceNonUniformity", s.sn);
    add("DependenceNonUniformityNormalized", s.sn / s.n);
    add("GrayLevelVariance", s.gl_variance);
    add("DependenceVariance", s.size_variance);
    add("DependenceEntropy", s.entropy);
    add("LowGrayLevelEmphasis", s.low);
    add("HighGrayLevelEmphasis", s.high);
    add("SmallDependenceLowGrayLevelEmphasis", s.small_low);
    add("SmallDependenceHighGrayLevelEmphasis", s.small_high);
    add("LargeDependenceLowGrayLevelEmphasis", s.large_low);
    add("LargeDependenceHighGrayLevelEmphasis", s.large_high);
    return f;
}

}  // namespace eatrad::radiomics
