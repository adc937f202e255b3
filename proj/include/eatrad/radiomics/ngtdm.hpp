#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "eatrad/radiomics/discretize.hpp"
#include "eatrad/radiomics/feature_vector.hpp"

namespace eatrad::radiomics {

/// Neighborhood gray-tone difference table. For each level i: n[i] voxels
/// that have at least one in-region neighbor, s[i] = sum |i - mean neighbor level|.
struct Ngtdm {
    std::vector<double> n;  // indexed by level, size ng + 1
    std::vector<double> s;
    double nvp = 0.0;
};

inline Ngtdm ngtdm_table(const DiscretizedRegion& d, int connectivity = 26) {
    const auto offsets = neighborhood(connectivity);
    Ngtdm t;
    t.n.assign(static_cast<std::size_t>(d.ng) + 1, 0.0);
    t.s.assign(static_cast<std::size_t>(d.ng) + 1, 0.0);
    d.for_each_voxel([&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z, int g) {
        double sum = 0.0;
        int count = 0;
        for (const auto& o : offsets) {
            const int h = d.level(x + o[0], y + o[1], z + o[2]);
            if (h > 0) {
                sum += h;
                ++count;
            }
        }
        if (count == 0) return;
        t.n[static_cast<std::size_t>(g)] += 1.0;
        t.s[static_cast<std::size_t>(g)] += std::abs(g - sum / count);
        t.nvp += 1.0;
    });
    return t;
}

/// Coarseness, Contrast, Busyness, Complexity, Strength. Any zero denominator
/// yields 0 for that feature.
inline FeatureVector ngtdm_features(const DiscretizedRegion& d, int connectivity = 26) {
    const Ngtdm t = ngtdm_table(d, connectivity);
    std::vector<int> present;
    std::vector<double> p(t.n.size(), 0.0);
    double sum_s = 0.0, sum_ps = 0.0;
    if (t.nvp > 0.0) {
        for (std::size_t i = 1; i < t.n.size(); ++i) {
            p[i] = t.n[i] / t.nvp;
            if (p[i] > 0.0) present.push_back(static_cast<int>(i));
            sum_s += t.s[i];
            sum_ps += p[i] * t.s[i];
        }
    }
    const double ngp = static_cast<double>(present.size());

    double contrast_pairs = 0.0, busy_den = 0.0, complexity = 0.0, strength_num = 0.0;
    for (int i : present) {
        for (int j : present) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            const double dij = static_cast<double>(i - j);
            contrast_pairs += p[ui] * p[uj] * dij * dij;
            busy_den += std::abs(i * p[ui] - j * p[uj]);
            complexity += std::abs(dij) * (p[ui] * t.s[ui] + p[uj] * t.s[uj]) / (p[ui] + p[uj]);
            strength_num += (p[ui] + p[uj]) * dij * dij;
        }
    }

    const double coarseness = sum_ps > 0.0 ? 1.0 / sum_ps : 0.0;
    const double contrast = (ngp > 1.0 && t.nvp > 0.0) ? contrast_pairs / (ngp * (ngp - 1.0)) * sum_s / t.nvp : 0.0;
    const double busyness = busy_den > 0.0 ? sum_ps / busy_den : 0.0;
    complexity = t.nvp > 0.0 ? complexity / t.nvp : 0.0;
    const double strength = sum_s > 0.0 ? strength_num / sum_s : 0.0;

    FeatureVector f;
    f.add("original_ngtdm_Coarseness", coarseness);
    f.add("original_ngtdm_Contrast", contrast);
    f.add("original_ngtdm_Busyness", busyness);
    f.add("original_ngtdm_Complexity", complexity);
    f.add("original_ngtdm_Strength", strength);
    return f;
}

}  // namespace eatrad::radiomics
