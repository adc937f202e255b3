#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "eatrad/radiomics/discretize.hpp"
#include "eatrad/radiomics/feature_vector.hpp"
#include "eatrad/stats.hpp"

namespace eatrad::radiomics {

/// 18 intensity statistics over the masked HU values. Entropy and Uniformity
/// use the fixed-bin-width histogram. Moments are population moments;
/// a constant region reports Skewness 0 and Kurtosis 0.
inline FeatureVector first_order(const Volume& v, const Mask& m, double bin_width = 25.0) {
    const DiscretizedRegion d = discretize(v, m, bin_width);

    std::vector<double> x;
    x.reserve(d.np);
    for (std::size_t i = 0; i < v.grid().size(); ++i) {
        if (m.at(i)) x.push_back(v.at(i));
    }
    const auto n = static_cast<double>(x.size());

    double sum = 0.0, sum_sq = 0.0;
    for (double xi : x) {
        sum += xi;
        sum_sq += xi * xi;
    }
    const double mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
    for (double xi : x) {
        const double dev = xi - mean;
        m2 += dev * dev;
        m3 += dev * dev * dev;
        m4 += dev * dev * dev * dev;
        mad += std::abs(dev);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const double p10 = stats::percentile_sorted(sorted, 10.0);
    const double p90 = stats::percentile_sorted(sorted, 90.0);

    double robust_sum = 0.0;
    std::size_t robust_n = 0;
    for (double xi : x) {
        if (xi >= p10 && xi <= p90) {
            robust_sum += xi;
            ++robust_n;
        }
    }
    // The 10-90 band can be empty (e.g. two distinct values); RMAD is then 0.
    double rmad = 0.0;
    if (robust_n > 0) {
        const double robust_mean = robust_sum / static_cast<double>(robust_n);
        for (double xi : x) {
            if (xi >= p10 && xi <= p90) rmad += std::abs(xi - robust_mean);
        }
        rmad /= static_cast<double>(robust_n);
    }

    std::vector<double> hist(static_cast<std::size_t>(d.ng) + 1, 0.0);
    d.for_each_voxel([&](auto, auto, auto, int g) { hist[static_cast<std::size_t>(g)] += 1.0; });
    double entropy = 0.0, uniformity = 0.0;
    for (double c : hist) {
        if (c <= 0.0) continue;
        const double p = c / n;
        entropy -= p * std::log2(p);
        uniformity += p * p;
    }

    FeatureVector f;
    auto add = [&f](const char* name, double value) { f.add(std::string("original_firstorder_") + name, value); };
    add("Energy", sum_sq);
    add("TotalEnergy", sum_sq * v.grid().voxel_volume_mm3());
    add("Entropy", entropy);
    add("Minimum", sorted.front());
    add("10Percentile", p10);
    add("90Percentile", p90);
    add("Maximum", sorted.back());
    add("Mean", mean);
    add("Median", stats::percentile_sorted(sorted, 50.0));
    add("InterquartileRange", stats::percentile_sorted(sorted, 75.0) - stats::percentile_sorted(sorted, 25.0));
    add("Range", sorted.back() - sorted.front());
    add("MeanAbsoluteDeviation", mad);
    add("RobustMeanAbsoluteDeviation", rmad);
    add("RootMeanSquared", std::sqrt(sum_sq / n));
    add("Skewness", m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0);
    add("Kurtosis", m2 > 0.0 ? m4 / (m2 * m2) : 0.0);
    add("Variance", m2);
    add("Uniformity", uniformity);
    return f;
}

}  // namespace eatrad::radiomics
