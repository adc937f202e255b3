#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eatrad/radiomics/discretize.hpp"
#include "eatrad/radiomics/feature_vector.hpp"

namespace eatrad::radiomics {

inline constexpr std::array<const char*, 24> kGlcmNames{
    "Autocorrelation", "JointAverage",      "ClusterProminence",  "ClusterShade",       "ClusterTendency",
    "Contrast",        "Correlation",       "DifferenceAverage",  "DifferenceEntropy",  "DifferenceVariance",
    "JointEnergy",     "JointEntropy",      "Imc1",               "Imc2",               "Idm",
    "MaximalCorrelationCoefficient",        "Idmn",               "Id",                 "Idn",
    "InverseVariance", "MaximumProbability", "SumAverage",        "SumEntropy",         "SumSquares",
};

namespace glcm_detail {

inline double plog2p(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

/// sqrt of the second-largest eigenvalue of Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) py(k)).
/// Q is similar to the symmetric S = Dx^-1/2 P Dy^-1 P^T Dx^-1/2, which is decomposed instead.
inline double maximal_correlation(const std::vector<double>& p, const std::vector<double>& px,
                                  const std::vector<double>& py, int ng) {
    std::vector<int> rows, cols;
    for (int i = 0; i < ng; ++i) {
        if (px[static_cast<std::size_t>(i)] > 0.0) rows.push_back(i);
        if (py[static_cast<std::size_t>(i)] > 0.0) cols.push_back(i);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n <= 1) return 1.0;
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            const auto i = static_cast<std::size_t>(rows[static_cast<std::size_t>(a)]);
            const auto j = static_cast<std::size_t>(rows[static_cast<std::size_t>(b)]);
            double acc = 0.0;
            for (int kk : cols) {
                const auto k = static_cast<std::size_t>(kk);
                acc += p[i * static_cast<std::size_t>(ng) + k] * p[j * static_cast<std::size_t>(ng) + k] / py[k];
            }
            acc /= std::sqrt(px[i] * px[j]);
            s(a, b) = acc;
            s(b, a) = acc;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    const double second = solver.eigenvalues()(n - 2);  // ascending order
    return std::sqrt(std::max(0.0, second));
}

/// Features of one normalized, symmetric co-occurrence matrix (row-major ng x ng).
inline std::array<double, 24> matrix_features(const std::vector<double>& p, int ng) {
    const auto n = static_cast<std::size_t>(ng);
    std::vector<double> px(n, 0.0), py(n, 0.0), psum(2 * n + 1, 0.0), pdiff(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = p[i * n + j];
            px[i] += v;
            py[j] += v;
            psum[i + j + 2] += v;  // levels are index + 1
            pdiff[i > j ? i - j : j - i] += v;
        }

    double mux = 0.0, muy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mux += static_cast<double>(i + 1) * px[i];
        muy += static_cast<double>(i + 1) * py[i];
    }
    double varx = 0.0, vary = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        varx += (static_cast<double>(i + 1) - mux) * (static_cast<double>(i + 1) - mux) * px[i];
        vary += (static_cast<double>(i + 1) - muy) * (static_cast<double>(i + 1) - muy) * py[i];
    }

    double autocorr = 0.0, prom = 0.0, shade = 0.0, tend = 0.0, contrast = 0.0, energy = 0.0, hxy = 0.0;
    double hxy1 = 0.0, hxy2 = 0.0, idm = 0.0, idmn = 0.0, id = 0.0, idn = 0.0, maxp = 0.0;
    const double ng2 = static_cast<double>(ng) * static_cast<double>(ng);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = p[i * n + j];
            const double gi = static_cast<double>(i + 1), gj = static_cast<double>(j + 1);
            const double dij = gi - gj;
            const double c = gi + gj - mux - muy;
            const double pxpy = px[i] * py[j];
            if (pxpy > 0.0) hxy2 -= pxpy * std::log2(pxpy);
            if (v <= 0.0) continue;
            autocorr += gi * gj * v;
            prom += c * c * c * c * v;
            shade += c * c * c * v;
            tend += c * c * v;
            contrast += dij * dij * v;
            energy += v * v;
            hxy -= v * std::log2(v);
            hxy1 -= v * std::log2(pxpy);
            idm += v / (1.0 + dij * dij);
            idmn += v / (1.0 + dij * dij / ng2);
            id += v / (1.0 + std::abs(dij));
            idn += v / (1.0 + std::abs(dij) / static_cast<double>(ng));
            maxp = std::max(maxp, v);
        }

    double hx = 0.0, hy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        hx += plog2p(px[i]);
        hy += plog2p(py[i]);
    }

    double diff_avg = 0.0, diff_ent = 0.0, inv_var = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        diff_avg += static_cast<double>(k) * pdiff[k];
        diff_ent += plog2p(pdiff[k]);
        if (k > 0) inv_var += pdiff[k] / static_cast<double>(k * k);
    }
    double diff_var = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        diff_var += (static_cast<double>(k) - diff_avg) * (static_cast<double>(k) - diff_avg) * pdiff[k];
    }
    double sum_avg = 0.0, sum_ent = 0.0;
    for (std::size_t k = 2; k <= 2 * n; ++k) {
        sum_avg += static_cast<double>(k) * psum[k];
        sum_ent += plog2p(psum[k]);
    }

    const double sigma = std::sqrt(varx * vary);
    const double correlation = sigma > 0.0 ? (autocorr - mux * muy) / sigma : 1.0;
    const double hmax = std::max(hx, hy);
    const double imc1 = hmax > 0.0 ? (hxy - hxy1) / hmax : 0.0;
    const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy))));

    return {autocorr, mux,      prom,   shade,       tend,      contrast,  correlation, diff_avg,
            diff_ent, diff_var, energy, hxy,         imc1,      imc2,      idm,         maximal_correlation(p, px, py, ng),
            idmn,     id,       idn,    inv_var,     maxp,      sum_avg,   sum_ent,     varx};
}

}  // namespace glcm_detail

/// Symmetric co-occurrence counts at distance 1 along `dir`, row-major ng x ng.
/// Returns the number of voxel pairs found.
inline std::size_t glcm_counts(const DiscretizedRegion& d, const Index3& dir, std::vector<double>& counts) {
    const auto n = static_cast<std::size_t>(d.ng);
    counts.assign(n * n, 0.0);
    std::size_t pairs = 0;
    d.for_each_voxel([&](std::ptrdiff_t x, std::ptrdiff_t y, std::ptrdiff_t z, int g) {
        const int h = d.level(x + dir[0], y + dir[1], z + dir[2]);
        if (h == 0) return;
        const auto a = static_cast<std::size_t>(g - 1), b = static_cast<std::size_t>(h - 1);
        counts[a * n + b] += 1.0;
        counts[b * n + a] += 1.0;
        ++pairs;
    });
    return pairs;
}

/// 24 co-occurrence features, each averaged over the directions that contain
/// at least one voxel pair. A region without any pair (isolated voxels) is
/// scored on the diagonal matrix p(g, g) = n_g / Np, i.e. every voxel
/// co-occurs with itself; a single voxel gives the one-level matrix [[1]].
inline FeatureVector glcm_features(const DiscretizedRegion& d) {
    std::array<double, 24> acc{};
    int used = 0;
    std::vector<double> counts;
    for (const auto& dir : kDirections13) {
        const std::size_t pairs = glcm_counts(d, dir, counts);
        if (pairs == 0) continue;
        const double total = 2.0 * static_cast<double>(pairs);
        for (double& c : counts) c /= total;
        const auto f = glcm_detail::matrix_features(counts, d.ng);
        for (std::size_t k = 0; k < f.size(); ++k) acc[k] += f[k];
        ++used;
    }
    if (used == 0) {
        counts.assign(static_cast<std::size_t>(d.ng) * static_cast<std::size_t>(d.ng), 0.0);
        d.for_each_voxel([&](auto, auto, auto, int g) {
            counts[static_cast<std::size_t>(g - 1) * static_cast<std::size_t>(d.ng + 1)] += 1.0 / static_cast<double>(d.np);
        });
        acc = glcm_detail::matrix_features(counts, d.ng);
        used = 1;
    }
    FeatureVector out;
    for (std::size_t k = 0; k < acc.size(); ++k) {
        out.add(std::string("original_glcm_") + kGlcmNames[k], acc[k] / used);
    }
    return out;
}

}  // namespace eatrad::radiomics
