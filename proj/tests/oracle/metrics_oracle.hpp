#pragma once

// Brute-force reference implementations for the evaluation metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "eatrad/volume.hpp"

namespace oracle {

/// Exhaustive pair count: concordant + ties/2 over n+ * n-.
inline double auc(const std::vector<double>& s, const std::vector<int>& y) {
    long twice = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            ++pairs;
            if (s[i] > s[j])
                twice += 2;
            else if (s[i] == s[j])
                twice += 1;
        }
    }
    return static_cast<double>(twice) / (2.0 * static_cast<double>(pairs));
}

struct Cut {
    double cutoff;
    long tp, tn;
};

/// Every midpoint between consecutive distinct scores, scored in exact rational form.
inline Cut youden(const std::vector<double>& s, const std::vector<int>& y) {
    std::vector<double> u = s;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    long P = std::count(y.begin(), y.end(), 1), N = std::count(y.begin(), y.end(), 0);
    Cut best{u.front(), -1, -1};
    long best_j = -1;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) {
        const double c = u[k] + (u[k + 1] - u[k]) / 2.0;
        long tp = 0, tn = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (y[i] == 1 && s[i] >= c) ++tp;
            if (y[i] == 0 && s[i] < c) ++tn;
        }
        const long j = tp * N + tn * P;  // proportional to sens + spec
        if (j > best_j) {
            best_j = j;
            best = {c, tp, tn};
        }
    }
    return best;
}

inline double dice(const eatrad::Mask& a, const eatrad::Mask& b) {
    const auto& g = a.grid();
    double inter = 0, sa = 0, sb = 0;
    for (std::size_t z = 0; z < g.dims[2]; ++z)
        for (std::size_t yy = 0; yy < g.dims[1]; ++yy)
            for (std::size_t x = 0; x < g.dims[0]; ++x) {
                const bool va = a.at(x, yy, z), vb = b.at(x, yy, z);
                inter += va && vb;
                sa += va;
                sb += vb;
            }
    return sa + sb == 0 ? 1.0 : 2 * inter / (sa + sb);
}

inline std::vector<std::array<double, 3>> boundary_points(const eatrad::Mask& m) {
    const auto& g = m.grid();
    std::vector<std::array<double, 3>> pts;
    const long nx = static_cast<long>(g.dims[0]), ny = static_cast<long>(g.dims[1]), nz = static_cast<long>(g.dims[2]);
    auto inside = [&](long x, long y, long z) {
        return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz &&
               m.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(z));
    };
    for (long z = 0; z < nz; ++z)
        for (long y = 0; y < ny; ++y)
            for (long x = 0; x < nx; ++x) {
                if (!inside(x, y, z)) continue;
                const bool edge = !inside(x - 1, y, z) || !inside(x + 1, y, z) || !inside(x, y - 1, z) ||
                                  !inside(x, y + 1, z) || !inside(x, y, z - 1) || !inside(x, y, z + 1);
                if (edge) {
                    pts.push_back({static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)});
                }
            }
    return pts;
}

/// Points are voxel indices; offsets are scaled by spacing before squaring.
/// All-pairs symmetric Hausdorff distance over boundary points.
inline double hausdorff(const eatrad::Mask& a, const eatrad::Mask& b) {
    const auto pa = boundary_points(a), pb = boundary_points(b);
    const auto sp = a.grid().spacing;
    auto directed = [&](const auto& from, const auto& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double near = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                const double dx = (p[0] - q[0]) * sp[0], dy = (p[1] - q[1]) * sp[1], dz = (p[2] - q[2]) * sp[2];
                near = std::min(near, dx * dx + dy * dy + dz * dz);
            }
            worst = std::max(worst, near);
        }
        return worst;
    };
    return std::sqrt(std::max(directed(pa, pb), directed(pb, pa)));
}

}  // namespace oracle
