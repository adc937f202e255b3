#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <utility>

namespace eatrad::radiomics {

/// Sparse (gray level, size) count matrix shared by the zone, run and
/// dependence families. The second index is zone size, run length or
/// dependence count depending on the family.
using SizeMatrix = std::map<std::pair<int, std::size_t>, double>;

/// Normalized moments of a SizeMatrix. Each emphasis is sum(P * w) / N.
struct SizeMatrixStats {
    double n = 0.0;
    double small = 0.0;       // 1/j^2
    double large = 0.0;       // j^2
    double gln = 0.0;         // sum_i (sum_j P)^2 / N
    double sn = 0.0;          // sum_j (sum_i P)^2 / N
    double low = 0.0;         // 1/i^2
    double high = 0.0;        // i^2
    double small_low = 0.0;   // 1/(i^2 j^2)
    double small_high = 0.0;  // i^2/j^2
    double large_low = 0.0;   // j^2/i^2
    double large_high = 0.0;  // i^2 j^2
    double gl_variance = 0.0;
    double size_variance = 0.0;
    double entropy = 0.0;     // bits
};

inline SizeMatrixStats size_matrix_stats(const SizeMatrix& m) {
    SizeMatrixStats s;
    std::map<int, double> rows;
    std::map<std::size_t, double> cols;
    for (const auto& [key, count] : m) {
        const double i = key.first, j = static_cast<double>(key.second);
        const double i2 = i * i, j2 = j * j;
        s.n += count;
        s.small += count / j2;
        s.large += count * j2;
        s.low += count / i2;
        s.high += count * i2;
        s.small_low += count / (i2 * j2);
        s.small_high += count * i2 / j2;
        s.large_low += count * j2 / i2;
        s.large_high += count * i2 * j2;
        rows[key.first] += count;
        cols[key.second] += count;
    }
    if (s.n <= 0.0) return s;
    for (auto [i, r] : rows) s.gln += r * r;
    for (auto [j, c] : cols) s.sn += c * c;
    s.gln /= s.n;
    s.sn /= s.n;
    for (double* v : {&s.small, &s.large, &s.low, &s.high, &s.small_low, &s.small_high, &s.large_low, &s.large_high})
        *v /= s.n;

    double mu_i = 0.0, mu_j = 0.0;
    for (const auto& [key, count] : m) {
        const double p = count / s.n;
        mu_i += p * key.first;
        mu_j += p * static_cast<double>(key.second);
        s.entropy -= p * std::log2(p);
    }
    for (const auto& [key, count] : m) {
        const double p = count / s.n;
        s.gl_variance += p * (key.first - mu_i) * (key.first - mu_i);
        s.size_variance += p * (static_cast<double>(key.second) - mu_j) * (static_cast<double>(key.second) - mu_j);
    }
    return s;
}

}  // namespace eatrad::radiomics
