#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "eatrad/error.hpp"
#include "eatrad/parallel.hpp"
#include "eatrad/random.hpp"
#include "eatrad/stats.hpp"
#include "eatrad/volume.hpp"

namespace eatrad {

namespace metrics_detail {

inline void check_aligned(std::size_t scores, std::size_t labels, const char* what) {
    if (scores != labels) {
        throw DomainError(std::string(what) + ": " + std::to_string(scores) + " scores vs " + std::to_string(labels) +
                          " labels");
    }
}

inline std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels, const char* what) {
    std::size_t pos = 0, neg = 0;
    for (int y : labels) {
        if (y == 1)
            ++pos;
        else if (y == 0)
            ++neg;
        else
            throw DomainError(std::string(what) + ": label " + std::to_string(y) + " is not 0/1");
    }
    if (pos == 0 || neg == 0) throw DomainError(std::string(what) + ": both classes must be present");
    return {pos, neg};
}

}  // namespace metrics_detail

/// Mann-Whitney AUC with ties counted one half. The numerator is accumulated
/// in integers (twice the concordant count plus ties) so the result is exact
/// up to the final division.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    metrics_detail::check_aligned(scores.size(), labels.size(), "roc_auc");
    const auto [pos, neg] = metrics_detail::class_counts(labels, "roc_auc");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::uint64_t twice = 0, neg_below = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t p = 0, n = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? p : n) += 1;
            ++j;
        }
        twice += 2 * p * neg_below + p * n;
        neg_below += n;
        i = j;
    }
    return static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

struct RocPoint {
    double threshold;  ///< predict positive when score >= threshold
    double fpr;
    double tpr;
};

/// ROC polyline from (0,0) to (1,1), one vertex per distinct score.
inline std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    metrics_detail::check_aligned(scores.size(), labels.size(), "roc_curve");
    const auto [pos, neg] = metrics_detail::class_counts(labels, "roc_curve");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<RocPoint> pts{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        pts.push_back({s, static_cast<double>(fp) / static_cast<double>(neg),
                       static_cast<double>(tp) / static_cast<double>(pos)});
    }
    return pts;
}

struct CutoffStats {
    double cutoff = 0.5;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double accuracy = 0.0;
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Confusion counts for the rule "positive iff score >= cutoff".
inline CutoffStats confusion_at(std::span<const double> scores, std::span<const int> labels, double cutoff) {
    metrics_detail::check_aligned(scores.size(), labels.size(), "confusion_at");
    CutoffStats c;
    c.cutoff = cutoff;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool call = scores[i] >= cutoff;
        if (labels[i] == 1)
            (call ? c.tp : c.fn) += 1;
        else
            (call ? c.fp : c.tn) += 1;
    }
    const auto pos = static_cast<double>(c.tp + c.fn), neg = static_cast<double>(c.tn + c.fp);
    c.sensitivity = pos > 0 ? static_cast<double>(c.tp) / pos : 0.0;
    c.specificity = neg > 0 ? static_cast<double>(c.tn) / neg : 0.0;
    c.accuracy = scores.empty() ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(scores.size());
    return c;
}

/// Youden-optimal cutoff over midpoints of consecutive distinct scores; the
/// smallest threshold wins ties. J is compared as tp*N + tn*P in integers.
/// With a single distinct score the cutoff is that score (everything positive).
inline CutoffStats youden_cutoff(std::span<const double> scores, std::span<const int> labels) {
    metrics_detail::check_aligned(scores.size(), labels.size(), "youden_cutoff");
    const auto [pos, neg] = metrics_detail::class_counts(labels, "youden_cutoff");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double best_cut = scores[order.front()];
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();  // unset
    std::uint64_t pos_below = 0, neg_below = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? pos_below : neg_below) += 1;
            ++i;
        }
        if (i == order.size()) break;
        const double cut = s + (scores[order[i]] - s) / 2.0;
        const std::uint64_t tp = pos - pos_below, tn = neg_below;
        const std::uint64_t j = tp * neg + tn * pos;
        if (best == std::numeric_limits<std::uint64_t>::max() || j > best) {
            best = j;
            best_cut = cut;
        }
    }
    return confusion_at(scores, labels, best_cut);
}

struct Interval {
    double low = 0.0;
    double high = 0.0;
    std::size_t redrawn = 0;  ///< resamples on which the metric threw and were redrawn
};

using MetricFn = std::function<double(std::span<const double>, std::span<const int>)>;

namespace metrics_detail {

/// Indices of a class-stratified resample of the cohort.
inline std::vector<std::size_t> stratified_resample(const std::vector<std::size_t>& pos,
                                                    const std::vector<std::size_t>& neg, Rng& rng) {
    std::vector<std::size_t> idx;
    idx.reserve(pos.size() + neg.size());
    for (std::size_t k = 0; k < pos.size(); ++k) idx.push_back(pos[rng.below(pos.size())]);
    for (std::size_t k = 0; k < neg.size(); ++k) idx.push_back(neg[rng.below(neg.size())]);
    return idx;
}

inline void split_classes(std::span<const int> labels, std::vector<std::size_t>& pos, std::vector<std::size_t>& neg) {
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
}

}  // namespace metrics_detail

/// Percentile bootstrap (2.5 / 97.5, linear interpolation) over stratified
/// case resamples. Resample b draws from derive_seed(seed, b); a failing
/// resample is redrawn from derive_seed of that seed and the attempt number.
/// More than n_boot redraws in total is an error.
inline Interval bootstrap_ci(const MetricFn& metric, std::span<const double> scores, std::span<const int> labels,
                             std::size_t n_boot, std::uint64_t seed, double level = 0.95) {
    metrics_detail::check_aligned(scores.size(), labels.size(), "bootstrap_ci");
    if (n_boot < 2) throw DomainError("bootstrap_ci: need at least 2 resamples");
    metrics_detail::class_counts(labels, "bootstrap_ci");
    std::vector<std::size_t> pos, neg;
    metrics_detail::split_classes(labels, pos, neg);

    std::vector<double> values(n_boot);
    std::vector<std::size_t> redraws(n_boot, 0);
    parallel_for(n_boot, [&](std::size_t b) {
        const std::uint64_t base = derive_seed(seed, b);
        for (std::uint64_t attempt = 0;; ++attempt) {
            Rng rng(attempt == 0 ? base : derive_seed(base, attempt));
            const auto idx = metrics_detail::stratified_resample(pos, neg, rng);
            std::vector<double> s(idx.size());
            std::vector<int> y(idx.size());
            for (std::size_t k = 0; k < idx.size(); ++k) {
                s[k] = scores[idx[k]];
                y[k] = labels[idx[k]];
            }
            try {
                values[b] = metric(s, y);
                if (!std::isfinite(values[b])) throw DomainError("non-finite metric");
                return;
            } catch (const Error&) {
                if (++redraws[b] > n_boot) throw;
            }
        }
    });
    Interval out;
    out.redrawn = std::accumulate(redraws.begin(), redraws.end(), std::size_t{0});
    if (out.redrawn > n_boot) throw DomainError("bootstrap_ci: metric failed on too many resamples");
    std::sort(values.begin(), values.end());
    const double tail = (1.0 - level) / 2.0 * 100.0;
    out.low = stats::percentile_sorted(values, tail);
    out.high = stats::percentile_sorted(values, 100.0 - tail);
    return out;
}

struct Comparison {
    double auc_old = 0.0;
    double auc_new = 0.0;
    double delta_auc = 0.0;
    double delta_sd = 0.0;  ///< bootstrap sd of the AUC difference
    double p_value = 1.0;
    double nri = 0.0;
    double nri_events = 0.0;
    double nri_nonevents = 0.0;
    double idi = 0.0;
    std::size_t n_boot = 0;
};

/// Category-free NRI split into its event and non-event components.
inline std::pair<double, double> continuous_nri(std::span<const double> old_p, std::span<const double> new_p,
                                                std::span<const int> labels) {
    metrics_detail::check_aligned(old_p.size(), new_p.size(), "continuous_nri");
    metrics_detail::check_aligned(old_p.size(), labels.size(), "continuous_nri");
    const auto [pos, neg] = metrics_detail::class_counts(labels, "continuous_nri");
    long ev = 0, nev = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int move = (new_p[i] > old_p[i]) - (new_p[i] < old_p[i]);
        if (labels[i] == 1)
            ev += move;
        else
            nev -= move;
    }
    return {static_cast<double>(ev) / static_cast<double>(pos), static_cast<double>(nev) / static_cast<double>(neg)};
}

/// Two-category NRI: reclassification across a single risk threshold
/// (high risk iff p >= threshold).
inline double categorical_nri(std::span<const double> old_p, std::span<const double> new_p,
                              std::span<const int> labels, double threshold) {
    metrics_detail::check_aligned(old_p.size(), new_p.size(), "categorical_nri");
    metrics_detail::check_aligned(old_p.size(), labels.size(), "categorical_nri");
    const auto [pos, neg] = metrics_detail::class_counts(labels, "categorical_nri");
    long ev = 0, nev = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int move = static_cast<int>(new_p[i] >= threshold) - static_cast<int>(old_p[i] >= threshold);
        if (labels[i] == 1)
            ev += move;
        else
            nev -= move;
    }
    return static_cast<double>(ev) / static_cast<double>(pos) + static_cast<double>(nev) / static_cast<double>(neg);
}

inline double idi(std::span<const double> old_p, std::span<const double> new_p, std::span<const int> labels) {
    metrics_detail::check_aligned(old_p.size(), new_p.size(), "idi");
    metrics_detail::check_aligned(old_p.size(), labels.size(), "idi");
    const auto [pos, neg] = metrics_detail::class_counts(labels, "idi");
    double dn_ev = 0.0, dn_nev = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double d = new_p[i] - old_p[i];
        (labels[i] == 1 ? dn_ev : dn_nev) += d;
    }
    return dn_ev / static_cast<double>(pos) - dn_nev / static_cast<double>(neg);
}

/// Paired comparison of two probability vectors on the same cases. The
/// p-value for the AUC difference is two-sided normal, using the sd of the
/// difference over paired stratified bootstrap resamples (0 sd: p = 1 when
/// the difference is 0, else 0).
inline Comparison compare_models(std::span<const double> old_p, std::span<const double> new_p,
                                 std::span<const int> labels, std::size_t n_boot, std::uint64_t seed) {
    metrics_detail::check_aligned(old_p.size(), new_p.size(), "compare_models");
    metrics_detail::check_aligned(old_p.size(), labels.size(), "compare_models");
    if (n_boot < 2) throw DomainError("compare_models: need at least 2 resamples");
    Comparison c;
    c.n_boot = n_boot;
    c.auc_old = roc_auc(old_p, labels);
    c.auc_new = roc_auc(new_p, labels);
    c.delta_auc = c.auc_new - c.auc_old;
    std::tie(c.nri_events, c.nri_nonevents) = continuous_nri(old_p, new_p, labels);
    c.nri = c.nri_events + c.nri_nonevents;
    c.idi = idi(old_p, new_p, labels);

    std::vector<std::size_t> pos, neg;
    metrics_detail::split_classes(labels, pos, neg);
    std::vector<double> deltas(n_boot);
    parallel_for(n_boot, [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        const auto idx = metrics_detail::stratified_resample(pos, neg, rng);
        std::vector<double> so(idx.size()), sn(idx.size());
        std::vector<int> y(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            so[k] = old_p[idx[k]];
            sn[k] = new_p[idx[k]];
            y[k] = labels[idx[k]];
        }
        deltas[b] = roc_auc(sn, y) - roc_auc(so, y);
    });
    c.delta_sd = stats::sample_sd(deltas);
    if (c.delta_sd > 0.0)
        c.p_value = stats::two_sided_p(c.delta_auc / c.delta_sd);
    else
        c.p_value = c.delta_auc == 0.0 ? 1.0 : 0.0;
    return c;
}

/// 2|A and B| / (|A| + |B|); two empty masks score 1.
inline double dice(const Mask& a, const Mask& b) {
    require_aligned(a.grid(), b.grid(), "dice");
    std::size_t both = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.grid().size(); ++i) {
        na += a.at(i);
        nb += b.at(i);
        both += a.at(i) && b.at(i);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

/// Masked voxels with at least one of the 6 face neighbours unmasked or outside the grid.
inline std::vector<Index3> boundary_voxels(const Mask& m) {
    static constexpr std::array<Index3, 6> kFaces{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
    std::vector<Index3> out;
    const auto& g = m.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!m.at(i)) continue;
        const auto p = g.coords(i);
        for (const auto& f : kFaces) {
            if (!m.at(Index3{p[0] + f[0], p[1] + f[1], p[2] + f[2]})) {
                out.push_back(p);
                break;
            }
        }
    }
    return out;
}

namespace metrics_detail {

inline double dist2(const Index3& a, const Index3& b, const std::array<double, 3>& sp) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double d = static_cast<double>(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) *
                         sp[static_cast<std::size_t>(k)];
        s += d * d;
    }
    return s;
}

/// Squared directed Hausdorff distance with the early-break scan: an inner
/// loop stops as soon as a point closer than the running maximum is found,
/// since that source point can no longer raise the maximum.
inline double directed_hd2(const std::vector<Index3>& from, const std::vector<Index3>& to,
                           const std::array<double, 3>& sp) {
    double cmax = 0.0;
    for (const auto& a : from) {
        double cmin = std::numeric_limits<double>::infinity();
        for (const auto& b : to) {
            const double d = dist2(a, b, sp);
            if (d < cmax) {
                cmin = d;
                break;
            }
            cmin = std::min(cmin, d);
        }
        cmax = std::max(cmax, cmin);
    }
    return cmax;
}

}  // namespace metrics_detail

/// Symmetric Hausdorff distance in mm between boundary-voxel centres.
inline double hausdorff(const Mask& a, const Mask& b) {
    require_aligned(a.grid(), b.grid(), "hausdorff");
    if (a.empty() || b.empty()) throw EmptyRegionError("hausdorff: undefined for an empty mask");
    const auto ba = boundary_voxels(a), bb = boundary_voxels(b);
    const auto& sp = a.grid().spacing;
    return std::sqrt(std::max(metrics_detail::directed_hd2(ba, bb, sp), metrics_detail::directed_hd2(bb, ba, sp)));
}

}  // namespace eatrad
