#pragma once

// One CART engine shared by the forest, the boosted stumps and the three
// gradient-boosting variants. Each sample carries two additive statistics
// (a, b); a criterion scores a node from their sums and the split gain is
// score(left) + score(right) - score(parent).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "eatrad/ensemble/blob.hpp"
#include "eatrad/random.hpp"
#include "eatrad/stats.hpp"

namespace eatrad::ensemble {

using Matrix = std::vector<std::vector<double>>;  // rows are samples

enum class SplitCriterion : std::uint8_t {
    gini,           ///< a = w, b = w*y
    squared_error,  ///< a = w, b = w*r
    newton,         ///< a = w*hessian, b = w*gradient
};

struct TreeParams {
    SplitCriterion criterion = SplitCriterion::gini;
    int max_depth = 3;
    std::size_t min_samples_leaf = 1;
    double min_child_weight = 0.0;  ///< lower bound on the `a` sum of each child
    double lambda = 0.0;            ///< newton criterion only
    std::size_t max_features = 0;   ///< features tried per node; 0 means all
    /// Optional per-feature split candidates (histogram mode). A split at edge
    /// e sends x <= e to the left child.
    const std::vector<std::vector<double>>* edges = nullptr;
};

struct TreeNode {
    std::int32_t feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
};

class Tree {
public:
    [[nodiscard]] double predict(std::span<const double> x) const {
        std::size_t i = 0;
        while (nodes_[i].feature >= 0) {
            const auto& n = nodes_[i];
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
        return nodes_[i].value;
    }

    [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::vector<TreeNode>& nodes() noexcept { return nodes_; }

    void save(BlobWriter& w) const {
        w.u64(nodes_.size());
        for (const auto& n : nodes_) {
            w.i32(n.feature);
            w.f64(n.threshold);
            w.i32(n.left);
            w.i32(n.right);
            w.f64(n.value);
        }
    }

    static Tree load(BlobReader& r) {
        Tree t;
        const auto n = r.length(24);
        if (n == 0) throw FormatError("empty tree", r.offset());
        t.nodes_.resize(n);
        for (auto& node : t.nodes_) {
            node.feature = r.i32();
            node.threshold = r.f64();
            node.left = r.i32();
            node.right = r.i32();
            node.value = r.f64();
        }
        const auto count = static_cast<std::int32_t>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& node = t.nodes_[i];
            if (node.feature < 0) continue;
            // children always follow their parent, which also rules out cycles
            const auto self = static_cast<std::int32_t>(i);
            if (node.left <= self || node.right <= self || node.left >= count || node.right >= count)
                throw FormatError("corrupt tree links", r.offset());
        }
        return t;
    }

private:
    std::vector<TreeNode> nodes_;
};

namespace tree_detail {

inline double score(SplitCriterion c, double a, double b, double lambda) {
    switch (c) {
        case SplitCriterion::gini:
            return a > 0.0 ? (b * b + (a - b) * (a - b)) / a - a : 0.0;
        case SplitCriterion::squared_error:
            return a > 0.0 ? b * b / a : 0.0;
        case SplitCriterion::newton:
            return a + lambda > 0.0 ? b * b / (a + lambda) : 0.0;
    }
    return 0.0;
}

/// Midpoint strictly below `hi`, so training and prediction agree on the side.
inline double midpoint(double lo, double hi) {
    const double m = lo + (hi - lo) / 2.0;
    return m < hi ? m : lo;
}

template <typename LeafFn>
class Builder {
public:
    Builder(const Matrix& x, const std::vector<double>& a, const std::vector<double>& b, const TreeParams& p,
            Rng* rng, LeafFn& leaf)
        : x_(x), a_(a), b_(b), p_(p), rng_(rng), leaf_(leaf) {
        features_.resize(x.empty() ? 0 : x.front().size());
        std::iota(features_.begin(), features_.end(), std::size_t{0});
    }

    Tree run(std::vector<std::size_t> idx) {
        grow(idx, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        double gain = 1e-12;  // anything at or below this is noise
        std::size_t feature = 0;
        double threshold = 0.0;
        bool found = false;
    };

    std::int32_t grow(std::vector<std::size_t>& idx, int depth) {
        const auto self = static_cast<std::int32_t>(tree_.nodes().size());
        tree_.nodes().emplace_back();
        const Split s = depth < p_.max_depth ? best_split(idx) : Split{};
        if (!s.found) {
            tree_.nodes()[static_cast<std::size_t>(self)].value = leaf_(std::span<const std::size_t>(idx));
            return self;
        }
        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) (x_[i][s.feature] <= s.threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        auto& node = tree_.nodes()[static_cast<std::size_t>(self)];
        node.feature = static_cast<std::int32_t>(s.feature);
        node.threshold = s.threshold;
        node.left = l;
        node.right = r;
        return self;
    }

    Split best_split(const std::vector<std::size_t>& idx) {
        Split best;
        const std::size_t n = idx.size();
        if (n < 2 * std::max<std::size_t>(1, p_.min_samples_leaf)) return best;
        double a_tot = 0.0, b_tot = 0.0;
        for (std::size_t i : idx) {
            a_tot += a_[i];
            b_tot += b_[i];
        }
        const double parent = score(p_.criterion, a_tot, b_tot, p_.lambda);

        std::size_t n_try = features_.size();
        if (p_.max_features > 0 && p_.max_features < features_.size() && rng_ != nullptr) {
            n_try = p_.max_features;
            for (std::size_t k = 0; k < n_try; ++k) {
                const auto j = k + static_cast<std::size_t>(rng_->below(features_.size() - k));
                std::swap(features_[k], features_[j]);
            }
        }

        std::vector<std::size_t> order(idx);
        std::vector<double> pa(n + 1), pb(n + 1);
        for (std::size_t t = 0; t < n_try; ++t) {
            const std::size_t f = features_[t];
            std::sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) {
                const double xu = x_[u][f], xv = x_[v][f];
                return xu < xv || (xu == xv && u < v);
            });
            pa[0] = pb[0] = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                pa[k + 1] = pa[k] + a_[order[k]];
                pb[k + 1] = pb[k] + b_[order[k]];
            }
            auto consider = [&](std::size_t k, double thr) {  // left = first k samples
                if (k < p_.min_samples_leaf || n - k < p_.min_samples_leaf) return;
                const double al = pa[k], bl = pb[k], ar = a_tot - al, br = b_tot - bl;
                if (al < p_.min_child_weight || ar < p_.min_child_weight) return;
                const double gain =
                    score(p_.criterion, al, bl, p_.lambda) + score(p_.criterion, ar, br, p_.lambda) - parent;
                if (gain > best.gain) best = {gain, f, thr, true};
            };
            if (p_.edges == nullptr) {
                for (std::size_t k = 1; k < n; ++k) {
                    const double lo = x_[order[k - 1]][f], hi = x_[order[k]][f];
                    if (lo < hi) consider(k, midpoint(lo, hi));
                }
            } else {
                std::size_t k = 0;
                for (double e : (*p_.edges)[f]) {
                    while (k < n && x_[order[k]][f] <= e) ++k;
                    if (k == 0) continue;
                    if (k == n) break;
                    consider(k, e);
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<double>& a_;
    const std::vector<double>& b_;
    const TreeParams& p_;
    Rng* rng_;
    LeafFn& leaf_;
    std::vector<std::size_t> features_;
    Tree tree_;
};

}  // namespace tree_detail

/// Grows a tree on the samples listed in `idx` (repeats allowed, as in a
/// bootstrap). `leaf(span of sample ids)` returns the value stored in a leaf.
template <typename LeafFn>
Tree build_tree(const Matrix& x, const std::vector<double>& a, const std::vector<double>& b,
                std::vector<std::size_t> idx, const TreeParams& params, Rng* rng, LeafFn leaf) {
    tree_detail::Builder<LeafFn> builder(x, a, b, params, rng, leaf);
    return builder.run(std::move(idx));
}

/// Up to `max_bins - 1` split edges per feature from the training quantiles.
/// With few distinct values the edges are the midpoints between them.
inline std::vector<std::vector<double>> quantile_edges(const Matrix& x, std::size_t max_bins) {
    const std::size_t p = x.empty() ? 0 : x.front().size();
    std::vector<std::vector<double>> edges(p);
    for (std::size_t f = 0; f < p; ++f) {
        std::vector<double> v;
        v.reserve(x.size());
        for (const auto& row : x) v.push_back(row[f]);
        std::sort(v.begin(), v.end());
        std::vector<double> distinct = v;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        auto& e = edges[f];
        if (distinct.size() <= max_bins) {
            for (std::size_t k = 1; k < distinct.size(); ++k)
                e.push_back(tree_detail::midpoint(distinct[k - 1], distinct[k]));
        } else {
            for (std::size_t k = 1; k < max_bins; ++k) {
                const double q = stats::percentile_sorted(v, 100.0 * static_cast<double>(k) / static_cast<double>(max_bins));
                if (e.empty() || q > e.back()) e.push_back(q);
            }
        }
    }
    return edges;
}

}  // namespace eatrad::ensemble
