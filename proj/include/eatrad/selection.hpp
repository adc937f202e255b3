#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eatrad/error.hpp"
#include "eatrad/metrics.hpp"
#include "eatrad/parallel.hpp"
#include "eatrad/stats.hpp"

namespace eatrad {

/// Cases in rows, named feature columns, 0/1 labels (0 mild, 1 severe).
class FeatureTable {
public:
    FeatureTable() = default;
    FeatureTable(std::vector<std::string> case_ids, std::vector<int> labels, std::string cohort = {})
        : case_ids_(std::move(case_ids)), labels_(std::move(labels)), cohort_(std::move(cohort)) {
        if (case_ids_.size() != labels_.size()) throw ManifestError("feature table: case ids and labels differ in length");
        for (int y : labels_)
            if (y != 0 && y != 1) throw ManifestError("feature table: labels must be 0 or 1");
    }

    void add_column(const std::string& name, std::vector<double> values) {
        if (values.size() != rows()) {
            throw ManifestError("feature table: column '" + name + "' has " + std::to_string(values.size()) +
                                " values for " + std::to_string(rows()) + " cases");
        }
        for (double v : values)
            if (!std::isfinite(v)) throw ManifestError("feature table: column '" + name + "' has a missing value");
        if (index_.count(name)) throw ManifestError("feature table: duplicate column '" + name + "'");
        index_.emplace(name, names_.size());
        names_.push_back(name);
        columns_.push_back(std::move(values));
    }

    [[nodiscard]] std::size_t rows() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] const std::vector<std::string>& case_ids() const noexcept { return case_ids_; }
    [[nodiscard]] const std::vector<int>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::string& cohort() const noexcept { return cohort_; }
    [[nodiscard]] bool has(const std::string& name) const { return index_.count(name) != 0; }

    [[nodiscard]] std::size_t index_of(const std::string& name) const {
        const auto it = index_.find(name);
        if (it == index_.end()) throw ManifestError("feature table: no column '" + name + "'");
        return it->second;
    }
    [[nodiscard]] std::span<const double> column(std::size_t k) const { return columns_.at(k); }
    [[nodiscard]] std::span<const double> column(const std::string& name) const { return columns_[index_of(name)]; }

    [[nodiscard]] std::size_t count_label(int y) const {
        return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), y));
    }

    /// Throws unless both classes have at least two cases.
    void require_fittable(const char* what) const {
        if (count_label(0) < 2 || count_label(1) < 2) {
            throw DomainError(std::string(what) + ": need at least 2 cases of each class (have " +
                              std::to_string(count_label(0)) + " mild, " + std::to_string(count_label(1)) +
                              " severe)");
        }
    }

    /// Rows as dense feature vectors over `features`, in that order.
    [[nodiscard]] std::vector<std::vector<double>> matrix(const std::vector<std::string>& features) const {
        std::vector<std::size_t> idx;
        for (const auto& f : features) idx.push_back(index_of(f));
        std::vector<std::vector<double>> out(rows(), std::vector<double>(idx.size()));
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t c = 0; c < idx.size(); ++c) out[r][c] = columns_[idx[c]][r];
        return out;
    }

private:
    std::vector<std::string> case_ids_;
    std::vector<int> labels_;
    std::string cohort_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    std::map<std::string, std::size_t> index_;
};

struct LogisticTest {
    double coef = 0.0;  ///< slope per standard deviation of the feature; +-inf under separation
    double intercept = 0.0;
    double std_error = std::numeric_limits<double>::infinity();
    double p_value = 1.0;
    bool separated = false;
    bool degenerate = false;  ///< constant feature
    bool converged = true;
    int iterations = 0;
};

/// Two-parameter logistic fit on the z-scored feature by IRLS, Wald test on
/// the slope. Complete or quasi-complete separation (the classes' ranges
/// overlap in at most one point) is reported as p = 0 with an infinite slope.
inline LogisticTest univariate_logistic(std::span<const double> x, std::span<const int> y) {
    metrics_detail::check_aligned(x.size(), y.size(), "univariate_logistic");
    metrics_detail::class_counts(y, "univariate_logistic");
    LogisticTest out;
    const double mu = stats::mean(x), sd = stats::pop_sd(x);
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        out.degenerate = true;
        return out;
    }
    double max0 = -std::numeric_limits<double>::infinity(), min0 = std::numeric_limits<double>::infinity();
    double max1 = max0, min1 = min0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] == 1) {
            max1 = std::max(max1, x[i]);
            min1 = std::min(min1, x[i]);
        } else {
            max0 = std::max(max0, x[i]);
            min0 = std::min(min0, x[i]);
        }
    }
    if (max0 <= min1 || max1 <= min0) {
        out.separated = true;
        out.p_value = 0.0;
        out.std_error = 0.0;
        out.coef = (max0 <= min1 ? 1.0 : -1.0) * std::numeric_limits<double>::infinity();
        return out;
    }

    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mu) / sd;
    Eigen::Vector2d beta = Eigen::Vector2d::Zero();
    Eigen::Matrix2d info;
    constexpr int kMaxIter = 100;
    out.converged = false;
    for (int it = 1; it <= kMaxIter; ++it) {
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        info.setZero();
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double p = stats::sigmoid(beta(0) + beta(1) * z[i]);
            const double w = p * (1.0 - p);
            const double r = static_cast<double>(y[i]) - p;
            grad(0) += r;
            grad(1) += r * z[i];
            info(0, 0) += w;
            info(0, 1) += w * z[i];
            info(1, 1) += w * z[i] * z[i];
        }
        info(1, 0) = info(0, 1);
        const Eigen::Vector2d step = info.ldlt().solve(grad);
        if (!step.allFinite()) break;
        beta += step;
        out.iterations = it;
        if (step.cwiseAbs().maxCoeff() < 1e-10) {
            out.converged = true;
            break;
        }
    }
    // information at the final estimate
    info.setZero();
    for (double zi : z) {
        const double p = stats::sigmoid(beta(0) + beta(1) * zi);
        const double w = p * (1.0 - p);
        info(0, 0) += w;
        info(0, 1) += w * zi;
        info(1, 1) += w * zi * zi;
    }
    info(1, 0) = info(0, 1);
    const double det = info.determinant();
    out.intercept = beta(0);
    out.coef = beta(1);
    if (det > 0.0) {
        out.std_error = std::sqrt(info(0, 0) / det);
        out.p_value = stats::two_sided_p(out.coef / out.std_error);
    }
    return out;
}

/// Mann-Whitney AUC of the raw feature, folded to max(a, 1 - a).
inline double univariate_auc(std::span<const double> x, std::span<const int> y) {
    const double a = roc_auc(x, y);
    return std::max(a, 1.0 - a);
}

struct SelectionParams {
    double alpha = 0.05;
    double corr_threshold = 0.75;
    std::size_t max_k = 10;
};

struct FeatureScreen {
    std::string name;
    double auc = 0.5;
    LogisticTest logistic;
    bool kept = false;
    std::string drop_reason;   ///< "", "not_significant", "correlated", "rank_cutoff"
    std::string correlated_with;
    double correlation = 0.0;  ///< Pearson r with `correlated_with`
};

struct SelectionReport {
    SelectionParams params;
    std::vector<FeatureScreen> features;  ///< ordered by AUC descending, then name
    std::vector<std::string> selected;    ///< final ordered list
    std::vector<std::string> warnings;
};

/// Screening, AUC ranking, greedy correlation pruning, truncation.
inline SelectionReport select_features(const FeatureTable& t, const SelectionParams& params = {}) {
    t.require_fittable("select_features");
    if (!(params.alpha > 0.0) || !(params.corr_threshold > 0.0)) {
        throw DomainError("select_features: alpha and corr_threshold must be positive");
    }
    SelectionReport rep;
    rep.params = params;
    const auto& y = t.labels();
    rep.features.resize(t.cols());
    parallel_for(t.cols(), [&](std::size_t k) {
        auto& f = rep.features[k];
        f.name = t.names()[k];
        f.auc = univariate_auc(t.column(k), y);
        f.logistic = univariate_logistic(t.column(k), y);
    });
    std::sort(rep.features.begin(), rep.features.end(), [](const FeatureScreen& a, const FeatureScreen& b) {
        if (a.auc != b.auc) return a.auc > b.auc;
        return a.name < b.name;
    });

    std::vector<std::size_t> kept;  // indices into rep.features
    for (std::size_t k = 0; k < rep.features.size(); ++k) {
        auto& f = rep.features[k];
        if (!(f.logistic.p_value < params.alpha)) {
            f.drop_reason = "not_significant";
            continue;
        }
        const auto col = t.column(f.name);
        bool dropped = false;
        for (std::size_t j : kept) {
            const double r = stats::pearson(col, t.column(rep.features[j].name));
            if (std::abs(r) >= params.corr_threshold) {
                f.drop_reason = "correlated";
                f.correlated_with = rep.features[j].name;
                f.correlation = r;
                dropped = true;
                break;
            }
        }
        if (dropped) continue;
        if (kept.size() >= params.max_k) {
            f.drop_reason = "rank_cutoff";
            continue;
        }
        f.kept = true;
        kept.push_back(k);
        rep.selected.push_back(f.name);
    }
    if (rep.selected.empty()) rep.warnings.push_back("no feature reached p < alpha; selection is empty");
    return rep;
}

}  // namespace eatrad
