#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eatrad/ensemble/blob.hpp"
#include "eatrad/ensemble/tree.hpp"
#include "eatrad/error.hpp"
#include "eatrad/random.hpp"
#include "eatrad/stats.hpp"

namespace eatrad::ensemble {

enum class LearnerKind : std::uint8_t {
    logistic,
    linear_svm,
    random_forest,
    adaboost,
    gbdt,
    gbdt_regularized,
    gbdt_histogram,
};

inline constexpr std::array<LearnerKind, 7> kAllKinds{
    LearnerKind::logistic, LearnerKind::linear_svm,       LearnerKind::random_forest, LearnerKind::adaboost,
    LearnerKind::gbdt,     LearnerKind::gbdt_regularized, LearnerKind::gbdt_histogram,
};

inline const char* to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::logistic: return "logistic";
        case LearnerKind::linear_svm: return "linear_svm";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::adaboost: return "adaboost";
        case LearnerKind::gbdt: return "gbdt";
        case LearnerKind::gbdt_regularized: return "gbdt_regularized";
        case LearnerKind::gbdt_histogram: return "gbdt_histogram";
    }
    return "?";
}

inline LearnerKind parse_learner_kind(const std::string& s) {
    for (auto k : kAllKinds)
        if (s == to_string(k)) return k;
    throw UsageError("unknown learner kind '" + s + "'");
}

/// Hyperparameters. Each learner reads only the fields that concern it.
struct Hyperparams {
    double logistic_c = 1.0;  ///< inverse L2 strength
    int logistic_max_iter = 100;

    double svm_lambda = 0.01;
    int svm_epochs = 2000;

    int forest_trees = 100;
    int forest_max_depth = 12;
    std::size_t forest_min_leaf = 1;

    int ada_rounds = 50;
    double ada_clip = 1e-6;

    int boost_rounds = 100;
    double boost_learning_rate = 0.1;
    int gbdt_max_depth = 3;
    int xgb_max_depth = 4;
    double xgb_lambda = 1.0;
    double xgb_min_child_weight = 1e-3;
    int hist_max_depth = 4;
    std::size_t hist_bins = 32;
    std::size_t hist_min_child_samples = 5;
    double hist_lambda = 1e-3;

    bool class_weighted = true;
};

/// Training view: standardized rows, 0/1 labels, per-sample weights.
struct Dataset {
    Matrix x;
    std::vector<int> y;
    std::vector<double> w;

    [[nodiscard]] std::size_t rows() const noexcept { return y.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return x.empty() ? 0 : x.front().size(); }
};

/// w_i = n / (2 n_class(i)), so both classes carry equal total weight.
inline std::vector<double> balanced_weights(const std::vector<int>& y) {
    const auto n1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const auto n0 = static_cast<double>(y.size()) - n1;
    const auto n = static_cast<double>(y.size());
    std::vector<double> w(y.size(), 1.0);
    if (n0 == 0 || n1 == 0) return w;
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] == 1 ? n / (2.0 * n1) : n / (2.0 * n0);
    return w;
}

class Learner {
public:
    explicit Learner(LearnerKind k) : kind_(k) {}
    virtual ~Learner() = default;
    Learner(const Learner&) = delete;
    Learner& operator=(const Learner&) = delete;

    [[nodiscard]] LearnerKind kind() const noexcept { return kind_; }

    /// Probability of the severe class, in [0, 1].
    [[nodiscard]] double predict_proba(std::span<const double> x) const {
        if (constant_) return constant_value_;
        return std::clamp(predict_raw(x), 0.0, 1.0);
    }

    void fit(const Dataset& d, std::uint64_t seed) {
        if (d.rows() == 0) throw DomainError(std::string(to_string(kind_)) + ": no training rows");
        const auto n1 = std::count(d.y.begin(), d.y.end(), 1);
        if (n1 == 0 || static_cast<std::size_t>(n1) == d.rows()) {
            // one class only: predict it with certainty
            constant_ = true;
            constant_value_ = n1 == 0 ? 0.0 : 1.0;
            return;
        }
        constant_ = false;
        fit_impl(d, seed);
    }

    [[nodiscard]] bool converged() const noexcept { return converged_; }
    [[nodiscard]] const std::string& warning() const noexcept { return warning_; }

    void save(BlobWriter& w) const {
        w.str(to_string(kind_));
        w.u8(constant_ ? 1 : 0);
        w.f64(constant_value_);
        w.u8(converged_ ? 1 : 0);
        w.str(warning_);
        save_impl(w);
    }

    void load_state(BlobReader& r) {
        constant_ = r.u8() != 0;
        constant_value_ = r.f64();
        converged_ = r.u8() != 0;
        warning_ = r.str();
        load_impl(r);
    }

protected:
    virtual void fit_impl(const Dataset& d, std::uint64_t seed) = 0;
    [[nodiscard]] virtual double predict_raw(std::span<const double> x) const = 0;
    virtual void save_impl(BlobWriter& w) const = 0;
    virtual void load_impl(BlobReader& r) = 0;

    void flag_nonconvergence(const std::string& why) {
        converged_ = false;
        warning_ = why;
    }

private:
    LearnerKind kind_;
    bool constant_ = false;
    double constant_value_ = 0.5;
    bool converged_ = true;
    std::string warning_;
};

namespace learner_detail {

inline double dot(const std::vector<double>& w, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
    return s;
}

inline double log_odds(double p) { return std::log(p / (1.0 - p)); }

/// Weighted class-1 fraction over the listed samples.
inline double weighted_fraction(const Dataset& d, std::span<const std::size_t> idx, const std::vector<double>& w) {
    double num = 0.0, den = 0.0;
    for (std::size_t i : idx) {
        num += w[i] * d.y[i];
        den += w[i];
    }
    return den > 0.0 ? num / den : 0.5;
}

}  // namespace learner_detail

/// L2-penalized logistic regression (intercept unpenalized) by IRLS.
class LogisticLearner final : public Learner {
public:
    explicit LogisticLearner(const Hyperparams& h) : Learner(LearnerKind::logistic), h_(h) {}

    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return beta_; }

protected:
    void fit_impl(const Dataset& d, std::uint64_t) override {
        const auto n = d.rows(), p = d.cols();
        Eigen::MatrixXd X(n, p + 1);
        for (std::size_t i = 0; i < n; ++i) {
            X(static_cast<Eigen::Index>(i), 0) = 1.0;
            for (std::size_t j = 0; j < p; ++j)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = d.x[i][j];
        }
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
        Eigen::VectorXd penalty = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p + 1), 1.0 / h_.logistic_c);
        penalty(0) = 0.0;
        bool done = false;
        for (int it = 0; it < h_.logistic_max_iter && !done; ++it) {
            const Eigen::VectorXd eta = X * beta;
            Eigen::VectorXd grad = -penalty.cwiseProduct(beta);
            Eigen::MatrixXd hess = penalty.asDiagonal();
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                const double pr = stats::sigmoid(eta(r));
                grad += d.w[i] * (d.y[i] - pr) * X.row(r).transpose();
                hess.noalias() += d.w[i] * pr * (1.0 - pr) * X.row(r).transpose() * X.row(r);
            }
            const Eigen::VectorXd step = hess.ldlt().solve(grad);
            if (!step.allFinite()) break;
            beta += step;
            done = step.cwiseAbs().maxCoeff() < 1e-10;
        }
        if (!done) flag_nonconvergence("logistic: IRLS hit the iteration cap");
        beta_.assign(beta.data(), beta.data() + beta.size());
    }

    [[nodiscard]] double predict_raw(std::span<const double> x) const override {
        double eta = beta_[0];
        for (std::size_t j = 0; j + 1 < beta_.size(); ++j) eta += beta_[j + 1] * x[j];
        return stats::sigmoid(eta);
    }

    void save_impl(BlobWriter& w) const override { w.f64s(beta_); }
    void load_impl(BlobReader& r) override { beta_ = r.f64s(); }

private:
    Hyperparams h_;
    std::vector<double> beta_;
};

/// Linear SVM: weighted hinge loss + (lambda/2)|w|^2 minimized by full-batch
/// subgradient descent with step 1/(lambda t); the returned hyperplane is the
/// average of the second half of the iterates. Probabilities come from a
/// Platt sigmoid fitted on the training decision values with smoothed targets.
class LinearSvmLearner final : public Learner {
public:
    explicit LinearSvmLearner(const Hyperparams& h) : Learner(LearnerKind::linear_svm), h_(h) {}

    [[nodiscard]] double decision(std::span<const double> x) const { return learner_detail::dot(w_, x) + b_; }

protected:
    void fit_impl(const Dataset& d, std::uint64_t) override {
        const auto n = d.rows(), p = d.cols();
        const double lambda = h_.svm_lambda;
        double wsum = 0.0;
        for (double v : d.w) wsum += v;
        std::vector<double> w(p, 0.0), avg_w(p, 0.0), g(p);
        double b = 0.0, avg_b = 0.0;
        const int epochs = h_.svm_epochs, burn = epochs / 2;
        for (int t = 1; t <= epochs; ++t) {
            for (std::size_t j = 0; j < p; ++j) g[j] = lambda * w[j];
            double gb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = d.y[i] == 1 ? 1.0 : -1.0;
                if (s * (learner_detail::dot(w, d.x[i]) + b) < 1.0) {
                    const double c = d.w[i] / wsum;
                    for (std::size_t j = 0; j < p; ++j) g[j] -= c * s * d.x[i][j];
                    gb -= c * s;
                }
            }
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            for (std::size_t j = 0; j < p; ++j) w[j] -= eta * g[j];
            b -= eta * gb;
            if (t > burn) {
                for (std::size_t j = 0; j < p; ++j) avg_w[j] += w[j];
                avg_b += b;
            }
        }
        const auto kept = static_cast<double>(epochs - burn);
        for (auto& v : avg_w) v /= kept;
        w_ = std::move(avg_w);
        b_ = avg_b / kept;
        fit_platt(d);
    }

    [[nodiscard]] double predict_raw(std::span<const double> x) const override {
        return stats::sigmoid(platt_a_ * decision(x) + platt_b_);
    }

    void save_impl(BlobWriter& w) const override {
        w.f64s(w_);
        w.f64(b_);
        w.f64(platt_a_);
        w.f64(platt_b_);
    }
    void load_impl(BlobReader& r) override {
        w_ = r.f64s();
        b_ = r.f64();
        platt_a_ = r.f64();
        platt_b_ = r.f64();
    }

private:
    void fit_platt(const Dataset& d) {
        const auto n = d.rows();
        double npos = 0.0, nneg = 0.0;
        for (std::size_t i = 0; i < n; ++i) (d.y[i] == 1 ? npos : nneg) += d.w[i];
        const double hi = (npos + 1.0) / (npos + 2.0), lo = 1.0 / (nneg + 2.0);
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = decision(d.x[i]);
        double a = 1.0, c = 0.0;
        bool done = false;
        for (int it = 0; it < 100 && !done; ++it) {
            double g0 = 0, g1 = 0, h00 = 1e-12, h01 = 0, h11 = 1e-12;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = d.y[i] == 1 ? hi : lo;
                const double pr = stats::sigmoid(a * f[i] + c);
                const double r = d.w[i] * (t - pr), v = d.w[i] * pr * (1.0 - pr);
                g0 += r * f[i];
                g1 += r;
                h00 += v * f[i] * f[i];
                h01 += v * f[i];
                h11 += v;
            }
            const double det = h00 * h11 - h01 * h01;
            if (!(det > 0.0)) break;
            const double da = (h11 * g0 - h01 * g1) / det, dc = (h00 * g1 - h01 * g0) / det;
            a += da;
            c += dc;
            done = std::max(std::abs(da), std::abs(dc)) < 1e-10;
        }
        if (!done) flag_nonconvergence("linear_svm: Platt scaling hit the iteration cap");
        platt_a_ = a;
        platt_b_ = c;
    }

    Hyperparams h_;
    std::vector<double> w_;
    double b_ = 0.0;
    double platt_a_ = 1.0;
    double platt_b_ = 0.0;
};

/// Bootstrap forest of weighted-Gini CART trees with sqrt(p) features per split.
/// Leaves hold the weighted severe fraction; the forest averages them.
class RandomForestLearner final : public Learner {
public:
    explicit RandomForestLearner(const Hyperparams& h) : Learner(LearnerKind::random_forest), h_(h) {}

protected:
    void fit_impl(const Dataset& d, std::uint64_t seed) override {
        const auto n = d.rows();
        std::vector<double> a(d.w), b(n);
        for (std::size_t i = 0; i < n; ++i) b[i] = d.w[i] * d.y[i];
        TreeParams tp;
        tp.criterion = SplitCriterion::gini;
        tp.max_depth = h_.forest_max_depth;
        tp.min_samples_leaf = h_.forest_min_leaf;
        tp.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d.cols()))));
        trees_.clear();
        for (int t = 0; t < h_.forest_trees; ++t) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
            std::vector<std::size_t> idx(n);
            for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
            trees_.push_back(build_tree(d.x, a, b, std::move(idx), tp, &rng, [&](std::span<const std::size_t> s) {
                return learner_detail::weighted_fraction(d, s, d.w);
            }));
        }
    }

    [[nodiscard]] double predict_raw(std::span<const double> x) const override {
        double s = 0.0;
        for (const auto& t : trees_) s += t.predict(x);
        return s / static_cast<double>(trees_.size());
    }

    void save_impl(BlobWriter& w) const override {
        w.u64(trees_.size());
        for (const auto& t : trees_) t.save(w);
    }
    void load_impl(BlobReader& r) override {
        const auto n = r.length(8);
        trees_.clear();
        for (std::size_t k = 0; k < n; ++k) trees_.push_back(Tree::load(r));
    }

private:
    Hyperparams h_;
    std::vector<Tree> trees_;
};

/// Real-valued AdaBoost (SAMME.R, two classes) on depth-1 stumps. Each stump
/// leaf stores h = 0.5 * log(p / (1 - p)) of its clipped weighted severe
/// fraction; the probability is sigmoid(2 * mean h).
class AdaBoostLearner final : public Learner {
public:
    explicit AdaBoostLearner(const Hyperparams& h) : Learner(LearnerKind::adaboost), h_(h) {}

protected:
    void fit_impl(const Dataset& d, std::uint64_t) override {
        const auto n = d.rows();
        std::vector<double> w(d.w);
        double total = 0.0;
        for (double v : w) total += v;
        for (double& v : w) v /= total;
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        TreeParams tp;
        tp.criterion = SplitCriterion::gini;
        tp.max_depth = 1;
        stumps_.clear();
        std::vector<double> b(n);
        for (int m = 0; m < h_.ada_rounds; ++m) {
            for (std::size_t i = 0; i < n; ++i) b[i] = w[i] * d.y[i];
            auto stump = build_tree(d.x, w, b, all, tp, nullptr, [&](std::span<const std::size_t> s) {
                const double p = std::clamp(learner_detail::weighted_fraction(d, s, w), h_.ada_clip, 1.0 - h_.ada_clip);
                return 0.5 * learner_detail::log_odds(p);
            });
            double z = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = d.y[i] == 1 ? 1.0 : -1.0;
                w[i] *= std::exp(-s * stump.predict(d.x[i]));
                z += w[i];
            }
            stumps_.push_back(std::move(stump));
            if (!(z > 0.0) || !std::isfinite(z)) {
                flag_nonconvergence("adaboost: sample weights degenerated");
                break;
            }
            for (double& v : w) v /= z;
        }
    }

    [[nodiscard]] double predict_raw(std::span<const double> x) const override {
        double s = 0.0;
        for (const auto& t : stumps_) s += t.predict(x);
        return stats::sigmoid(2.0 * s / static_cast<double>(stumps_.size()));
    }

    void save_impl(BlobWriter& w) const override {
        w.u64(stumps_.size());
        for (const auto& t : stumps_) t.save(w);
    }
    void load_impl(BlobReader& r) override {
        const auto n = r.length(8);
        stumps_.clear();
        for (std::size_t k = 0; k < n; ++k) stumps_.push_back(Tree::load(r));
        if (stumps_.empty()) throw FormatError("adaboost without stumps", r.offset());
    }

private:
    Hyperparams h_;
    std::vector<Tree> stumps_;
};

/// Gradient boosting on the logistic loss. Three flavours share the loop:
///   gbdt              least-squares split on gradients, Newton leaf step
///   gbdt_regularized  second-order gain with L2 leaf shrinkage lambda
///   gbdt_histogram    second-order gain on quantile-binned split candidates
class BoostingLearner final : public Learner {
public:
    BoostingLearner(LearnerKind k, const Hyperparams& h) : Learner(k), h_(h) {
        if (k != LearnerKind::gbdt && k != LearnerKind::gbdt_regularized && k != LearnerKind::gbdt_histogram)
            throw UsageError("not a boosting kind");
    }

protected:
    void fit_impl(const Dataset& d, std::uint64_t) override {
        const auto n = d.rows();
        TreeParams tp;
        double lambda = 0.0;
        std::vector<std::vector<double>> edges;
        switch (kind()) {
            case LearnerKind::gbdt:
                tp.criterion = SplitCriterion::squared_error;
                tp.max_depth = h_.gbdt_max_depth;
                break;
            case LearnerKind::gbdt_regularized:
                tp.criterion = SplitCriterion::newton;
                tp.max_depth = h_.xgb_max_depth;
                tp.min_child_weight = h_.xgb_min_child_weight;
                lambda = h_.xgb_lambda;
                break;
            default:
                tp.criterion = SplitCriterion::newton;
                tp.max_depth = h_.hist_max_depth;
                tp.min_samples_leaf = h_.hist_min_child_samples;
                lambda = h_.hist_lambda;
                edges = quantile_edges(d.x, h_.hist_bins);
                tp.edges = &edges;
                break;
        }
        tp.lambda = lambda;

        double wpos = 0.0, wall = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            wpos += d.w[i] * d.y[i];
            wall += d.w[i];
        }
        base_ = learner_detail::log_odds(std::clamp(wpos / wall, 1e-6, 1.0 - 1e-6));
        std::vector<double> f(n, base_), a(n), b(n), grad(n), hess(n);
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        trees_.clear();
        for (int m = 0; m < h_.boost_rounds; ++m) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = stats::sigmoid(f[i]);
                grad[i] = d.w[i] * (p - d.y[i]);
                hess[i] = d.w[i] * p * (1.0 - p);
                if (tp.criterion == SplitCriterion::squared_error) {
                    a[i] = d.w[i];
                    b[i] = d.w[i] * (d.y[i] - p);
                } else {
                    a[i] = hess[i];
                    b[i] = grad[i];
                }
            }
            auto tree = build_tree(d.x, a, b, all, tp, nullptr, [&](std::span<const std::size_t> s) {
                double g = 0.0, h = 0.0;
                for (std::size_t i : s) {
                    g += grad[i];
                    h += hess[i];
                }
                const double step = -g / (h + lambda + 1e-12);
                return h_.boost_learning_rate * std::clamp(step, -10.0, 10.0);
            });
            for (std::size_t i = 0; i < n; ++i) f[i] += tree.predict(d.x[i]);
            trees_.push_back(std::move(tree));
        }
    }

    [[nodiscard]] double predict_raw(std::span<const double> x) const override {
        double f = base_;
        for (const auto& t : trees_) f += t.predict(x);
        return stats::sigmoid(f);
    }

    void save_impl(BlobWriter& w) const override {
        w.f64(base_);
        w.u64(trees_.size());
        for (const auto& t : trees_) t.save(w);
    }
    void load_impl(BlobReader& r) override {
        base_ = r.f64();
        const auto n = r.length(8);
        trees_.clear();
        for (std::size_t k = 0; k < n; ++k) trees_.push_back(Tree::load(r));
    }

private:
    Hyperparams h_;
    double base_ = 0.0;
    std::vector<Tree> trees_;
};

inline std::unique_ptr<Learner> make_learner(LearnerKind k, const Hyperparams& h = {}) {
    switch (k) {
        case LearnerKind::logistic: return std::make_unique<LogisticLearner>(h);
        case LearnerKind::linear_svm: return std::make_unique<LinearSvmLearner>(h);
        case LearnerKind::random_forest: return std::make_unique<RandomForestLearner>(h);
        case LearnerKind::adaboost: return std::make_unique<AdaBoostLearner>(h);
        default: return std::make_unique<BoostingLearner>(k, h);
    }
}

/// Reads a learner written by Learner::save.
inline std::unique_ptr<Learner> load_learner(BlobReader& r, const Hyperparams& h = {}) {
    const auto at = r.offset();
    const auto name = r.str();
    LearnerKind kind{};
    try {
        kind = parse_learner_kind(name);
    } catch (const UsageError&) {
        throw FormatError("unknown learner kind in model data", at);
    }
    auto l = make_learner(kind, h);
    l->load_state(r);
    return l;
}

}  // namespace eatrad::ensemble
