#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "eatrad/ensemble/hybrid.hpp"
#include "eatrad/metrics.hpp"
#include "test_support.hpp"

using namespace eatrad;
using namespace eatrad::ensemble;

namespace {

Dataset make_dataset(Matrix x, std::vector<int> y) {
    Dataset d;
    d.x = std::move(x);
    d.w = balanced_weights(y);
    d.y = std::move(y);
    return d;
}

/// Two Gaussian clouds in 3-D, far enough apart to separate linearly.
Dataset separable(std::uint64_t seed, std::size_t n = 60) {
    Rng rng(seed);
    Matrix x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = i % 3 == 0 ? 1 : 0;
        const double shift = c ? 2.5 : -2.5;
        x.push_back({shift + 0.5 * rng.normal(), rng.normal(), 0.3 * rng.normal()});
        y.push_back(c);
    }
    return make_dataset(std::move(x), std::move(y));
}

Dataset xor_data(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    Matrix x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        x.push_back({a, b});
        y.push_back((a > 0) != (b > 0) ? 1 : 0);
    }
    return make_dataset(std::move(x), std::move(y));
}

std::vector<double> probs(const Learner& l, const Matrix& x) {
    std::vector<double> out;
    for (const auto& row : x) out.push_back(l.predict_proba(row));
    return out;
}

FeatureTable table_from(const Dataset& d) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < d.rows(); ++i) ids.push_back("c" + std::to_string(i));
    FeatureTable t(ids, d.y);
    for (std::size_t j = 0; j < d.cols(); ++j) {
        std::vector<double> col;
        for (const auto& row : d.x) col.push_back(10.0 + 3.0 * row[j]);
        t.add_column("f" + std::to_string(j), col);
    }
    return t;
}

Hyperparams quick() {
    Hyperparams h;
    h.forest_trees = 30;
    h.boost_rounds = 40;
    h.svm_epochs = 300;
    return h;
}

}  // namespace

TEST(Learners, SeparableDataFitsPerfectly) {
    const auto d = separable(11);
    for (auto k : kAllKinds) {
        auto l = make_learner(k, quick());
        l->fit(d, 5);
        const auto p = probs(*l, d.x);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < d.rows(); ++i) correct += (p[i] >= 0.5) == (d.y[i] == 1);
        EXPECT_EQ(correct, d.rows()) << to_string(k);
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Learners, DeterministicForSeed) {
    const auto d = separable(12);
    const auto probe = separable(99, 20);
    for (auto k : kAllKinds) {
        auto a = make_learner(k, quick());
        auto b = make_learner(k, quick());
        a->fit(d, 42);
        b->fit(d, 42);
        EXPECT_EQ(probs(*a, probe.x), probs(*b, probe.x)) << to_string(k);
    }
}

TEST(Learners, SingleClassPredictsThatClass) {
    Matrix x{{0.0}, {1.0}, {2.0}, {3.0}};
    for (auto k : kAllKinds) {
        auto ones = make_learner(k, quick());
        ones->fit(make_dataset(x, {1, 1, 1, 1}), 1);
        auto zeros = make_learner(k, quick());
        zeros->fit(make_dataset(x, {0, 0, 0, 0}), 1);
        for (const auto& row : x) {
            EXPECT_GE(ones->predict_proba(row), 0.99) << to_string(k);
            EXPECT_LE(zeros->predict_proba(row), 0.01) << to_string(k);
        }
    }
}

TEST(Learners, XorNeedsTrees) {
    const auto train = xor_data(1, 400);
    const auto test = xor_data(2, 400);
    auto gb = make_learner(LearnerKind::gbdt, quick());
    gb->fit(train, 3);
    EXPECT_GT(roc_auc(probs(*gb, test.x), test.y), 0.95);
    auto lr = make_learner(LearnerKind::logistic, quick());
    lr->fit(train, 3);
    EXPECT_NEAR(roc_auc(probs(*lr, test.x), test.y), 0.5, 0.1);
}

TEST(Learners, LogisticMonotoneInOneDimension) {
    Rng rng(8);
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < 80; ++i) {
        const double v = rng.normal();
        x.push_back({v});
        y.push_back(v + 0.7 * rng.normal() > 0 ? 1 : 0);
    }
    auto l = make_learner(LearnerKind::logistic, quick());
    l->fit(make_dataset(x, y), 0);
    double prev = -1.0;
    for (double v = -4.0; v <= 4.0; v += 0.25) {
        const double p = l->predict_proba(std::vector<double>{v});
        EXPECT_GE(p, prev);
        prev = p;
    }
    EXPECT_GT(prev, 0.9);
}

TEST(Learners, NamesRoundTrip) {
    for (auto k : kAllKinds) EXPECT_EQ(parse_learner_kind(to_string(k)), k);
    EXPECT_THROW(parse_learner_kind("knn"), UsageError);
}

TEST(Uncertainty, SummaryOfKnownProbabilities) {
    const auto p = summarize({0, 0, 0, 0, 1, 1, 1});
    EXPECT_DOUBLE_EQ(p.mean_prob, 3.0 / 7.0);
    EXPECT_DOUBLE_EQ(p.uncertainty, std::sqrt(12.0 / 49.0));
    EXPECT_EQ(p.level, 5);
    const auto flat = summarize(std::vector<double>(7, 0.8));
    EXPECT_DOUBLE_EQ(flat.mean_prob, 0.8);
    EXPECT_NEAR(flat.uncertainty, 0.0, 1e-15);  // 7 * 0.8 / 7 is not exactly 0.8 in binary
    EXPECT_EQ(flat.level, 1);
}

TEST(Uncertainty, LevelBoundaries) {
    EXPECT_EQ(uncertainty_level(0.0), 1);
    EXPECT_EQ(uncertainty_level(0.0999), 1);
    EXPECT_EQ(uncertainty_level(0.1), 2);
    EXPECT_EQ(uncertainty_level(0.2), 3);
    EXPECT_EQ(uncertainty_level(0.3), 4);
    EXPECT_EQ(uncertainty_level(0.4), 5);
    EXPECT_EQ(uncertainty_level(0.5), 6);
    EXPECT_EQ(uncertainty_level(0.55), 6);
    EXPECT_EQ(uncertainty_level(1.0), 6);
    EXPECT_THROW(uncertainty_level(-0.01), DomainError);
    EXPECT_THROW(uncertainty_level(1.01), DomainError);
    EXPECT_THROW(uncertainty_level(std::nan("")), DomainError);
}

TEST(Uncertainty, MeanInsideHullAndSdBounded) {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(7);
        for (auto& x : v) x = rng.uniform();
        const auto p = summarize(v);
        EXPECT_GE(p.mean_prob, *std::min_element(v.begin(), v.end()));
        EXPECT_LE(p.mean_prob, *std::max_element(v.begin(), v.end()));
        EXPECT_LE(p.uncertainty, 0.5);
        EXPECT_GE(p.level, 1);
        EXPECT_LE(p.level, 6);
    }
}

class Hybrid : public ::testing::Test {
protected:
    void SetUp() override {
        data_ = separable(31, 45);
        table_ = table_from(data_);
        cfg_.hyper = quick();
        cfg_.seed = 17;
        model_ = train_hybrid(table_, {"f0", "f1", "f2"}, cfg_, "abc123");
    }
    Dataset data_;
    FeatureTable table_;
    EnsembleConfig cfg_;
    HybridModel model_;
};

TEST_F(Hybrid, SevenLearnersInDeclaredOrder) {
    ASSERT_EQ(model_.size(), 7u);
    EXPECT_EQ(model_.kinds(), std::vector<LearnerKind>(kAllKinds.begin(), kAllKinds.end()));
    EXPECT_EQ(model_.info().n_train, 45u);
    EXPECT_EQ(model_.info().n_severe, 15u);
    EXPECT_EQ(model_.info().config_hash, "abc123");
}

TEST_F(Hybrid, PredictionIsMemberSummary) {
    const auto preds = model_.predict(table_);
    ASSERT_EQ(preds.size(), table_.rows());
    for (const auto& p : preds) {
        ASSERT_EQ(p.per_learner.size(), 7u);
        const auto s = summarize(p.per_learner);
        EXPECT_EQ(p.mean_prob, s.mean_prob);
        EXPECT_EQ(p.uncertainty, s.uncertainty);
        EXPECT_EQ(p.level, s.level);
    }
    std::vector<double> m;
    for (const auto& p : preds) m.push_back(p.mean_prob);
    EXPECT_EQ(roc_auc(m, table_.labels()), 1.0);
}

TEST_F(Hybrid, SameSeedSameModel) {
    const auto again = train_hybrid(table_, {"f0", "f1", "f2"}, cfg_, "abc123");
    EXPECT_EQ(again.to_bytes(), model_.to_bytes());
}

TEST_F(Hybrid, RoundTripIsBitExact) {
    const testing_support::TempDir dir("ens");
    const auto path = dir.path() / "model.bin";
    model_.save(path);
    const auto loaded = HybridModel::load(path);
    EXPECT_EQ(loaded.manifest().names, model_.manifest().names);
    EXPECT_EQ(loaded.info().seed, 17u);
    EXPECT_EQ(loaded.to_bytes(), model_.to_bytes());
    const auto a = model_.predict(table_), b = loaded.predict(table_);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].per_learner, b[i].per_learner);
}

TEST_F(Hybrid, CorruptFilesRejected) {
    const auto bytes = model_.to_bytes();
    auto bad_magic = bytes;
    bad_magic[2] ^= 0xFF;
    EXPECT_THROW(HybridModel::from_bytes(bad_magic), FormatError);
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{13}, bytes.size() / 2, bytes.size() - 1}) {
        const std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        EXPECT_THROW(HybridModel::from_bytes(t), FormatError) << "cut " << cut;
    }
    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(HybridModel::from_bytes(trailing), FormatError);
    auto bad_version = bytes;
    bad_version[8] = 9;
    EXPECT_THROW(HybridModel::from_bytes(bad_version), FormatError);
    // random single-byte damage never crashes: either a clean error or a loadable model
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto b = bytes;
        b[rng.below(b.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
        try {
            (void)HybridModel::from_bytes(b);
        } catch (const FormatError&) {
        }
    }
}

TEST_F(Hybrid, MissingFeatureIsManifestError) {
    FeatureVector fv;
    fv.add("f0", 1.0);
    fv.add("f2", 2.0);
    EXPECT_THROW((void)model_.predict(fv), ManifestError);
    fv.add("f1", 0.5);
    EXPECT_NO_THROW((void)model_.predict(fv));
    EXPECT_THROW((void)model_.predict(std::vector<double>{1.0, 2.0}), ManifestError);
    EXPECT_THROW(train_hybrid(table_, {"f0", "nope"}, cfg_), ManifestError);
}

TEST_F(Hybrid, RequiresBothClasses) {
    FeatureTable t({"a", "b", "c"}, {1, 1, 1});
    t.add_column("f0", {1, 2, 3});
    EXPECT_THROW(train_hybrid(t, {"f0"}, cfg_), DomainError);
    EXPECT_THROW(train_hybrid(table_, {}, cfg_), DomainError);
}
