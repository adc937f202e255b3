#include <gtest/gtest.h>

#include "eatrad/report.hpp"
#include "test_support.hpp"

using namespace eatrad;

namespace {

std::vector<CaseResult> random_cases(std::uint64_t seed, std::size_t n, double signal) {
    Rng rng(seed);
    std::vector<CaseResult> out;
    for (std::size_t i = 0; i < n; ++i) {
        CaseResult c;
        c.case_id = "c" + std::to_string(i);
        c.label = i % 2 == 0 ? 1 : 0;
        c.prob = stats::sigmoid(signal * (c.label ? 1.0 : -1.0) + rng.normal());
        c.uncertainty = rng.uniform(0.0, 0.6);
        c.level = ensemble::uncertainty_level(c.uncertainty);
        out.push_back(c);
    }
    return out;
}

EvaluationParams quick(std::size_t n_boot = 200) {
    EvaluationParams p;
    p.n_boot = n_boot;
    p.seed = 5;
    return p;
}

/// Data lines of the first comment block that starts with "<!-- data".
std::vector<std::string> svg_data(const std::string& svg) {
    std::vector<std::string> lines;
    const auto at = svg.find("<!-- data");
    if (at == std::string::npos) return lines;
    const auto end = svg.find("-->", at);
    std::istringstream in(svg.substr(at, end - at));
    std::string line;
    std::getline(in, line);  // the "<!-- data ..." line
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

TEST(Report, Invariants) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto cases = random_cases(seed, 40 + seed, 0.3 * static_cast<double>(seed % 5));
        const auto r = evaluate_cases(cases, "m", "val", quick());
        EXPECT_LE(r.ci.low, r.auc) << seed;
        EXPECT_GE(r.ci.high, r.auc) << seed;
        for (double v : {r.cutoff.sensitivity, r.cutoff.specificity, r.cutoff.accuracy}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        std::size_t total = 0, correct = 0;
        for (const auto& b : r.levels) {
            total += b.count;
            correct += b.correct;
        }
        EXPECT_EQ(total, r.n);
        EXPECT_EQ(correct, r.cutoff.tp + r.cutoff.tn);
    }
}

TEST(Report, AccuracyMatchesConfusionRecomputation) {
    const auto cases = random_cases(3, 60, 1.0);
    const auto r = evaluate_cases(cases, "m", "val", quick());
    std::size_t ok = 0;
    for (const auto& c : r.cases) ok += (c.prob >= r.cutoff.cutoff) == (c.label == 1);
    EXPECT_DOUBLE_EQ(r.cutoff.accuracy, static_cast<double>(ok) / 60.0);
}

TEST(Report, LevelHistogramByHand) {
    std::vector<CaseResult> cases{
        {"a", 1, 0.9, 0.05, 1}, {"b", 0, 0.2, 0.05, 1}, {"c", 1, 0.4, 0.45, 5},
        {"d", 0, 0.6, 0.55, 6}, {"e", 1, 0.8, 0.15, 2}, {"f", 0, 0.1, 0.15, 2},
    };
    const auto r = evaluate_cases(cases, "m", "x", quick(50));
    // J is 2/3 at midpoints 0.3 and 0.7 and lower elsewhere; the smaller one wins
    EXPECT_DOUBLE_EQ(r.cutoff.cutoff, 0.30000000000000004);
    EXPECT_EQ(r.levels[0].count, 2u);
    EXPECT_EQ(r.levels[1].count, 2u);
    EXPECT_EQ(r.levels[4].count, 1u);
    EXPECT_EQ(r.levels[5].count, 1u);
    EXPECT_EQ(r.levels[2].count, 0u);
    EXPECT_FALSE(r.levels[2].accuracy().has_value());
    EXPECT_EQ(r.levels[4].correct, 1u);  // 0.4 >= 0.3, severe
    EXPECT_EQ(r.levels[5].correct, 0u);  // 0.6 >= 0.3, mild
}

TEST(Report, ComparisonAndJson) {
    auto base = random_cases(4, 50, 0.2);
    auto better = base;
    for (auto& c : better) c.prob = std::clamp(c.prob + (c.label ? 0.2 : -0.2), 0.0, 1.0);
    const auto p = quick();
    const auto rb = evaluate_cases(base, "lung", "val", p);
    const auto rn = evaluate_cases(better, "lung_eat", "val", p);
    const auto cmp = compare_reports(rb, rn, p);
    EXPECT_GT(cmp.stats.nri, 0.0);
    EXPECT_GT(cmp.stats.idi, 0.0);
    EXPECT_GT(cmp.stats.delta_auc, 0.0);
    const auto j = report_document(rn, &rb, &cmp, p, "0123456789abcdef");
    EXPECT_EQ(j["tool_version"], kToolVersion);
    EXPECT_EQ(j["config_hash"], "0123456789abcdef");
    EXPECT_EQ(j["metadata"]["nri_variant"], "continuous");
    EXPECT_TRUE(j["metadata"].contains("auc_difference_test"));
    EXPECT_EQ(j["model"]["cases"].size(), 50u);
    EXPECT_EQ(j["model"]["uncertainty_levels"].size(), 6u);
    EXPECT_EQ(j["comparison"]["nri"].get<double>(), cmp.stats.nri);
    EXPECT_EQ(j["baseline"]["model"], "lung");

    auto shuffled = better;
    std::swap(shuffled[0], shuffled[1]);
    EXPECT_THROW(compare_reports(rb, evaluate_cases(shuffled, "x", "val", p), p), ManifestError);
}

TEST(Report, CategoricalNriWhenThresholdSet) {
    auto p = quick();
    p.nri_threshold = 0.5;
    const auto a = evaluate_cases(random_cases(6, 30, 0.1), "a", "v", p);
    const auto b = evaluate_cases(random_cases(7, 30, 1.0), "b", "v", p);
    const auto cmp = compare_reports(a, b, p);
    ASSERT_TRUE(cmp.categorical_nri.has_value());
    const auto j = to_json(cmp);
    EXPECT_EQ(j["categorical_nri_threshold"].get<double>(), 0.5);
}

TEST(Report, SvgEmbedsData) {
    const auto r = evaluate_cases(random_cases(8, 30, 1.0), "lung_eat", "val", quick());
    const auto roc = roc_svg({&r}, "feedfacefeedface");
    EXPECT_NE(roc.find("<svg"), std::string::npos);
    EXPECT_NE(roc.find("config_hash=feedfacefeedface"), std::string::npos);
    EXPECT_NE(roc.find(std::string("eatrad ") + kToolVersion), std::string::npos);
    const auto rows = svg_data(roc);
    ASSERT_EQ(rows.size(), r.roc.size() + 1);
    EXPECT_EQ(rows.front(), "threshold,fpr,tpr");
    // the embedded table parses back to the stored curve
    for (std::size_t i = 0; i < r.roc.size(); ++i) {
        const auto f = rows[i + 1];
        const auto c1 = f.find(','), c2 = f.find(',', c1 + 1);
        EXPECT_EQ(std::stod(f.substr(c1 + 1, c2 - c1 - 1)), r.roc[i].fpr);
        EXPECT_EQ(std::stod(f.substr(c2 + 1)), r.roc[i].tpr);
    }
    const auto unc = uncertainty_svg(r, "feedfacefeedface");
    const auto urows = svg_data(unc);
    ASSERT_EQ(urows.size(), 7u);
    EXPECT_EQ(urows.front(), "level,count,correct,accuracy");
    std::size_t bars = 0;
    for (auto at = unc.find("fill=\"#9ecae1\""); at != std::string::npos; at = unc.find("fill=\"#9ecae1\"", at + 1))
        ++bars;
    EXPECT_EQ(bars, 6u);
}
