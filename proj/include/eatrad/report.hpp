#pragma once

// Evaluation report for one model on one cohort, optionally paired with a
// baseline model on the same cases. Serialized to JSON and drawn as SVG.

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eatrad/ensemble/hybrid.hpp"
#include "eatrad/metrics.hpp"
#include "eatrad/version.hpp"

namespace eatrad {

struct CaseResult {
    std::string case_id;
    int label = 0;
    double prob = 0.0;
    double uncertainty = 0.0;
    int level = 1;
};

struct LevelBin {
    int level = 1;
    std::size_t count = 0;
    std::size_t correct = 0;  ///< classified correctly at the report cutoff
    [[nodiscard]] std::optional<double> accuracy() const {
        if (count == 0) return std::nullopt;
        return static_cast<double>(correct) / static_cast<double>(count);
    }
};

struct EvaluationReport {
    std::string model;
    std::string cohort;
    std::size_t n = 0;
    std::size_t n_severe = 0;
    double auc = 0.5;
    Interval ci;
    CutoffStats cutoff;
    std::vector<RocPoint> roc;
    std::vector<CaseResult> cases;
    std::array<LevelBin, 6> levels{};
};

struct ComparisonBlock {
    std::string baseline;
    std::string model;
    Comparison stats;
    std::optional<double> categorical_nri;
    std::optional<double> categorical_threshold;
};

struct EvaluationParams {
    std::size_t n_boot = 1000;
    std::uint64_t seed = 43;
    double ci_level = 0.95;
    /// When set, a two-category NRI at this risk threshold is reported next
    /// to the continuous one.
    std::optional<double> nri_threshold;
};

inline EvaluationReport evaluate_cases(std::vector<CaseResult> cases, const std::string& model,
                                       const std::string& cohort, const EvaluationParams& params) {
    EvaluationReport r;
    r.model = model;
    r.cohort = cohort;
    r.n = cases.size();
    std::vector<double> p;
    std::vector<int> y;
    for (const auto& c : cases) {
        p.push_back(c.prob);
        y.push_back(c.label);
        r.n_severe += c.label == 1;
    }
    r.auc = roc_auc(p, y);
    r.ci = bootstrap_ci([](std::span<const double> s, std::span<const int> l) { return roc_auc(s, l); }, p, y,
                        params.n_boot, params.seed, params.ci_level);
    r.cutoff = youden_cutoff(p, y);
    r.roc = roc_curve(p, y);
    for (int k = 0; k < 6; ++k) r.levels[static_cast<std::size_t>(k)].level = k + 1;
    for (const auto& c : cases) {
        if (c.level < 1 || c.level > 6) throw DomainError("uncertainty level out of range for case " + c.case_id);
        auto& bin = r.levels[static_cast<std::size_t>(c.level - 1)];
        ++bin.count;
        bin.correct += (c.prob >= r.cutoff.cutoff) == (c.label == 1);
    }
    r.cases = std::move(cases);
    return r;
}

/// Both reports must cover the same cases in the same order.
inline ComparisonBlock compare_reports(const EvaluationReport& baseline, const EvaluationReport& model,
                                       const EvaluationParams& params) {
    if (baseline.cases.size() != model.cases.size()) throw ManifestError("compared models cover different case counts");
    std::vector<double> po, pn;
    std::vector<int> y;
    for (std::size_t i = 0; i < model.cases.size(); ++i) {
        const auto& a = baseline.cases[i];
        const auto& b = model.cases[i];
        if (a.case_id != b.case_id || a.label != b.label)
            throw ManifestError("compared models disagree on case " + b.case_id);
        po.push_back(a.prob);
        pn.push_back(b.prob);
        y.push_back(b.label);
    }
    ComparisonBlock c;
    c.baseline = baseline.model;
    c.model = model.model;
    c.stats = compare_models(po, pn, y, params.n_boot, derive_seed(params.seed, 1));
    if (params.nri_threshold) {
        c.categorical_threshold = *params.nri_threshold;
        c.categorical_nri = categorical_nri(po, pn, y, *params.nri_threshold);
    }
    return c;
}

// ---------------------------------------------------------------- JSON

inline nlohmann::json to_json(const EvaluationReport& r) {
    using nlohmann::json;
    json j;
    j["model"] = r.model;
    j["cohort"] = r.cohort;
    j["n"] = r.n;
    j["n_severe"] = r.n_severe;
    j["auc"] = r.auc;
    j["auc_ci"] = {{"low", r.ci.low}, {"high", r.ci.high}, {"redrawn_resamples", r.ci.redrawn}};
    j["cutoff"] = r.cutoff.cutoff;
    j["sensitivity"] = r.cutoff.sensitivity;
    j["specificity"] = r.cutoff.specificity;
    j["accuracy"] = r.cutoff.accuracy;
    j["confusion"] = {{"tp", r.cutoff.tp}, {"tn", r.cutoff.tn}, {"fp", r.cutoff.fp}, {"fn", r.cutoff.fn}};
    auto& lv = j["uncertainty_levels"] = json::array();
    for (const auto& b : r.levels) {
        json e{{"level", b.level}, {"count", b.count}, {"correct", b.correct}};
        const auto acc = b.accuracy();
        e["accuracy"] = acc ? json(*acc) : json(nullptr);
        lv.push_back(e);
    }
    auto& cs = j["cases"] = json::array();
    for (const auto& c : r.cases)
        cs.push_back({{"case_id", c.case_id},
                      {"label", c.label},
                      {"prob", c.prob},
                      {"uncertainty", c.uncertainty},
                      {"level", c.level}});
    return j;
}

inline nlohmann::json to_json(const ComparisonBlock& c) {
    nlohmann::json j;
    j["baseline"] = c.baseline;
    j["model"] = c.model;
    j["auc_baseline"] = c.stats.auc_old;
    j["auc_model"] = c.stats.auc_new;
    j["delta_auc"] = c.stats.delta_auc;
    j["delta_auc_sd"] = c.stats.delta_sd;
    j["p_value"] = c.stats.p_value;
    j["nri"] = c.stats.nri;
    j["nri_events"] = c.stats.nri_events;
    j["nri_nonevents"] = c.stats.nri_nonevents;
    j["idi"] = c.stats.idi;
    j["n_boot"] = c.stats.n_boot;
    if (c.categorical_nri) {
        j["categorical_nri"] = *c.categorical_nri;
        j["categorical_nri_threshold"] = *c.categorical_threshold;
    }
    return j;
}

/// Full report document. `baseline` and `comparison` may be absent.
inline nlohmann::json report_document(const EvaluationReport& model, const EvaluationReport* baseline,
                                      const ComparisonBlock* comparison, const EvaluationParams& params,
                                      const std::string& config_hash) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = config_hash;
    j["cohort"] = model.cohort;
    j["metadata"] = {
        {"nri_variant", params.nri_threshold ? "continuous+categorical" : "continuous"},
        {"auc_ci_method", "stratified percentile bootstrap"},
        {"auc_difference_test", "paired stratified bootstrap, two-sided normal"},
        {"cutoff_rule", "youden, smallest maximizing midpoint"},
        {"n_boot", params.n_boot},
        {"ci_level", params.ci_level},
        {"seed", params.seed},
    };
    j["model"] = to_json(model);
    if (baseline != nullptr) j["baseline"] = to_json(*baseline);
    if (comparison != nullptr) j["comparison"] = to_json(*comparison);
    return j;
}

// ---------------------------------------------------------------- SVG

namespace svg_detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void open(std::ostringstream& o, const std::string& title, const std::string& config_hash, int w, int h) {
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\">\n";
    o << "<!-- eatrad " << kToolVersion << " config_hash=" << config_hash << " -->\n";
    o << "<title>" << title << "</title>\n";
    o << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

}  // namespace svg_detail

/// ROC curves of one or more reports on a shared unit square.
inline std::string roc_svg(const std::vector<const EvaluationReport*>& reports, const std::string& config_hash) {
    using namespace svg_detail;
    constexpr int W = 420, H = 420, L = 60, T = 30, S = 320;
    static constexpr std::array<const char*, 4> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream o;
    open(o, "ROC curve", config_hash, W, H);
    for (const auto* r : reports) {
        o << "<!-- data model=" << r->model << " cohort=" << r->cohort << " auc=" << full(r->auc) << "\n";
        o << "threshold,fpr,tpr\n";
        for (const auto& p : r->roc) o << full(p.threshold) << ',' << full(p.fpr) << ',' << full(p.tpr) << '\n';
        o << "-->\n";
    }
    auto px = [&](double f) { return num(L + f * S); };
    auto py = [&](double t) { return num(T + (1.0 - t) * S); };
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << S << "\" height=\"" << S
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
      << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double v = k / 5.0;
        o << "<text x=\"" << px(v) << "\" y=\"" << T + S + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
          << num(v).substr(0, 3) << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << py(v) << "\" font-size=\"11\" text-anchor=\"end\">"
          << num(v).substr(0, 3) << "</text>\n";
    }
    o << "<text x=\"" << L + S / 2 << "\" y=\"" << H - 10 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << "1 - specificity</text>\n";
    o << "<text x=\"15\" y=\"" << T + S / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << T + S / 2 << ")\">sensitivity</text>\n";
    for (std::size_t m = 0; m < reports.size(); ++m) {
        const auto* r = reports[m];
        const char* c = colors[m % colors.size()];
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < r->roc.size(); ++i)
            o << (i ? " " : "") << px(r->roc[i].fpr) << ',' << py(r->roc[i].tpr);
        o << "\"/>\n";
        o << "<text x=\"" << L + S - 8 << "\" y=\"" << T + S - 12 - 16 * static_cast<int>(m)
          << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << c << "\">" << r->model
          << " AUC=" << num(r->auc).substr(0, 5) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Case counts per uncertainty level as bars, per-level accuracy as dots.
inline std::string uncertainty_svg(const EvaluationReport& r, const std::string& config_hash) {
    using namespace svg_detail;
    constexpr int W = 480, H = 360, L = 60, T = 30, PW = 360, PH = 260;
    std::ostringstream o;
    open(o, "Uncertainty levels", config_hash, W, H);
    o << "<!-- data model=" << r.model << " cohort=" << r.cohort << " cutoff=" << full(r.cutoff.cutoff) << "\n";
    o << "level,count,correct,accuracy\n";
    std::size_t max_count = 1;
    for (const auto& b : r.levels) {
        max_count = std::max(max_count, b.count);
        const auto acc = b.accuracy();
        o << b.level << ',' << b.count << ',' << b.correct << ',' << (acc ? full(*acc) : std::string("NA")) << '\n';
    }
    o << "-->\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\"" << PH
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double slot = PW / 6.0;
    for (std::size_t k = 0; k < 6; ++k) {
        const auto& b = r.levels[k];
        const double h = PH * static_cast<double>(b.count) / static_cast<double>(max_count);
        const double x = L + slot * static_cast<double>(k);
        o << "<rect x=\"" << num(x + slot * 0.15) << "\" y=\"" << num(T + PH - h) << "\" width=\"" << num(slot * 0.7)
          << "\" height=\"" << num(h) << "\" fill=\"#9ecae1\"/>\n";
        o << "<text x=\"" << num(x + slot / 2) << "\" y=\"" << T + PH + 16
          << "\" font-size=\"11\" text-anchor=\"middle\">" << b.level << "</text>\n";
        if (const auto acc = b.accuracy()) {
            o << "<circle cx=\"" << num(x + slot / 2) << "\" cy=\"" << num(T + PH * (1.0 - *acc))
              << "\" r=\"4\" fill=\"#d62728\"/>\n";
        }
    }
    o << "<text x=\"" << L + PW / 2 << "\" y=\"" << H - 10 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << "uncertainty level</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << max_count
      << "</text>\n";
    o << "<text x=\"" << L + PW + 6 << "\" y=\"" << T + 4 << "\" font-size=\"11\" fill=\"#d62728\">acc 1.0</text>\n";
    o << "<text x=\"" << L + PW + 6 << "\" y=\"" << T + PH << "\" font-size=\"11\" fill=\"#d62728\">acc 0.0</text>\n";
    o << "</svg>\n";
    return o.str();
}

}  // namespace eatrad
