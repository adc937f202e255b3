#pragma once

// Pipeline configuration in INI form:
//
//   [paths]       manifest, train_cohort
//   [phantom]     seed, train_mild, train_severe, validation_mild, validation_severe
//   [eat]         hu_low, hu_high, filter_radius, filter_mode (3d | 2d)
//   [radiomics]   bin_width, connectivity (6 | 26), families (comma list)
//   [selection]   alpha, corr_threshold, max_k
//   [ensemble]    seed, learners (comma list), class_weighted, learner hyperparameters
//   [evaluation]  n_boot, seed, ci_level, nri_threshold (empty: continuous NRI only)
//
// Unknown sections or keys are rejected. The config hash is FNV-1a 64 of the
// canonical text with the manifest path left out, so moving the data does not
// change the provenance of the results.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "eatrad/eat.hpp"
#include "eatrad/ensemble/hybrid.hpp"
#include "eatrad/pipeline/csv.hpp"
#include "eatrad/radiomics/extract.hpp"
#include "eatrad/report.hpp"
#include "eatrad/selection.hpp"

namespace eatrad::pipeline {

struct PhantomSettings {
    std::uint64_t seed = 7;
    std::size_t train_mild = 100;
    std::size_t train_severe = 100;
    std::size_t validation_mild = 50;
    std::size_t validation_severe = 50;
};

struct PipelineConfig {
    std::filesystem::path manifest;
    std::string train_cohort = "train";
    PhantomSettings phantom;
    EatParams eat;
    radiomics::RadiomicsConfig radiomics;
    SelectionParams selection;
    ensemble::EnsembleConfig ensemble{.kinds = {ensemble::kAllKinds.begin(), ensemble::kAllKinds.end()},
                                      .hyper = {},
                                      .seed = 42};
    EvaluationParams evaluation;

    /// Same seed for every stochastic stage.
    void set_seed(std::uint64_t s) {
        phantom.seed = s;
        ensemble.seed = s;
        evaluation.seed = s;
    }
};

namespace config_detail {

[[noreturn]] inline void bad(const std::string& key, const std::string& why) {
    throw UsageError("config " + key + ": " + why);
}

template <typename T>
T parse_int(const std::string& key, const std::string& s) {
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) bad(key, "'" + s + "' is not an integer");
    return v;
}

inline double parse_real(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        bad(key, "'" + s + "' is not a finite number");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad(key, "'" + s + "' is not a boolean");
}

inline std::vector<std::string> parse_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto item : csv::split(s)) {
        const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

inline std::string real(double v) { return csv::format(v); }

struct Key {
    const char* section;
    const char* name;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string& key, const std::string& value)> set;
    bool hashed = true;
};

#define EATRAD_INT_KEY(sec, nm, field, T)                                                  \
    Key {                                                                                  \
        sec, nm, [](const PipelineConfig& c) { return std::to_string(c.field); },          \
            [](PipelineConfig& c, const std::string& k, const std::string& v) {            \
                c.field = parse_int<T>(k, v);                                              \
            }                                                                              \
    }
#define EATRAD_REAL_KEY(sec, nm, field)                                                    \
    Key {                                                                                  \
        sec, nm, [](const PipelineConfig& c) { return real(c.field); },                    \
            [](PipelineConfig& c, const std::string& k, const std::string& v) {            \
                c.field = parse_real(k, v);                                                \
            }                                                                              \
    }

inline const std::vector<Key>& keys() {
    static const std::vector<Key> k{
        Key{"paths", "manifest", [](const PipelineConfig& c) { return c.manifest.string(); },
            [](PipelineConfig& c, const std::string&, const std::string& v) { c.manifest = v; }, false},
        Key{"paths", "train_cohort", [](const PipelineConfig& c) { return c.train_cohort; },
            [](PipelineConfig& c, const std::string& key, const std::string& v) {
                if (v.empty()) bad(key, "must not be empty");
                c.train_cohort = v;
            }},
        EATRAD_INT_KEY("phantom", "seed", phantom.seed, std::uint64_t),
        EATRAD_INT_KEY("phantom", "train_mild", phantom.train_mild, std::size_t),
        EATRAD_INT_KEY("phantom", "train_severe", phantom.train_severe, std::size_t),
        EATRAD_INT_KEY("phantom", "validation_mild", phantom.validation_mild, std::size_t),
        EATRAD_INT_KEY("phantom", "validation_severe", phantom.validation_severe, std::size_t),
        EATRAD_INT_KEY("eat", "hu_low", eat.hu_low, std::int16_t),
        EATRAD_INT_KEY("eat", "hu_high", eat.hu_high, std::int16_t),
        EATRAD_INT_KEY("eat", "filter_radius", eat.filter_radius, int),
        Key{"eat", "filter_mode",
            [](const PipelineConfig& c) { return std::string(c.eat.filter_mode == FilterMode::slice2d ? "2d" : "3d"); },
            [](PipelineConfig& c, const std::string& key, const std::string& v) {
                if (v == "3d")
                    c.eat.filter_mode = FilterMode::volume3d;
                else if (v == "2d")
                    c.eat.filter_mode = FilterMode::slice2d;
                else
                    bad(key, "expected 3d or 2d");
            }},
        EATRAD_REAL_KEY("radiomics", "bin_width", radiomics.bin_width),
        EATRAD_INT_KEY("radiomics", "connectivity", radiomics.connectivity, int),
        Key{"radiomics", "families", [](const PipelineConfig& c) { return csv::join(c.radiomics.families); },
            [](PipelineConfig& c, const std::string&, const std::string& v) { c.radiomics.families = parse_list(v); }},
        EATRAD_REAL_KEY("selection", "alpha", selection.alpha),
        EATRAD_REAL_KEY("selection", "corr_threshold", selection.corr_threshold),
        EATRAD_INT_KEY("selection", "max_k", selection.max_k, std::size_t),
        EATRAD_INT_KEY("ensemble", "seed", ensemble.seed, std::uint64_t),
        Key{"ensemble", "learners",
            [](const PipelineConfig& c) {
                std::vector<std::string> names;
                for (auto k : c.ensemble.kinds) names.emplace_back(ensemble::to_string(k));
                return csv::join(names);
            },
            [](PipelineConfig& c, const std::string& key, const std::string& v) {
                c.ensemble.kinds.clear();
                for (const auto& n : parse_list(v)) {
                    try {
                        c.ensemble.kinds.push_back(ensemble::parse_learner_kind(n));
                    } catch (const UsageError& e) {
                        bad(key, e.what());
                    }
                }
            }},
        Key{"ensemble", "class_weighted",
            [](const PipelineConfig& c) { return std::string(c.ensemble.hyper.class_weighted ? "true" : "false"); },
            [](PipelineConfig& c, const std::string& key, const std::string& v) {
                c.ensemble.hyper.class_weighted = parse_bool(key, v);
            }},
        EATRAD_REAL_KEY("ensemble", "logistic_c", ensemble.hyper.logistic_c),
        EATRAD_INT_KEY("ensemble", "logistic_max_iter", ensemble.hyper.logistic_max_iter, int),
        EATRAD_REAL_KEY("ensemble", "svm_lambda", ensemble.hyper.svm_lambda),
        EATRAD_INT_KEY("ensemble", "svm_epochs", ensemble.hyper.svm_epochs, int),
        EATRAD_INT_KEY("ensemble", "forest_trees", ensemble.hyper.forest_trees, int),
        EATRAD_INT_KEY("ensemble", "forest_max_depth", ensemble.hyper.forest_max_depth, int),
        EATRAD_INT_KEY("ensemble", "forest_min_leaf", ensemble.hyper.forest_min_leaf, std::size_t),
        EATRAD_INT_KEY("ensemble", "ada_rounds", ensemble.hyper.ada_rounds, int),
        EATRAD_INT_KEY("ensemble", "boost_rounds", ensemble.hyper.boost_rounds, int),
        EATRAD_REAL_KEY("ensemble", "boost_learning_rate", ensemble.hyper.boost_learning_rate),
        EATRAD_INT_KEY("ensemble", "gbdt_max_depth", ensemble.hyper.gbdt_max_depth, int),
        EATRAD_INT_KEY("ensemble", "xgb_max_depth", ensemble.hyper.xgb_max_depth, int),
        EATRAD_REAL_KEY("ensemble", "xgb_lambda", ensemble.hyper.xgb_lambda),
        EATRAD_REAL_KEY("ensemble", "xgb_min_child_weight", ensemble.hyper.xgb_min_child_weight),
        EATRAD_INT_KEY("ensemble", "hist_max_depth", ensemble.hyper.hist_max_depth, int),
        EATRAD_INT_KEY("ensemble", "hist_bins", ensemble.hyper.hist_bins, std::size_t),
        EATRAD_INT_KEY("ensemble", "hist_min_child_samples", ensemble.hyper.hist_min_child_samples, std::size_t),
        EATRAD_REAL_KEY("ensemble", "hist_lambda", ensemble.hyper.hist_lambda),
        EATRAD_INT_KEY("evaluation", "n_boot", evaluation.n_boot, std::size_t),
        EATRAD_INT_KEY("evaluation", "seed", evaluation.seed, std::uint64_t),
        EATRAD_REAL_KEY("evaluation", "ci_level", evaluation.ci_level),
        Key{"evaluation", "nri_threshold",
            [](const PipelineConfig& c) {
                return c.evaluation.nri_threshold ? real(*c.evaluation.nri_threshold) : std::string();
            },
            [](PipelineConfig& c, const std::string& key, const std::string& v) {
                if (v.empty())
                    c.evaluation.nri_threshold.reset();
                else
                    c.evaluation.nri_threshold = parse_real(key, v);
            }},
    };
    return k;
}

#undef EATRAD_INT_KEY
#undef EATRAD_REAL_KEY

}  // namespace config_detail

/// Range and consistency checks; throws UsageError.
inline void validate(const PipelineConfig& c) {
    auto bad = [](const std::string& why) { throw UsageError("config: " + why); };
    if (c.eat.hu_low > c.eat.hu_high) bad("[eat] hu_low exceeds hu_high");
    if (c.eat.filter_radius < 0) bad("[eat] filter_radius must be >= 0");
    c.radiomics.validate();
    if (c.radiomics.families.empty()) bad("[radiomics] families is empty");
    if (!(c.selection.alpha > 0.0 && c.selection.alpha <= 1.0)) bad("[selection] alpha must lie in (0, 1]");
    if (!(c.selection.corr_threshold > 0.0 && c.selection.corr_threshold <= 1.0))
        bad("[selection] corr_threshold must lie in (0, 1]");
    if (c.selection.max_k == 0) bad("[selection] max_k must be >= 1");
    if (c.ensemble.kinds.empty()) bad("[ensemble] learners is empty");
    const auto& h = c.ensemble.hyper;
    if (!(h.logistic_c > 0.0) || h.logistic_max_iter < 1) bad("[ensemble] logistic settings out of range");
    if (!(h.svm_lambda > 0.0) || h.svm_epochs < 1) bad("[ensemble] svm settings out of range");
    if (h.forest_trees < 1 || h.forest_max_depth < 1 || h.forest_min_leaf < 1) bad("[ensemble] forest settings out of range");
    if (h.ada_rounds < 1 || h.boost_rounds < 1) bad("[ensemble] round counts must be >= 1");
    if (!(h.boost_learning_rate > 0.0 && h.boost_learning_rate <= 1.0))
        bad("[ensemble] boost_learning_rate must lie in (0, 1]");
    if (h.gbdt_max_depth < 1 || h.xgb_max_depth < 1 || h.hist_max_depth < 1) bad("[ensemble] tree depths must be >= 1");
    if (h.hist_bins < 2 || h.hist_min_child_samples < 1) bad("[ensemble] histogram settings out of range");
    if (h.xgb_lambda < 0.0 || h.hist_lambda < 0.0 || h.xgb_min_child_weight < 0.0)
        bad("[ensemble] regularization must be >= 0");
    if (c.evaluation.n_boot < 2) bad("[evaluation] n_boot must be >= 2");
    if (!(c.evaluation.ci_level > 0.0 && c.evaluation.ci_level < 1.0)) bad("[evaluation] ci_level must lie in (0, 1)");
    if (c.evaluation.nri_threshold && !(*c.evaluation.nri_threshold > 0.0 && *c.evaluation.nri_threshold < 1.0))
        bad("[evaluation] nri_threshold must lie in (0, 1)");
}

/// Canonical INI text: every key, fixed order, shortest round-trip numbers.
inline std::string to_ini(const PipelineConfig& c, bool with_paths = true) {
    std::ostringstream o;
    std::string section;
    for (const auto& k : config_detail::keys()) {
        if (!with_paths && !k.hashed) continue;
        if (section != k.section) {
            if (!section.empty()) o << '\n';
            section = k.section;
            o << '[' << section << "]\n";
        }
        o << k.name << " = " << k.get(c) << '\n';
    }
    return o.str();
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const PipelineConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_ini(c, false))));
    return buf;
}

/// Applies an INI stream on top of `c`. Relative manifest paths are taken
/// relative to `base_dir`.
inline void apply_ini(PipelineConfig& c, std::istream& in, const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw UsageError("config: key '" + section + "' must be inside a section");
        bool known_section = false;
        for (const auto& k : config_detail::keys()) known_section |= section == k.section;
        if (!known_section) throw UsageError("config: unknown section [" + section + "]");
        for (const auto& [name, value] : body) {
            const config_detail::Key* key = nullptr;
            for (const auto& k : config_detail::keys())
                if (section == k.section && name == k.name) key = &k;
            if (key == nullptr) throw UsageError("config: unknown key [" + section + "] " + name);
            key->set(c, "[" + section + "] " + name, value.data());
        }
    }
    if (!c.manifest.empty() && c.manifest.is_relative() && !base_dir.empty()) c.manifest = base_dir / c.manifest;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    PipelineConfig c;
    apply_ini(c, in, path.parent_path());
    return c;
}

}  // namespace eatrad::pipeline
