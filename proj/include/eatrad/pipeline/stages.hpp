#pragma once

// Pipeline stages. Each stage reads and writes fixed artifact names inside an
// output directory, so `run` is literally the stages called in order:
//
//   features   manifest.csv            -> features.csv, features.json, eat_stats.csv
//   select     features.csv            -> selection.json, selection.txt
//   train      features.csv, selection -> model.bin (lung+EAT), model_lung.bin
//   predict    model, features.csv     -> predictions_<model>.csv
//   evaluate   predictions (+baseline) -> report_<cohort>.json, roc_<cohort>.svg,
//                                         uncertainty_<cohort>.svg

#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eatrad/eat.hpp"
#include "eatrad/ensemble/hybrid.hpp"
#include "eatrad/parallel.hpp"
#include "eatrad/phantom.hpp"
#include "eatrad/pipeline/config.hpp"
#include "eatrad/pipeline/csv.hpp"
#include "eatrad/radiomics/extract.hpp"
#include "eatrad/report.hpp"
#include "eatrad/selection.hpp"
#include "eatrad/volume_io.hpp"

namespace eatrad::pipeline {

namespace fs = std::filesystem;

namespace files {
inline constexpr const char* manifest = "manifest.csv";
inline constexpr const char* features = "features.csv";
inline constexpr const char* features_meta = "features.json";
inline constexpr const char* eat_stats = "eat_stats.csv";
inline constexpr const char* selection = "selection.json";
inline constexpr const char* selection_text = "selection.txt";
inline constexpr const char* model = "model.bin";
inline constexpr const char* model_lung = "model_lung.bin";
inline constexpr const char* config = "config.ini";
inline constexpr const char* failed = "FAILED";
}  // namespace files

inline constexpr const char* kLungSet = "lung";
inline constexpr const char* kLungEatSet = "lung_eat";

inline std::string predictions_file(const std::string& model) { return "predictions_" + model + ".csv"; }

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Provenance fields carried by every JSON artifact.
inline nlohmann::json stamp(const std::string& config_hash) {
    return {{"tool_version", kToolVersion}, {"config_hash", config_hash}};
}

// ---------------------------------------------------------------- manifest

struct ManifestRow {
    std::string case_id;
    int label = 0;
    std::string cohort;
    fs::path volume, heart, lung;
    std::optional<fs::path> eat;  ///< precomputed EAT mask; extracted when absent
};

inline int parse_label(const std::string& s, const std::string& where) {
    if (s == "0" || s == "mild") return 0;
    if (s == "1" || s == "severe") return 1;
    throw ManifestError(where + ": label '" + s + "' is not 0, 1, mild or severe");
}

inline std::vector<ManifestRow> read_manifest(const fs::path& path) {
    if (path.empty()) throw UsageError("no cohort manifest given");
    if (!fs::exists(path)) throw UsageError("manifest not found: " + path.string());
    const auto t = csv::read(path);
    const auto file = path.string();
    const auto c_id = t.column("case_id", file), c_label = t.column("label", file), c_cohort = t.column("cohort", file),
               c_vol = t.column("volume", file), c_heart = t.column("heart", file), c_lung = t.column("lung", file);
    const std::optional<std::size_t> c_eat = t.has("eat") ? std::optional(t.column("eat", file)) : std::nullopt;
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    std::vector<ManifestRow> rows;
    std::map<std::string, int> seen;
    for (const auto& r : t.rows) {
        ManifestRow m;
        m.case_id = r[c_id];
        if (m.case_id.empty()) throw ManifestError(file + ": empty case_id");
        if (seen[m.case_id]++) throw ManifestError(file + ": duplicate case_id " + m.case_id);
        m.label = parse_label(r[c_label], file);
        m.cohort = r[c_cohort];
        if (m.cohort.empty()) throw ManifestError(file + ": empty cohort for " + m.case_id);
        m.volume = resolve(r[c_vol]);
        m.heart = resolve(r[c_heart]);
        m.lung = resolve(r[c_lung]);
        if (c_eat && !r[*c_eat].empty()) m.eat = resolve(r[*c_eat]);
        rows.push_back(std::move(m));
    }
    if (rows.empty()) throw UsageError("manifest " + file + " lists no cases");
    return rows;
}

// ---------------------------------------------------------------- phantom

/// Writes the train and validation phantom cohorts under `out/cases` and a
/// manifest at `out/manifest.csv`. Returns the manifest path.
inline fs::path write_phantom_cohorts(const PipelineConfig& cfg, const fs::path& out, const std::string& hash) {
    const auto& ph = cfg.phantom;
    fs::create_directories(out / "cases");
    struct Part {
        std::string cohort, prefix;
        std::size_t mild, severe;
    };
    const std::vector<Part> parts{{cfg.train_cohort, "train", ph.train_mild, ph.train_severe},
                                  {"validation", "val", ph.validation_mild, ph.validation_severe}};
    std::ostringstream man;
    man << csv::provenance_line(hash) << '\n' << "case_id,label,cohort,volume,heart,lung\n";
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const auto& part = parts[p];
        if (part.mild + part.severe == 0) continue;
        const auto cases = generate_cohort(part.mild, part.severe, PhantomSpec{}, derive_seed(ph.seed, p), {},
                                           part.prefix);
        parallel_for(cases.size(), [&](std::size_t k) {
            const auto img = generate_case(cases[k].spec);
            const auto stem = (out / "cases" / cases[k].case_id).string();
            write_volume(img.volume, stem + "_ct.rvol");
            write_mask(img.heart, stem + "_heart.rmsk");
            write_mask(img.lung, stem + "_lung.rmsk");
        });
        for (const auto& c : cases) {
            const auto stem = "cases/" + c.case_id;
            man << c.case_id << ',' << static_cast<int>(c.label) << ',' << part.cohort << ',' << stem << "_ct.rvol,"
                << stem << "_heart.rmsk," << stem << "_lung.rmsk\n";
        }
    }
    const auto path = out / files::manifest;
    csv::write_text(path, man.str());
    return path;
}

// ---------------------------------------------------------------- EAT

inline nlohmann::json eat_json(const EatResult& r, const EatParams& p, const std::string& hash) {
    auto j = stamp(hash);
    j["voxel_count"] = r.voxel_count;
    j["eat_volume_ml"] = r.eat_volume_ml;
    j["attenuation"] = {{"mean", r.attenuation.mean},
                        {"sd", r.attenuation.sd},
                        {"min", r.attenuation.min},
                        {"max", r.attenuation.max}};
    j["params"] = {{"hu_low", p.hu_low},
                   {"hu_high", p.hu_high},
                   {"filter_radius", p.filter_radius},
                   {"filter_mode", p.filter_mode == FilterMode::slice2d ? "2d" : "3d"}};
    return j;
}

// ---------------------------------------------------------------- features

/// Parsed features.csv: case metadata plus one column per feature.
struct FeatureFile {
    std::vector<std::string> case_ids;
    std::vector<int> labels;
    std::vector<std::string> cohorts;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::string config_hash;

    /// Cohorts in order of first appearance.
    [[nodiscard]] std::vector<std::string> cohort_names() const {
        std::vector<std::string> out;
        for (const auto& c : cohorts)
            if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
        return out;
    }

    /// Rows of one cohort (all rows when `cohort` is empty), restricted to
    /// the columns accepted by `keep`.
    template <typename Keep>
    [[nodiscard]] FeatureTable table(const std::string& cohort, Keep keep) const {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < case_ids.size(); ++i)
            if (cohort.empty() || cohorts[i] == cohort) rows.push_back(i);
        std::vector<std::string> ids;
        std::vector<int> y;
        for (auto i : rows) {
            ids.push_back(case_ids[i]);
            y.push_back(labels[i]);
        }
        FeatureTable t(ids, y, cohort);
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (!keep(names[k])) continue;
            std::vector<double> v;
            for (auto i : rows) v.push_back(columns[k][i]);
            t.add_column(names[k], std::move(v));
        }
        return t;
    }
    [[nodiscard]] FeatureTable table(const std::string& cohort = {}) const {
        return table(cohort, [](const std::string&) { return true; });
    }
};

inline bool is_lung_feature(const std::string& name) { return name.rfind("lung_", 0) == 0; }

inline std::string hash_from_comments(const std::vector<std::string>& comments) {
    for (const auto& c : comments) {
        const auto at = c.find("config_hash=");
        if (at != std::string::npos) return c.substr(at + 12, 16);
    }
    return {};
}

inline FeatureFile read_features(const fs::path& path) {
    const auto t = csv::read(path);
    const auto file = path.string();
    if (t.header.size() < 3 || t.header[0] != "case_id" || t.header[1] != "label" || t.header[2] != "cohort")
        throw ManifestError(file + ": expected leading columns case_id,label,cohort");
    FeatureFile f;
    f.config_hash = hash_from_comments(t.comments);
    f.names.assign(t.header.begin() + 3, t.header.end());
    f.columns.assign(f.names.size(), {});
    for (const auto& r : t.rows) {
        f.case_ids.push_back(r[0]);
        f.labels.push_back(parse_label(r[1], file));
        f.cohorts.push_back(r[2]);
        for (std::size_t k = 0; k < f.names.size(); ++k)
            f.columns[k].push_back(csv::parse_double(r[k + 3], file + " column " + f.names[k]));
    }
    if (f.case_ids.empty()) throw ManifestError(file + ": no cases");
    return f;
}

struct CaseFeatures {
    FeatureVector lung;
    FeatureVector eat;
    EatResult eat_result;
};

inline CaseFeatures case_features(const ManifestRow& row, const PipelineConfig& cfg) {
    try {
        const auto vol = read_volume(row.volume);
        const auto lung = read_mask(row.lung);
        CaseFeatures out;
        if (row.eat) {
            const auto eat = read_mask(*row.eat);
            require_aligned(vol.grid(), eat.grid(), "volume and EAT mask");
            out.eat_result.voxel_count = eat.count();
            out.eat_result.eat_volume_ml = mask_volume_ml(eat);
            out.eat_result.attenuation = attenuation_stats(vol, eat);
            out.eat_result.eat_mask = eat;
        } else {
            out.eat_result = extract_eat(vol, read_mask(row.heart), cfg.eat);
        }
        out.lung = radiomics::extract_all(vol, lung, cfg.radiomics);
        out.eat = radiomics::extract_all(vol, out.eat_result.eat_mask, cfg.radiomics);
        if (!out.lung.all_finite() || !out.eat.all_finite()) throw DomainError("non-finite feature value");
        return out;
    } catch (const Error& e) {
        throw Error("case " + row.case_id + ": " + e.what());
    }
}

/// Stage `features`.
inline void run_features(const PipelineConfig& cfg, const fs::path& out, const std::string& hash) {
    const auto rows = read_manifest(cfg.manifest);
    std::vector<CaseFeatures> feats(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) { feats[i] = case_features(rows[i], cfg); });

    std::vector<std::string> names;
    for (const auto& n : feats.front().lung.names()) names.push_back("lung_" + n);
    for (const auto& n : feats.front().eat.names()) names.push_back("eat_" + n);

    std::ostringstream o;
    o << csv::provenance_line(hash) << '\n' << "case_id,label,cohort," << csv::join(names) << '\n';
    std::ostringstream e;
    e << csv::provenance_line(hash) << '\n'
      << "case_id,label,cohort,voxel_count,eat_volume_ml,hu_mean,hu_sd,hu_min,hu_max\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv::check_field(r.case_id, "case_id");
        csv::check_field(r.cohort, "cohort");
        o << r.case_id << ',' << r.label << ',' << r.cohort;
        for (const auto* fv : {&feats[i].lung, &feats[i].eat})
            for (const auto& [n, v] : fv->entries()) o << ',' << csv::format(v);
        o << '\n';
        const auto& er = feats[i].eat_result;
        e << r.case_id << ',' << r.label << ',' << r.cohort << ',' << er.voxel_count << ','
          << csv::format(er.eat_volume_ml) << ',' << csv::format(er.attenuation.mean) << ','
          << csv::format(er.attenuation.sd) << ',' << csv::format(er.attenuation.min) << ','
          << csv::format(er.attenuation.max) << '\n';
    }
    csv::write_text(out / files::features, o.str());
    csv::write_text(out / files::eat_stats, e.str());

    auto meta = stamp(hash);
    meta["radiomics"] = {{"bin_width", cfg.radiomics.bin_width},
                         {"connectivity", cfg.radiomics.connectivity},
                         {"families", cfg.radiomics.families},
                         {"features_per_region", feats.front().lung.size()}};
    meta["eat"] = eat_json(feats.front().eat_result, cfg.eat, hash)["params"];
    meta["n_cases"] = rows.size();
    meta["columns"] = names;
    csv::write_text(out / files::features_meta, dump(meta));
}

// ---------------------------------------------------------------- selection

inline nlohmann::json to_json(const SelectionReport& r) {
    nlohmann::json j;
    j["params"] = {{"alpha", r.params.alpha}, {"corr_threshold", r.params.corr_threshold}, {"max_k", r.params.max_k}};
    j["selected"] = r.selected;
    j["warnings"] = r.warnings;
    auto& fs_ = j["features"] = nlohmann::json::array();
    for (const auto& f : r.features) {
        nlohmann::json e{{"name", f.name},
                         {"auc", f.auc},
                         {"p_value", f.logistic.p_value},
                         {"coef", std::isfinite(f.logistic.coef) ? nlohmann::json(f.logistic.coef)
                                                                  : nlohmann::json(f.logistic.coef > 0 ? "inf" : "-inf")},
                         {"separated", f.logistic.separated},
                         {"kept", f.kept},
                         {"drop_reason", f.drop_reason}};
        if (!f.correlated_with.empty()) {
            e["correlated_with"] = f.correlated_with;
            e["correlation"] = f.correlation;
        }
        fs_.push_back(e);
    }
    return j;
}

inline std::string selection_text(const std::string& set, const SelectionReport& r) {
    std::ostringstream o;
    o << "feature set: " << set << "  (alpha " << r.params.alpha << ", |r| < " << r.params.corr_threshold
      << ", max " << r.params.max_k << ")\n";
    int width = 9;
    for (const auto& f : r.features) width = std::max(width, static_cast<int>(f.name.size()) + 2);
    o << std::left << std::setw(5) << "rank" << std::setw(width) << "feature" << std::setw(10) << "AUC" << std::setw(12)
      << "p" << "status\n";
    std::size_t rank = 0;
    for (const auto& f : r.features) {
        ++rank;
        if (!f.kept && f.drop_reason == "not_significant") continue;
        std::ostringstream auc, p;
        auc << std::fixed << std::setprecision(4) << f.auc;
        p << std::scientific << std::setprecision(2) << f.logistic.p_value;
        o << std::left << std::setw(5) << rank << std::setw(width) << f.name << std::setw(10) << auc.str()
          << std::setw(12) << p.str()
          << (f.kept ? std::string("selected")
                     : f.drop_reason + (f.correlated_with.empty() ? "" : " (" + f.correlated_with + ")"))
          << '\n';
    }
    o << "selected " << r.selected.size() << " of " << r.features.size() << " candidates\n";
    return o.str();
}

/// Stage `select`: both feature sets screened on the training cohort.
inline void run_select(const PipelineConfig& cfg, const fs::path& out, const std::string& hash) {
    const auto ff = read_features(out / files::features);
    const auto lung = select_features(ff.table(cfg.train_cohort, is_lung_feature), cfg.selection);
    const auto both = select_features(ff.table(cfg.train_cohort), cfg.selection);
    auto j = stamp(hash);
    j["train_cohort"] = cfg.train_cohort;
    j["sets"][kLungSet] = to_json(lung);
    j["sets"][kLungEatSet] = to_json(both);
    csv::write_text(out / files::selection, dump(j));
    csv::write_text(out / files::selection_text,
                    "# eatrad " + std::string(kToolVersion) + " config_hash=" + hash + "\n\n" +
                        selection_text(kLungSet, lung) + "\n" + selection_text(kLungEatSet, both));
}

inline std::vector<std::string> read_selected(const fs::path& path, const std::string& set) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        const auto j = nlohmann::json::parse(in);
        return j.at("sets").at(set).at("selected").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- train

/// Stage `train`: one hybrid model per feature set.
inline void run_train(const PipelineConfig& cfg, const fs::path& out, const std::string& hash) {
    const auto ff = read_features(out / files::features);
    const auto table = ff.table(cfg.train_cohort);
    if (table.rows() == 0) throw UsageError("no cases in training cohort '" + cfg.train_cohort + "'");
    for (const auto& [set, file] : {std::pair{kLungSet, files::model_lung}, std::pair{kLungEatSet, files::model}}) {
        const auto selected = read_selected(out / files::selection, set);
        if (selected.empty()) throw DomainError(std::string("feature set ") + set + ": selection is empty");
        train_hybrid(table, selected, cfg.ensemble, hash, set).save(out / file);
    }
}

// ---------------------------------------------------------------- predict

/// Stage `predict`: every case of the feature file, all cohorts.
inline fs::path run_predict(const fs::path& model_path, const fs::path& features_path, const fs::path& out,
                            const std::string& hash) {
    const auto model = ensemble::HybridModel::load(model_path);
    const auto ff = read_features(features_path);
    const auto preds = model.predict(ff.table());
    const auto name = model.info().name.empty() ? model_path.stem().string() : model.info().name;
    csv::check_field(name, "model name");
    std::ostringstream o;
    o << csv::provenance_line(hash) << '\n' << "case_id,label,cohort,model,prob,uncertainty,level";
    for (auto k : model.kinds()) o << ",p_" << ensemble::to_string(k);
    o << '\n';
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        o << ff.case_ids[i] << ',' << ff.labels[i] << ',' << ff.cohorts[i] << ',' << name << ','
          << csv::format(p.mean_prob) << ',' << csv::format(p.uncertainty) << ',' << p.level;
        for (double v : p.per_learner) o << ',' << csv::format(v);
        o << '\n';
    }
    const auto path = out / predictions_file(name);
    csv::write_text(path, o.str());
    return path;
}

// ---------------------------------------------------------------- evaluate

struct PredictionFile {
    std::string model;
    std::vector<std::string> cohorts;  ///< per row
    std::vector<CaseResult> cases;
};

inline PredictionFile read_predictions(const fs::path& path) {
    const auto t = csv::read(path);
    const auto file = path.string();
    const auto c_id = t.column("case_id", file), c_label = t.column("label", file), c_cohort = t.column("cohort", file),
               c_model = t.column("model", file), c_prob = t.column("prob", file),
               c_unc = t.column("uncertainty", file), c_level = t.column("level", file);
    PredictionFile p;
    for (const auto& r : t.rows) {
        if (p.model.empty()) p.model = r[c_model];
        if (r[c_model] != p.model) throw ManifestError(file + ": rows from more than one model");
        CaseResult c;
        c.case_id = r[c_id];
        c.label = parse_label(r[c_label], file);
        c.prob = csv::parse_double(r[c_prob], file + " prob");
        c.uncertainty = csv::parse_double(r[c_unc], file + " uncertainty");
        c.level = static_cast<int>(csv::parse_double(r[c_level], file + " level"));
        if (!(c.prob >= 0.0 && c.prob <= 1.0)) throw ManifestError(file + ": probability outside [0, 1]");
        p.cohorts.push_back(r[c_cohort]);
        p.cases.push_back(std::move(c));
    }
    if (p.cases.empty()) throw ManifestError(file + ": no predictions");
    return p;
}

/// Stage `evaluate`: one report per cohort found in `predictions`.
inline std::vector<fs::path> run_evaluate(const fs::path& predictions, const std::optional<fs::path>& baseline,
                                          const EvaluationParams& params, const fs::path& out,
                                          const std::string& hash) {
    const auto model = read_predictions(predictions);
    std::optional<PredictionFile> base;
    if (baseline) base = read_predictions(*baseline);
    std::vector<std::string> cohorts;
    for (const auto& c : model.cohorts)
        if (std::find(cohorts.begin(), cohorts.end(), c) == cohorts.end()) cohorts.push_back(c);
    std::vector<fs::path> written;
    for (const auto& cohort : cohorts) {
        auto subset = [&](const PredictionFile& f) {
            std::vector<CaseResult> out_cases;
            for (std::size_t i = 0; i < f.cases.size(); ++i)
                if (f.cohorts[i] == cohort) out_cases.push_back(f.cases[i]);
            return out_cases;
        };
        const auto rep = evaluate_cases(subset(model), model.model, cohort, params);
        std::optional<EvaluationReport> base_rep;
        std::optional<ComparisonBlock> cmp;
        if (base) {
            base_rep = evaluate_cases(subset(*base), base->model, cohort, params);
            cmp = compare_reports(*base_rep, rep, params);
        }
        const auto doc = report_document(rep, base_rep ? &*base_rep : nullptr, cmp ? &*cmp : nullptr, params, hash);
        const auto json_path = out / ("report_" + cohort + ".json");
        csv::write_text(json_path, dump(doc));
        std::vector<const EvaluationReport*> curves;
        if (base_rep) curves.push_back(&*base_rep);
        curves.push_back(&rep);
        csv::write_text(out / ("roc_" + cohort + ".svg"), roc_svg(curves, hash));
        csv::write_text(out / ("uncertainty_" + cohort + ".svg"), uncertainty_svg(rep, hash));
        written.push_back(json_path);
    }
    return written;
}

// ---------------------------------------------------------------- run

inline void write_config(const PipelineConfig& cfg, const fs::path& out, const std::string& hash) {
    csv::write_text(out / files::config,
                    "# eatrad " + std::string(kToolVersion) + " config_hash=" + hash + "\n" + to_ini(cfg, false));
}

/// Full pipeline. On failure the partial artifacts stay and a FAILED marker
/// holding the error text is written before the exception propagates.
inline void run_pipeline(const PipelineConfig& cfg, const fs::path& out) {
    validate(cfg);
    const auto hash = config_hash(cfg);
    fs::create_directories(out);
    fs::remove(out / files::failed);
    try {
        write_config(cfg, out, hash);
        run_features(cfg, out, hash);
        run_select(cfg, out, hash);
        run_train(cfg, out, hash);
        const auto lung = run_predict(out / files::model_lung, out / files::features, out, hash);
        const auto both = run_predict(out / files::model, out / files::features, out, hash);
        run_evaluate(both, lung, cfg.evaluation, out, hash);
    } catch (const std::exception& e) {
        csv::write_text(out / files::failed, std::string(e.what()) + "\n");
        throw;
    }
}

}  // namespace eatrad::pipeline
