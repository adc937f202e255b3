#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 usage or configuration error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eatrad/pipeline/stages.hpp"

namespace eatrad {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

/// Flags that override config-file values; unset flags leave them alone.
struct Overrides {
    std::optional<std::string> manifest, train_cohort;
    std::optional<std::size_t> train_mild, train_severe, val_mild, val_severe;
    std::optional<int> hu_low, hu_high, filter_radius;
    bool filter_2d = false;
    std::optional<double> bin_width;
    std::optional<int> connectivity;
    std::optional<double> alpha, corr_threshold;
    std::optional<std::size_t> max_k;
    std::optional<std::string> learners;
    std::optional<std::size_t> n_boot;

    void apply(pipeline::PipelineConfig& c) const {
        if (manifest) c.manifest = *manifest;
        if (train_cohort) c.train_cohort = *train_cohort;
        if (train_mild) c.phantom.train_mild = *train_mild;
        if (train_severe) c.phantom.train_severe = *train_severe;
        if (val_mild) c.phantom.validation_mild = *val_mild;
        if (val_severe) c.phantom.validation_severe = *val_severe;
        auto hu = [](int v) {
            if (v < -32768 || v > 32767) throw UsageError("HU bound out of range");
            return static_cast<std::int16_t>(v);
        };
        if (hu_low) c.eat.hu_low = hu(*hu_low);
        if (hu_high) c.eat.hu_high = hu(*hu_high);
        if (filter_radius) c.eat.filter_radius = *filter_radius;
        if (filter_2d) c.eat.filter_mode = FilterMode::slice2d;
        if (bin_width) c.radiomics.bin_width = *bin_width;
        if (connectivity) c.radiomics.connectivity = *connectivity;
        if (alpha) c.selection.alpha = *alpha;
        if (corr_threshold) c.selection.corr_threshold = *corr_threshold;
        if (max_k) c.selection.max_k = *max_k;
        if (learners) {
            std::istringstream in("[ensemble]\nlearners = " + *learners + "\n");
            pipeline::apply_ini(c, in);
        }
        if (n_boot) c.evaluation.n_boot = *n_boot;
    }
};

template <typename T>
void opt(CLI::App* app, const std::string& flag, std::optional<T>& target, const std::string& help) {
    app->add_option_function<T>(flag, [&target](const T& v) { target = v; }, help);
}

}  // namespace cli_detail

/// Parses argv and runs the chosen subcommand.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    namespace fs = std::filesystem;
    using namespace pipeline;

    CLI::App app{"Epicardial fat and lung radiomics pipeline with a hybrid ensemble classifier", "eatrad"};
    app.set_version_flag("--version", std::string("eatrad ") + kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_file;
    std::string out_dir = "eatrad_out";
    cli_detail::opt(&app, "--seed", seed, "seed for every stochastic stage (phantom, ensemble, bootstrap)");
    cli_detail::opt(&app, "--config", config_file, "INI configuration file");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();

    cli_detail::Overrides ov;

    auto* phantom = app.add_subcommand("phantom", "generate train and validation phantom cohorts with a manifest");
    cli_detail::opt(phantom, "--train-mild", ov.train_mild, "mild cases in the training cohort");
    cli_detail::opt(phantom, "--train-severe", ov.train_severe, "severe cases in the training cohort");
    cli_detail::opt(phantom, "--val-mild", ov.val_mild, "mild cases in the validation cohort");
    cli_detail::opt(phantom, "--val-severe", ov.val_severe, "severe cases in the validation cohort");

    std::string volume_path, heart_path;
    std::optional<std::string> mask_out, json_out;
    auto* eat = app.add_subcommand("extract-eat", "threshold and filter EAT inside a heart mask");
    eat->add_option("--volume", volume_path, "CT volume (RVOL)")->required();
    eat->add_option("--heart", heart_path, "heart mask (RMSK)")->required();
    cli_detail::opt(eat, "--mask-out", mask_out, "EAT mask output (default <out>/eat.rmsk)");
    cli_detail::opt(eat, "--json-out", json_out, "statistics output (default <out>/eat.json)");

    auto* features = app.add_subcommand("features", "compute lung and EAT radiomics for every manifest case");
    auto* select = app.add_subcommand("select", "screen and rank features on the training cohort");
    auto* train = app.add_subcommand("train", "train the lung-only and lung+EAT hybrid models");

    std::optional<std::string> model_path, features_path;
    auto* predict = app.add_subcommand("predict", "apply a hybrid model to a feature table");
    cli_detail::opt(predict, "--model", model_path, "model file (default <out>/model.bin)");
    cli_detail::opt(predict, "--features", features_path, "feature table (default <out>/features.csv)");

    std::string predictions_path;
    std::optional<std::string> baseline_path;
    auto* evaluate = app.add_subcommand("evaluate", "per-cohort reports and plots from predictions");
    evaluate->add_option("--predictions", predictions_path, "predictions CSV of the model under test")->required();
    cli_detail::opt(evaluate, "--baseline", baseline_path, "predictions CSV of the baseline model");

    auto* run = app.add_subcommand("run", "features, select, train, predict and evaluate in one go");

    for (auto* sub : {eat, features, run}) {
        cli_detail::opt(sub, "--hu-low", ov.hu_low, "lower HU bound, inclusive");
        cli_detail::opt(sub, "--hu-high", ov.hu_high, "upper HU bound, inclusive");
        cli_detail::opt(sub, "--filter-radius", ov.filter_radius, "median filter radius in voxels");
        sub->add_flag("--filter-2d", ov.filter_2d, "filter each slice separately");
    }
    for (auto* sub : {features, run}) {
        cli_detail::opt(sub, "--manifest", ov.manifest, "cohort manifest CSV");
        cli_detail::opt(sub, "--bin-width", ov.bin_width, "gray-level bin width in HU");
        cli_detail::opt(sub, "--connectivity", ov.connectivity, "6 or 26");
    }
    for (auto* sub : {select, train, run, phantom}) cli_detail::opt(sub, "--train-cohort", ov.train_cohort, "training cohort name");
    for (auto* sub : {select, run}) {
        cli_detail::opt(sub, "--alpha", ov.alpha, "significance level of the univariate screen");
        cli_detail::opt(sub, "--corr-threshold", ov.corr_threshold, "pairwise |r| limit");
        cli_detail::opt(sub, "--max-k", ov.max_k, "maximum number of selected features");
    }
    for (auto* sub : {train, run}) cli_detail::opt(sub, "--learners", ov.learners, "comma list of base learners");
    for (auto* sub : {evaluate, run}) cli_detail::opt(sub, "--n-boot", ov.n_boot, "bootstrap resamples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const fs::path out_path = out_dir;
    try {
        PipelineConfig cfg = config_file ? load_config(*config_file) : PipelineConfig{};
        ov.apply(cfg);
        if (seed) cfg.set_seed(*seed);
        validate(cfg);
        const auto hash = config_hash(cfg);
        fs::create_directories(out_path);

        if (phantom->parsed()) {
            const auto m = write_phantom_cohorts(cfg, out_path, hash);
            out << "wrote " << m.string() << '\n';
        } else if (eat->parsed()) {
            const auto vol = read_volume(volume_path);
            const auto heart = read_mask(heart_path);
            const auto r = extract_eat(vol, heart, cfg.eat);
            const fs::path mpath = mask_out ? fs::path(*mask_out) : out_path / "eat.rmsk";
            const fs::path jpath = json_out ? fs::path(*json_out) : out_path / "eat.json";
            write_mask(r.eat_mask, mpath);
            csv::write_text(jpath, dump(eat_json(r, cfg.eat, hash)));
            out << "EAT " << r.voxel_count << " voxels, " << r.eat_volume_ml << " mL\n";
        } else if (features->parsed()) {
            write_config(cfg, out_path, hash);
            run_features(cfg, out_path, hash);
        } else if (select->parsed()) {
            write_config(cfg, out_path, hash);
            run_select(cfg, out_path, hash);
        } else if (train->parsed()) {
            write_config(cfg, out_path, hash);
            run_train(cfg, out_path, hash);
        } else if (predict->parsed()) {
            write_config(cfg, out_path, hash);
            const auto p = run_predict(model_path ? fs::path(*model_path) : out_path / files::model,
                                       features_path ? fs::path(*features_path) : out_path / files::features,
                                       out_path, hash);
            out << "wrote " << p.string() << '\n';
        } else if (evaluate->parsed()) {
            write_config(cfg, out_path, hash);
            std::optional<fs::path> base;
            if (baseline_path) base = *baseline_path;
            for (const auto& p : run_evaluate(predictions_path, base, cfg.evaluation, out_path, hash))
                out << "wrote " << p.string() << '\n';
        } else if (run->parsed()) {
            run_pipeline(cfg, out_path);
            out << "pipeline complete in " << out_path.string() << '\n';
        }
    } catch (const UsageError& e) {
        err << "eatrad: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SpecError& e) {
        err << "eatrad: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "eatrad: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace eatrad
