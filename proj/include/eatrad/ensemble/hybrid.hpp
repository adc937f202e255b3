#pragma once

// Committee of base learners. Prediction = mean member probability,
// uncertainty = population standard deviation of the member probabilities.
//
// Model file:
//   "EATHYB01"  u32 version  u64 n  n bytes of manifest JSON
//   u64 p  p x f64 means  p x f64 sds
//   u64 k  k x (u64 length, learner blob)
// All integers and doubles little-endian.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "eatrad/ensemble/blob.hpp"
#include "eatrad/ensemble/learners.hpp"
#include "eatrad/error.hpp"
#include "eatrad/parallel.hpp"
#include "eatrad/radiomics/feature_vector.hpp"
#include "eatrad/random.hpp"
#include "eatrad/selection.hpp"
#include "eatrad/version.hpp"

namespace eatrad::ensemble {

inline constexpr char kModelMagic[] = "EATHYB01";
inline constexpr std::uint32_t kModelVersion = 1;

/// Level 1..6 for sd in [0,0.1), [0.1,0.2), ..., [0.4,0.5), [0.5,1].
inline int uncertainty_level(double sd) {
    if (!(sd >= 0.0 && sd <= 1.0)) throw DomainError("uncertainty must lie in [0, 1]");
    int level = 1;
    for (double b : {0.1, 0.2, 0.3, 0.4, 0.5})
        if (sd >= b) ++level;
    return level;
}

struct Prediction {
    double mean_prob = 0.0;
    double uncertainty = 0.0;
    int level = 1;
    std::vector<double> per_learner;
};

/// Mean, population sd and level of a set of member probabilities.
inline Prediction summarize(std::vector<double> probs) {
    if (probs.empty()) throw DomainError("no member probabilities");
    Prediction p;
    const auto n = static_cast<double>(probs.size());
    double s = 0.0;
    for (double v : probs) s += v;
    p.mean_prob = s / n;
    double ss = 0.0;
    for (double v : probs) ss += (v - p.mean_prob) * (v - p.mean_prob);
    p.uncertainty = std::sqrt(ss / n);
    p.level = uncertainty_level(p.uncertainty);
    p.per_learner = std::move(probs);
    return p;
}

struct EnsembleConfig {
    std::vector<LearnerKind> kinds{kAllKinds.begin(), kAllKinds.end()};
    Hyperparams hyper;
    std::uint64_t seed = 0;
};

struct FeatureManifest {
    std::vector<std::string> names;
    std::vector<double> means;
    std::vector<double> sds;  ///< population sd, 1 for constant columns
};

struct TrainingInfo {
    std::string name;  ///< free-form label such as the feature set
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::size_t n_train = 0;
    std::size_t n_severe = 0;
    std::vector<std::string> warnings;
};

class HybridModel {
public:
    HybridModel() = default;
    HybridModel(FeatureManifest manifest, std::vector<std::unique_ptr<Learner>> learners, TrainingInfo info)
        : manifest_(std::move(manifest)), learners_(std::move(learners)), info_(std::move(info)) {}

    [[nodiscard]] const FeatureManifest& manifest() const noexcept { return manifest_; }
    [[nodiscard]] const TrainingInfo& info() const noexcept { return info_; }
    [[nodiscard]] std::size_t size() const noexcept { return learners_.size(); }
    [[nodiscard]] const Learner& learner(std::size_t i) const { return *learners_.at(i); }

    [[nodiscard]] std::vector<LearnerKind> kinds() const {
        std::vector<LearnerKind> out;
        for (const auto& l : learners_) out.push_back(l->kind());
        return out;
    }

    /// `raw` holds unstandardized values in manifest order.
    [[nodiscard]] Prediction predict(std::span<const double> raw) const {
        if (raw.size() != manifest_.names.size()) {
            throw ManifestError("expected " + std::to_string(manifest_.names.size()) + " features, got " +
                                std::to_string(raw.size()));
        }
        std::vector<double> z(raw.size());
        for (std::size_t j = 0; j < raw.size(); ++j) z[j] = (raw[j] - manifest_.means[j]) / manifest_.sds[j];
        std::vector<double> probs;
        probs.reserve(learners_.size());
        for (const auto& l : learners_) probs.push_back(l->predict_proba(z));
        return summarize(std::move(probs));
    }

    [[nodiscard]] Prediction predict(const FeatureVector& fv) const {
        std::vector<double> raw;
        raw.reserve(manifest_.names.size());
        for (const auto& n : manifest_.names) raw.push_back(fv.at(n));
        return predict(raw);
    }

    [[nodiscard]] std::vector<Prediction> predict(const FeatureTable& t) const {
        std::vector<std::size_t> cols;
        for (const auto& n : manifest_.names) cols.push_back(t.index_of(n));
        std::vector<Prediction> out(t.rows());
        parallel_for(t.rows(), [&](std::size_t r) {
            std::vector<double> raw;
            raw.reserve(cols.size());
            for (std::size_t c : cols) raw.push_back(t.column(c)[r]);
            out[r] = predict(raw);
        });
        return out;
    }

    [[nodiscard]] nlohmann::json manifest_json() const {
        nlohmann::json j;
        j["format"] = "eatrad-hybrid-model";
        j["version"] = kModelVersion;
        j["name"] = info_.name;
        j["tool_version"] = info_.tool_version;
        j["config_hash"] = info_.config_hash;
        j["seed"] = info_.seed;
        j["n_train"] = info_.n_train;
        j["n_severe"] = info_.n_severe;
        j["warnings"] = info_.warnings;
        j["features"] = manifest_.names;
        j["means"] = manifest_.means;
        j["sds"] = manifest_.sds;
        auto& ls = j["learners"] = nlohmann::json::array();
        for (const auto& l : learners_) ls.push_back(to_string(l->kind()));
        return j;
    }

    [[nodiscard]] std::vector<std::uint8_t> to_bytes() const {
        BlobWriter w;
        for (int k = 0; k < 8; ++k) w.u8(static_cast<std::uint8_t>(kModelMagic[k]));
        w.u32(kModelVersion);
        w.str(manifest_json().dump());
        w.f64s(manifest_.means);
        w.f64s(manifest_.sds);
        w.u64(learners_.size());
        for (const auto& l : learners_) {
            BlobWriter lw;
            l->save(lw);
            w.u64(lw.bytes().size());
            w.raw(lw.bytes());
        }
        return w.take();
    }

    static HybridModel from_bytes(const std::vector<std::uint8_t>& bytes) {
        BlobReader r(bytes);
        for (int k = 0; k < 8; ++k) {
            if (r.u8() != static_cast<std::uint8_t>(kModelMagic[k]))
                throw FormatError("not a hybrid model file", static_cast<std::size_t>(k));
        }
        const auto version = r.u32();
        if (version != kModelVersion)
            throw FormatError("unsupported model version " + std::to_string(version), r.offset() - 4);
        const auto json_at = r.offset();
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(r.str());
        } catch (const nlohmann::json::exception&) {
            throw FormatError("model manifest is not valid JSON", json_at);
        }
        HybridModel m;
        try {
            m.manifest_.names = j.at("features").get<std::vector<std::string>>();
            m.info_.name = j.at("name").get<std::string>();
            m.info_.seed = j.at("seed").get<std::uint64_t>();
            m.info_.config_hash = j.at("config_hash").get<std::string>();
            m.info_.tool_version = j.at("tool_version").get<std::string>();
            m.info_.n_train = j.at("n_train").get<std::size_t>();
            m.info_.n_severe = j.at("n_severe").get<std::size_t>();
            m.info_.warnings = j.at("warnings").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception&) {
            throw FormatError("model manifest lacks required fields", json_at);
        }
        m.manifest_.means = r.f64s();
        m.manifest_.sds = r.f64s();
        if (m.manifest_.means.size() != m.manifest_.names.size() || m.manifest_.sds.size() != m.manifest_.names.size())
            throw FormatError("standardization constants do not match the feature list", r.offset());
        const auto k = r.length(8);
        for (std::size_t i = 0; i < k; ++i) {
            const auto len = r.length(1);
            const auto at = r.offset();
            const auto blob = r.raw(len);
            BlobReader lr(blob.data(), blob.size(), at);
            m.learners_.push_back(load_learner(lr));
            if (!lr.done()) throw FormatError("trailing bytes in learner record", lr.offset());
        }
        if (!r.done()) throw FormatError("trailing bytes after model", r.offset());
        if (m.learners_.empty()) throw FormatError("model has no learners", r.offset());
        return m;
    }

    void save(const std::filesystem::path& path) const {
        const auto b = to_bytes();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create " + path.string());
        out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
        if (!out) throw IoError("write failed: " + path.string());
    }

    static HybridModel load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path.string());
        std::vector<std::uint8_t> b{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        return from_bytes(b);
    }

private:
    FeatureManifest manifest_;
    std::vector<std::unique_ptr<Learner>> learners_;
    TrainingInfo info_;
};

/// Standardizes the selected columns and trains each configured learner
/// (in parallel) with seed derive_seed(cfg.seed, learner index).
inline HybridModel train_hybrid(const FeatureTable& t, const std::vector<std::string>& selected,
                                const EnsembleConfig& cfg, const std::string& config_hash = {},
                                const std::string& name = {}) {
    if (selected.empty()) throw DomainError("train_hybrid: no features selected");
    if (cfg.kinds.empty()) throw UsageError("train_hybrid: no learners configured");
    if (t.count_label(0) == 0 || t.count_label(1) == 0)
        throw DomainError("train_hybrid: both classes must be present in the training table");

    FeatureManifest man;
    man.names = selected;
    Dataset d;
    d.y = t.labels();
    d.x.assign(t.rows(), std::vector<double>(selected.size()));
    for (std::size_t j = 0; j < selected.size(); ++j) {
        const auto col = t.column(selected[j]);  // ManifestError for unknown names
        const double mu = stats::mean(col), sd = stats::pop_sd(col);
        man.means.push_back(mu);
        man.sds.push_back(sd > 0.0 ? sd : 1.0);
        for (std::size_t i = 0; i < t.rows(); ++i) d.x[i][j] = (col[i] - mu) / man.sds[j];
    }
    d.w = cfg.hyper.class_weighted ? balanced_weights(d.y) : std::vector<double>(d.y.size(), 1.0);

    std::vector<std::unique_ptr<Learner>> learners(cfg.kinds.size());
    parallel_for(cfg.kinds.size(), [&](std::size_t i) {
        auto l = make_learner(cfg.kinds[i], cfg.hyper);
        l->fit(d, derive_seed(cfg.seed, i));
        learners[i] = std::move(l);
    });
    TrainingInfo info;
    info.name = name;
    info.seed = cfg.seed;
    info.config_hash = config_hash;
    info.n_train = t.rows();
    info.n_severe = t.count_label(1);
    for (const auto& l : learners)
        if (!l->converged()) info.warnings.push_back(l->warning());
    return HybridModel(std::move(man), std::move(learners), std::move(info));
}

}  // namespace eatrad::ensemble
