// Acceptance checks 1-7. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eatrad/pipeline/stages.hpp"
#include "oracle/metrics_oracle.hpp"
#include "oracle/radiomics_oracle.hpp"
#include "test_support.hpp"

using namespace eatrad;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Mask random_mask(Rng& rng, const Grid& g, double p) {
    Mask m(g);
    for (std::size_t i = 0; i < g.size(); ++i) m.set(i, rng.uniform() < p);
    return m;
}

// ---------------------------------------------------------------- 1

Outcome radiomics_oracle_suite() {
    Outcome o;
    const auto t0 = Clock::now();
    std::size_t regions = 0, values = 0;
    for (std::uint64_t seed = 5000; seed < 5120; ++seed) {
        const auto [v, m] = testing_support::random_region(seed, 6, 6);
        const int ng = radiomics::discretize(v, m, 25.0).ng;
        if (ng > 6) {
            o.fail("region " + std::to_string(seed) + " has Ng " + std::to_string(ng));
            continue;
        }
        for (int conn : {26, 6}) {
            radiomics::RadiomicsConfig cfg;
            cfg.connectivity = conn;
            const auto f = radiomics::extract_all(v, m, cfg);
            const auto ref = oracle::all(v, m, cfg.bin_width, conn);
            if (f.size() != ref.size()) o.fail("feature count differs from oracle");
            for (const auto& [name, value] : f) {
                ++values;
                const auto it = ref.find(name);
                if (it == ref.end()) {
                    o.fail("oracle lacks " + name);
                } else if (!oracle::close(value, it->second, 1e-9)) {
                    o.fail("seed " + std::to_string(seed) + " " + name + ": " + std::to_string(value) + " vs " +
                           std::to_string(it->second));
                }
            }
        }
        ++regions;
    }
    const double t = seconds_since(t0);
    if (t >= 60.0) o.fail("runtime " + fmt(t, 1) + " s");
    if (o.pass)
        o.detail = std::to_string(regions) + " regions, " + std::to_string(values) + " feature values within 1e-9, " +
                   fmt(t, 2) + " s";
    return o;
}

// ---------------------------------------------------------------- 2

Outcome threshold_fidelity() {
    Outcome o;
    const auto g = testing_support::grid(5, 5, 5);
    std::size_t volumes = 0, voxels = 0;
    auto check = [&](const std::vector<std::int16_t>& hu, const Mask& heart, const std::string& name) {
        const Volume v(g, hu);
        EatParams p;
        p.filter_radius = 0;
        const auto r = extract_eat(v, heart, p);
        std::set<std::size_t> want, got;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (heart.at(i) && hu[i] >= -190 && hu[i] <= -30) want.insert(i);
            if (r.eat_mask.at(i)) got.insert(i);
        }
        if (want != got) o.fail(name + ": voxel sets differ");
        ++volumes;
        voxels += want.size();
    };
    // boundary values in every position of a full heart
    {
        const std::vector<int> ladder{-1000, -191, -190, -189, -100, -31, -30, -29, 0, 100};
        std::vector<std::int16_t> hu(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) hu[i] = static_cast<std::int16_t>(ladder[i % ladder.size()]);
        Mask heart(g);
        for (std::size_t i = 0; i < g.size(); ++i) heart.set(i, true);
        check(hu, heart, "boundary ladder");
    }
    // coordinate pattern, heart = central 3-cube plus a corner
    {
        std::vector<std::int16_t> hu(g.size());
        Mask heart(g);
        for (std::size_t z = 0; z < 5; ++z)
            for (std::size_t y = 0; y < 5; ++y)
                for (std::size_t x = 0; x < 5; ++x) {
                    const auto i = g.index(x, y, z);
                    hu[i] = static_cast<std::int16_t>(-250 + 25 * ((x + 2 * y + 3 * z) % 11));
                    heart.set(i, (x >= 1 && x <= 3 && y >= 1 && y <= 3 && z >= 1 && z <= 3) || i == 0);
                }
        check(hu, heart, "coordinate pattern");
    }
    // random HU concentrated around both bounds, random hearts
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        std::vector<std::int16_t> hu(g.size());
        for (auto& h : hu) {
            const int centre = rng.below(2) ? -190 : -30;
            h = static_cast<std::int16_t>(centre - 3 + static_cast<int>(rng.below(7)));
        }
        check(hu, random_mask(rng, g, 0.6), "random " + std::to_string(seed));
    }
    if (o.pass)
        o.detail = std::to_string(volumes) + " volumes, " + std::to_string(voxels) + " EAT voxels, exact set equality";
    return o;
}

// ---------------------------------------------------------------- 3

Outcome metric_identities() {
    Outcome o;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        std::vector<double> s(30);
        std::vector<int> y(30);
        for (std::size_t i = 0; i < 30; ++i) {
            y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.below(2));
            s[i] = seed % 2 ? static_cast<double>(rng.below(8)) / 8.0 : rng.uniform();  // half with ties
        }
        if (roc_auc(s, y) != oracle::auc(s, y)) o.fail("AUC differs from pair count, seed " + std::to_string(seed));
    }
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const auto g = testing_support::grid(6, 6, 6, {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(1.0, 5.0)});
        const auto a = random_mask(rng, g, rng.uniform(0.05, 0.7));
        auto b = random_mask(rng, g, rng.uniform(0.05, 0.7));
        if (dice(a, b) != oracle::dice(a, b)) o.fail("dice differs, seed " + std::to_string(seed));
        if (!a.empty() && !b.empty() && hausdorff(a, b) != oracle::hausdorff(a, b))
            o.fail("hausdorff differs, seed " + std::to_string(seed));
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        std::vector<double> p(40), q(40);
        std::vector<int> y(40);
        for (std::size_t i = 0; i < 40; ++i) {
            y[i] = static_cast<int>(i % 2);
            p[i] = rng.uniform();
            q[i] = rng.uniform();
        }
        const auto same = compare_models(p, p, y, 200, seed);
        if (same.nri != 0.0 || same.idi != 0.0 || same.delta_auc != 0.0) o.fail("identical models not zero");
        const auto fwd = compare_models(p, q, y, 200, seed), back = compare_models(q, p, y, 200, seed);
        if (fwd.nri != -back.nri || fwd.idi != -back.idi || fwd.delta_auc != -back.delta_auc)
            o.fail("not antisymmetric, seed " + std::to_string(seed));
    }
    if (o.pass) o.detail = "1000 AUC instances, 200 mask pairs, 50 comparison pairs exact";
    return o;
}

// ---------------------------------------------------------------- 4

Outcome ensemble_contract() {
    Outcome o;
    Rng rng(77);
    const std::size_t n = 80;
    std::vector<std::string> ids;
    std::vector<int> y;
    std::vector<std::vector<double>> cols(4, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("c" + std::to_string(i));
        y.push_back(static_cast<int>(i % 2));
        for (std::size_t j = 0; j < 4; ++j) cols[j][i] = rng.normal(y.back() * (1.0 + j), 1.0 + j);
    }
    FeatureTable t(ids, y);
    for (std::size_t j = 0; j < 4; ++j) t.add_column("f" + std::to_string(j), cols[j]);
    ensemble::EnsembleConfig cfg;
    cfg.seed = 3;
    const auto model = train_hybrid(t, {"f0", "f1", "f2", "f3"}, cfg);
    if (model.size() != 7) o.fail("model has " + std::to_string(model.size()) + " learners");
    const auto& man = model.manifest();
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> raw(4);
        for (auto& v : raw) v = rng.normal(0.0, trial % 10 == 0 ? 100.0 : 3.0);
        const auto p = model.predict(raw);
        std::vector<double> z(4);
        for (std::size_t j = 0; j < 4; ++j) z[j] = (raw[j] - man.means[j]) / man.sds[j];
        double sum = 0.0;
        std::vector<double> member;
        for (std::size_t k = 0; k < model.size(); ++k) {
            member.push_back(model.learner(k).predict_proba(z));
            sum += member.back();
        }
        const double mean = sum / static_cast<double>(member.size());
        double ss = 0.0;
        for (double v : member) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(member.size()));
        if (p.per_learner != member) o.fail("member probabilities differ");
        if (p.mean_prob != mean) o.fail("mean differs at trial " + std::to_string(trial));
        if (p.uncertainty != sd) o.fail("sd differs at trial " + std::to_string(trial));
    }
    const std::vector<std::pair<double, int>> bounds{{0.0, 1}, {0.1, 2}, {0.2, 3}, {0.3, 4},
                                                     {0.4, 5}, {0.5, 6}, {1.0, 6}};
    for (const auto& [sd, level] : bounds)
        if (ensemble::uncertainty_level(sd) != level) o.fail("level of " + fmt(sd, 1) + " is not " + std::to_string(level));
    if (o.pass) o.detail = "1000 inputs exact, boundary levels {0,.1,.2,.3,.4,.5,1} -> {1,2,3,4,5,6,6}";
    return o;
}

// ---------------------------------------------------------------- 5-7

struct EndToEnd {
    Outcome incremental, determinism, bootstrap;
};

EndToEnd end_to_end() {
    EndToEnd r;
    const testing_support::TempDir dir("acceptance");
    pipeline::PipelineConfig cfg;  // 100+100 train, 50+50 validation, 1000 bootstrap resamples
    const auto hash = pipeline::config_hash(cfg);

    const auto t0 = Clock::now();
    cfg.manifest = pipeline::write_phantom_cohorts(cfg, dir.path() / "data", hash);
    pipeline::run_pipeline(cfg, dir.path() / "run1");
    const double elapsed = seconds_since(t0);

    const auto doc = nlohmann::json::parse(slurp(dir.path() / "run1" / "report_validation.json"));
    const double auc_new = doc["model"]["auc"], auc_old = doc["baseline"]["auc"];
    const double nri = doc["comparison"]["nri"], idi = doc["comparison"]["idi"];
    const std::size_t n_val = doc["model"]["n"], n_sev = doc["model"]["n_severe"];
    auto& inc = r.incremental;
    if (n_val != 100 || n_sev != 50) inc.fail("validation cohort is " + std::to_string(n_val) + " cases");
    if (!(auc_new >= auc_old + 0.05)) inc.fail("AUC gain " + fmt(auc_new - auc_old) + " < 0.05");
    if (!(nri > 0.0)) inc.fail("NRI " + fmt(nri) + " not > 0");
    if (!(idi > 0.0)) inc.fail("IDI " + fmt(idi) + " not > 0");
    if (!(elapsed < 300.0)) inc.fail("runtime " + fmt(elapsed, 1) + " s");
    if (inc.pass)
        inc.detail = "validation AUC lung+EAT " + fmt(auc_new) + " vs lung " + fmt(auc_old) + ", NRI " + fmt(nri) +
                     ", IDI " + fmt(idi) + ", " + fmt(elapsed, 1) + " s";

    pipeline::run_pipeline(cfg, dir.path() / "run2");
    std::vector<std::string> compared;
    for (const auto& e : fs::directory_iterator(dir.path() / "run1")) {
        const auto name = e.path().filename().string();
        const auto ext = e.path().extension().string();
        if (ext != ".csv" && ext != ".bin" && ext != ".json") continue;
        compared.push_back(name);
        if (slurp(e.path()) != slurp(dir.path() / "run2" / name)) r.determinism.fail(name + " differs between runs");
    }
    for (const char* must : {"features.csv", "model.bin", "model_lung.bin", "report_validation.json"})
        if (std::find(compared.begin(), compared.end(), must) == compared.end())
            r.determinism.fail(std::string(must) + " missing");
    if (r.determinism.pass) r.determinism.detail = std::to_string(compared.size()) + " CSV/model/JSON files byte-identical";

    const double lo = doc["model"]["auc_ci"]["low"], hi = doc["model"]["auc_ci"]["high"];
    const std::size_t n_boot = doc["metadata"]["n_boot"];
    auto& bs = r.bootstrap;
    if (n_boot != 1000) bs.fail("n_boot " + std::to_string(n_boot));
    if (!(hi - lo < 0.25)) bs.fail("CI width " + fmt(hi - lo));
    if (!(lo <= auc_new && auc_new <= hi)) bs.fail("CI [" + fmt(lo) + ", " + fmt(hi) + "] excludes " + fmt(auc_new));
    if (bs.pass) bs.detail = "AUC " + fmt(auc_new) + " in [" + fmt(lo) + ", " + fmt(hi) + "], width " + fmt(hi - lo);
    return r;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, Outcome>> results;
    auto guarded = [&](const std::string& label, auto fn) {
        try {
            results.emplace_back(label, fn());
        } catch (const std::exception& e) {
            Outcome o;
            o.fail(std::string("exception: ") + e.what());
            results.emplace_back(label, o);
        }
    };
    guarded("1 radiomics oracle suite", radiomics_oracle_suite);
    guarded("2 threshold fidelity", threshold_fidelity);
    guarded("3 metric identities", metric_identities);
    guarded("4 ensemble contract", ensemble_contract);
    try {
        auto e = end_to_end();
        results.emplace_back("5 incremental value of EAT features", e.incremental);
        results.emplace_back("6 determinism", e.determinism);
        results.emplace_back("7 bootstrap sanity", e.bootstrap);
    } catch (const std::exception& ex) {
        Outcome o;
        o.fail(std::string("exception: ") + ex.what());
        for (const char* l : {"5 incremental value of EAT features", "6 determinism", "7 bootstrap sanity"})
            results.emplace_back(l, o);
    }
    bool all = true;
    for (const auto& [label, o] : results) {
        std::cout << "criterion " << label << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << ")\n";
        all &= o.pass;
    }
    std::cout << (all ? "all criteria passed" : "some criteria FAILED") << std::endl;
    return all ? 0 : 1;
}
