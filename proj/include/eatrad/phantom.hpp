#pragma once

// Deterministic ellipsoid phantoms: a heart with a fat-bearing outer shell and
// two lungs with a smooth opacity texture. Severity changes the EAT attenuation
// profile (severe: mean nearer -30 HU, wider spread) and, more weakly, the lung
// texture. The default profiles are synthetic and carry no clinical meaning.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "eatrad/error.hpp"
#include "eatrad/random.hpp"
#include "eatrad/volume.hpp"

namespace eatrad {

enum class Severity : int { mild = 0, severe = 1 };

inline const char* to_string(Severity s) { return s == Severity::severe ? "severe" : "mild"; }

inline Severity parse_severity(const std::string& s) {
    if (s == "mild" || s == "0") return Severity::mild;
    if (s == "severe" || s == "1") return Severity::severe;
    throw SpecError("unknown severity label '" + s + "'");
}

/// Axis-aligned ellipsoid in voxel index coordinates.
struct Ellipsoid {
    std::array<double, 3> center{};
    std::array<double, 3> radii{1, 1, 1};

    [[nodiscard]] double rho(double x, double y, double z) const noexcept {
        const double a = (x - center[0]) / radii[0];
        const double b = (y - center[1]) / radii[1];
        const double c = (z - center[2]) / radii[2];
        return std::sqrt(a * a + b * b + c * c);
    }
};

struct PhantomSpec {
    std::array<std::size_t, 3> dims{48, 40, 20};
    std::array<double, 3> spacing{0.8, 0.8, 5.0};
    Ellipsoid heart{{24.0, 22.0, 10.0}, {12.0, 10.0, 6.0}};
    double heart_shell_thickness = 3.0;  // voxels, measured along the mean radius
    std::array<Ellipsoid, 2> lungs{Ellipsoid{{9.5, 19.5, 10.0}, {7.5, 13.0, 8.0}},
                                   Ellipsoid{{38.5, 19.5, 10.0}, {7.5, 13.0, 8.0}}};
    double fat_fraction_in_heart_shell = 0.45;
    double eat_attenuation_mean = -90.0;
    double eat_attenuation_sd = 8.0;
    double lung_texture_scale = 0.25;
    Severity label = Severity::mild;
    std::uint64_t rng_seed = 0;

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] == 0) throw SpecError("phantom dims must be positive");
            if (!(spacing[a] > 0)) throw SpecError("phantom spacing must be positive");
        }
        if (!(eat_attenuation_mean > -190.0 && eat_attenuation_mean < -30.0))
            throw SpecError("eat_attenuation_mean must lie in (-190, -30) HU");
        if (!(eat_attenuation_sd >= 0.0)) throw SpecError("eat_attenuation_sd must be >= 0");
        if (!(fat_fraction_in_heart_shell >= 0.0 && fat_fraction_in_heart_shell <= 1.0))
            throw SpecError("fat_fraction_in_heart_shell must lie in [0, 1]");
        if (!(lung_texture_scale >= 0.0)) throw SpecError("lung_texture_scale must be >= 0");
        if (!(heart_shell_thickness > 0.0)) throw SpecError("heart_shell_thickness must be > 0");
        auto fits = [&](const Ellipsoid& e, const char* what) {
            for (int a = 0; a < 3; ++a) {
                if (!(e.radii[a] > 0.0)) throw SpecError(std::string(what) + " radii must be positive");
                if (e.center[a] - e.radii[a] < -0.5 || e.center[a] + e.radii[a] > static_cast<double>(dims[a]) - 0.5)
                    throw SpecError(std::string(what) + " ellipsoid exceeds phantom dims");
            }
        };
        fits(heart, "heart");
        fits(lungs[0], "lung");
        fits(lungs[1], "lung");
    }
};

struct PhantomImage {
    Volume volume;
    Mask heart;
    Mask lung;
};

namespace phantom_detail {

/// Sum of plane waves with random orientation and phase, normalized to [0, 1].
class SmoothField {
public:
    SmoothField(Rng& rng, int waves, double wavenumber) {
        for (int k = 0; k < waves; ++k) {
            const double u = rng.uniform(-1.0, 1.0);
            const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double s = std::sqrt(1.0 - u * u);
            waves_.push_back({wavenumber * s * std::cos(phi), wavenumber * s * std::sin(phi), wavenumber * u,
                              rng.uniform(0.0, 2.0 * std::numbers::pi)});
        }
    }

    [[nodiscard]] double operator()(double x, double y, double z) const noexcept {
        double f = 0.0;
        for (const auto& w : waves_) f += std::cos(w[0] * x + w[1] * y + w[2] * z + w[3]);
        return 0.5 * (f / static_cast<double>(waves_.size()) + 1.0);
    }

private:
    std::vector<std::array<double, 4>> waves_;
};

inline std::int16_t to_hu(double v, double lo, double hi) {
    return static_cast<std::int16_t>(std::clamp(std::round(v), lo, hi));
}

}  // namespace phantom_detail

/// Pure function of `spec`: identical specs give bit-identical images.
inline PhantomImage generate_case(const PhantomSpec& spec) {
    using namespace phantom_detail;
    spec.validate();
    Grid grid;
    grid.dims = spec.dims;
    grid.spacing = spec.spacing;
    const std::size_t n = grid.size();

    Rng rng(spec.rng_seed);
    const SmoothField fat_field(rng, 4, 0.35);
    const SmoothField lung_field(rng, 6, 0.6);

    const double mean_radius = (spec.heart.radii[0] + spec.heart.radii[1] + spec.heart.radii[2]) / 3.0;
    const double shell_inner = std::max(0.0, 1.0 - spec.heart_shell_thickness / mean_radius);

    std::vector<std::uint8_t> heart(n, 0), lung(n, 0);
    std::vector<std::size_t> shell_idx;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = grid.coords(i);
        const double x = static_cast<double>(p[0]), y = static_cast<double>(p[1]), z = static_cast<double>(p[2]);
        const double rho = spec.heart.rho(x, y, z);
        if (rho <= 1.0) {
            heart[i] = 1;
            if (rho >= shell_inner) {
                shell_idx.push_back(i);
            }
        } else if (spec.lungs[0].rho(x, y, z) <= 1.0 || spec.lungs[1].rho(x, y, z) <= 1.0) {
            lung[i] = 1;
        }
    }

    // fat = the shell voxels with the highest smooth-field value
    std::vector<std::uint8_t> fat(n, 0);
    const auto n_fat = static_cast<std::size_t>(
        std::llround(spec.fat_fraction_in_heart_shell * static_cast<double>(shell_idx.size())));
    if (n_fat > 0) {
        std::vector<double> key(shell_idx.size());
        for (std::size_t k = 0; k < shell_idx.size(); ++k) {
            const auto p = grid.coords(shell_idx[k]);
            key[k] = fat_field(static_cast<double>(p[0]), static_cast<double>(p[1]), static_cast<double>(p[2]));
        }
        std::vector<std::size_t> order(shell_idx.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
        for (std::size_t k = 0; k < n_fat; ++k) fat[shell_idx[order[k]]] = 1;
    }

    std::vector<std::int16_t> vox(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = grid.coords(i);
        const double x = static_cast<double>(p[0]), y = static_cast<double>(p[1]), z = static_cast<double>(p[2]);
        if (fat[i]) {
            vox[i] = to_hu(rng.normal(spec.eat_attenuation_mean, spec.eat_attenuation_sd), -189.0, -31.0);
        } else if (heart[i]) {
            vox[i] = to_hu(rng.normal(40.0, 10.0), -20.0, 200.0);  // blood / myocardium
        } else if (lung[i]) {
            const double opacity = 300.0 * spec.lung_texture_scale * lung_field(x, y, z);
            vox[i] = to_hu(-870.0 + opacity + rng.normal(0.0, 30.0), -1024.0, -100.0);
        } else {
            vox[i] = to_hu(rng.normal(30.0, 10.0), -20.0, 200.0);  // soft tissue
        }
    }
    return {Volume(grid, std::move(vox)), Mask(grid, std::move(heart)), Mask(grid, std::move(lung))};
}

/// Severity-dependent sampling profile used by generate_cohort.
struct AttenuationProfile {
    double eat_mean;
    double eat_sd;
    double lung_texture_scale;
};

struct CohortProfile {
    AttenuationProfile mild{-90.0, 8.0, 0.25};
    AttenuationProfile severe{-55.0, 18.0, 0.35};
    double eat_mean_jitter = 10.0;     // HU, between-case sd of the EAT mean
    double eat_sd_log_jitter = 0.25;   // between-case log-sd of the EAT spread
    double lung_texture_jitter = 0.1;  // between-case sd of the lung texture scale
    double fat_fraction_min = 0.3;
    double fat_fraction_max = 0.6;
};

struct PhantomCase {
    std::string case_id;
    Severity label = Severity::mild;
    PhantomSpec spec;
};

/// n_mild mild cases followed by n_severe severe cases. Case k draws its
/// parameters from derive_seed(seed, k), so any case can be regenerated alone.
inline std::vector<PhantomCase> generate_cohort(std::size_t n_mild, std::size_t n_severe, const PhantomSpec& base,
                                                std::uint64_t seed, const CohortProfile& profile = {},
                                                const std::string& id_prefix = "case") {
    if (n_mild + n_severe < 2) throw SpecError("a cohort needs at least two cases");
    base.validate();
    std::vector<PhantomCase> out;
    out.reserve(n_mild + n_severe);
    for (std::size_t k = 0; k < n_mild + n_severe; ++k) {
        const Severity label = k < n_mild ? Severity::mild : Severity::severe;
        const auto& p = label == Severity::severe ? profile.severe : profile.mild;
        const std::uint64_t case_seed = derive_seed(seed, k);
        Rng rng(case_seed);
        PhantomSpec s = base;
        s.label = label;
        s.eat_attenuation_mean = std::clamp(rng.normal(p.eat_mean, profile.eat_mean_jitter), -185.0, -35.0);
        s.eat_attenuation_sd = p.eat_sd * std::exp(rng.normal(0.0, profile.eat_sd_log_jitter));
        s.lung_texture_scale = std::clamp(rng.normal(p.lung_texture_scale, profile.lung_texture_jitter), 0.0, 1.0);
        s.fat_fraction_in_heart_shell = rng.uniform(profile.fat_fraction_min, profile.fat_fraction_max);
        s.rng_seed = derive_seed(case_seed, 1);
        s.validate();
        std::string id = std::to_string(k);
        id.insert(0, id.size() < 4 ? 4 - id.size() : 0, '0');
        out.push_back({id_prefix + id, label, s});
    }
    return out;
}

}  // namespace eatrad
