#pragma once

#include <algorithm>
#include <array>
#include <sstream>
#include <string>
#include <vector>

#include "eatrad/error.hpp"
#include "eatrad/radiomics/discretize.hpp"
#include "eatrad/radiomics/feature_vector.hpp"
#include "eatrad/radiomics/first_order.hpp"
#include "eatrad/radiomics/glcm.hpp"
#include "eatrad/radiomics/gldm.hpp"
#include "eatrad/radiomics/glrlm.hpp"
#include "eatrad/radiomics/glszm.hpp"
#include "eatrad/radiomics/ngtdm.hpp"

namespace eatrad::radiomics {

/// Feature families in output order.
inline constexpr std::array<const char*, 6> kFamilies{"firstorder", "glcm", "glszm", "glrlm", "ngtdm", "gldm"};

struct RadiomicsConfig {
    double bin_width = 25.0;
    int connectivity = 26;  // zones, dependence and NGTDM neighborhoods
    std::vector<std::string> families{kFamilies.begin(), kFamilies.end()};

    void validate() const {
        if (!(bin_width > 0.0)) throw UsageError("radiomics bin_width must be positive");
        if (connectivity != 6 && connectivity != 26) throw UsageError("radiomics connectivity must be 6 or 26");
        for (const auto& f : families) {
            if (std::find(kFamilies.begin(), kFamilies.end(), f) == kFamilies.end())
                throw UsageError("unknown radiomics family '" + f + "'");
        }
    }

    [[nodiscard]] bool enabled(const std::string& family) const {
        return std::find(families.begin(), families.end(), family) != families.end();
    }
};

/// All enabled families, concatenated in kFamilies order (93 features by default).
inline FeatureVector extract_all(const Volume& v, const Mask& m, const RadiomicsConfig& cfg = {}) {
    cfg.validate();
    const DiscretizedRegion d = discretize(v, m, cfg.bin_width);
    FeatureVector out;
    if (cfg.enabled("firstorder")) out.append(first_order(v, m, cfg.bin_width));
    if (cfg.enabled("glcm")) out.append(glcm_features(d));
    if (cfg.enabled("glszm")) out.append(glszm_features(d, cfg.connectivity));
    if (cfg.enabled("glrlm")) out.append(glrlm_features(d));
    if (cfg.enabled("ngtdm")) out.append(ngtdm_features(d, cfg.connectivity));
    if (cfg.enabled("gldm")) out.append(gldm_features(d, cfg.connectivity));
    return out;
}

}  // namespace eatrad::radiomics
