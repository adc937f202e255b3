#include <gtest/gtest.h>

#include <set>

#include "eatrad/eat.hpp"
#include "eatrad/phantom.hpp"
#include "eatrad/volume_io.hpp"

using namespace eatrad;

namespace {

PhantomSpec large_spec() {
    PhantomSpec s;
    s.dims = {96, 96, 40};
    s.heart = {{48, 48, 20}, {40, 40, 18}};
    s.heart_shell_thickness = 8.0;
    s.lungs = {Ellipsoid{{5, 48, 20}, {4, 20, 10}}, Ellipsoid{{90, 48, 20}, {4, 20, 10}}};
    s.fat_fraction_in_heart_shell = 1.0;
    return s;
}

}  // namespace

TEST(Phantom, DefaultSpecIsValid) {
    EXPECT_NO_THROW(PhantomSpec{}.validate());
    const auto img = generate_case(PhantomSpec{});
    EXPECT_FALSE(img.heart.empty());
    EXPECT_FALSE(img.lung.empty());
}

TEST(Phantom, GeometryErrors) {
    PhantomSpec s;
    s.heart.radii[0] = 30;
    EXPECT_THROW(generate_case(s), SpecError);
    s = {};
    s.lungs[1].center[2] = 19;
    EXPECT_THROW(s.validate(), SpecError);
    s = {};
    s.eat_attenuation_mean = -30;
    EXPECT_THROW(s.validate(), SpecError);
    s = {};
    s.fat_fraction_in_heart_shell = 1.5;
    EXPECT_THROW(s.validate(), SpecError);
}

TEST(Phantom, HeartAndLungDisjoint) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        PhantomSpec s;
        s.rng_seed = seed;
        s.lungs[0].radii[0] = 12;  // overlaps the heart ellipsoid
        s.lungs[0].center[0] = 12;
        const auto img = generate_case(s);
        for (std::size_t i = 0; i < img.heart.grid().size(); ++i) ASSERT_FALSE(img.heart.at(i) && img.lung.at(i));
    }
}

TEST(Phantom, NoFatGivesEmptyEat) {
    PhantomSpec s;
    s.fat_fraction_in_heart_shell = 0.0;
    const auto img = generate_case(s);
    EatParams p;
    p.filter_radius = 0;
    const auto r = extract_eat(img.volume, img.heart, p);
    EXPECT_EQ(r.voxel_count, 0u);
    EXPECT_TRUE(r.eat_mask.empty());
}

TEST(Phantom, Deterministic) {
    PhantomSpec s;
    s.rng_seed = 99;
    const auto a = generate_case(s), b = generate_case(s);
    EXPECT_EQ(encode_volume(a.volume), encode_volume(b.volume));
    EXPECT_EQ(a.heart, b.heart);
    EXPECT_EQ(a.lung, b.lung);
    s.rng_seed = 100;
    EXPECT_NE(generate_case(s).volume, a.volume);
}

TEST(Phantom, FatAttenuationStatistics) {
    auto s = large_spec();
    s.eat_attenuation_mean = -60;
    s.eat_attenuation_sd = 10;
    s.rng_seed = 1;
    const auto img = generate_case(s);
    EatParams p;
    p.filter_radius = 0;
    const auto r = extract_eat(img.volume, img.heart, p);
    ASSERT_GE(r.voxel_count, 10000u);
    EXPECT_NEAR(r.attenuation.mean, -60.0, 3.0);
    EXPECT_GE(r.attenuation.min, -189.0);
    EXPECT_LE(r.attenuation.max, -31.0);
}

TEST(Cohort, CountsLabelsAndSeeds) {
    const auto two = generate_cohort(1, 1, PhantomSpec{}, 0);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NE(two[0].spec.rng_seed, two[1].spec.rng_seed);

    const auto c = generate_cohort(50, 50, PhantomSpec{}, 42);
    ASSERT_EQ(c.size(), 100u);
    std::set<std::uint64_t> seeds;
    std::set<std::string> ids;
    for (std::size_t k = 0; k < c.size(); ++k) {
        EXPECT_EQ(c[k].label, k < 50 ? Severity::mild : Severity::severe);
        EXPECT_EQ(c[k].spec.label, c[k].label);
        seeds.insert(c[k].spec.rng_seed);
        ids.insert(c[k].case_id);
    }
    EXPECT_EQ(seeds.size(), 100u);
    EXPECT_EQ(ids.size(), 100u);
    EXPECT_EQ(c[7].case_id, "case0007");
    EXPECT_THROW(generate_cohort(1, 0, PhantomSpec{}, 0), SpecError);
}

TEST(Cohort, CaseParametersIndependentOfCohortSize) {
    const auto a = generate_cohort(3, 3, PhantomSpec{}, 5);
    const auto b = generate_cohort(3, 10, PhantomSpec{}, 5);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(a[k].spec.rng_seed, b[k].spec.rng_seed);
        EXPECT_EQ(a[k].spec.eat_attenuation_mean, b[k].spec.eat_attenuation_mean);
    }
}

TEST(Cohort, SevereEatIsCloserToMinusThirty) {
    const auto c = generate_cohort(50, 50, PhantomSpec{}, 11);
    double sum[2] = {0, 0};
    double n[2] = {0, 0};
    for (const auto& pc : c) {
        const auto img = generate_case(pc.spec);
        const auto r = extract_eat(img.volume, img.heart);
        const int k = static_cast<int>(pc.label);
        sum[k] += r.attenuation.mean;
        n[k] += 1;
    }
    EXPECT_GT(sum[1] / n[1], sum[0] / n[0]);
}

TEST(Severity, Parse) {
    EXPECT_EQ(parse_severity("severe"), Severity::severe);
    EXPECT_EQ(parse_severity("0"), Severity::mild);
    EXPECT_THROW(parse_severity("moderate"), SpecError);
    EXPECT_STREQ(to_string(Severity::severe), "severe");
}
