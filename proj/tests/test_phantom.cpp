#include "lwoct/phantom.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace lwoct;

TEST(Phantom, NoiselessTwoBandImage)
{
    PhantomSpec s;
    s.width = 30;
    s.height = 100;
    s.layers = {{BoundaryId::ILM, std::vector<double>(30, 50.0), 0.2, 0.8}};
    s.speckle_sigma = 0.0;
    const auto p = generate(s);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 30; ++x)
            EXPECT_EQ(p.bscan.pixels(x, y), y < 50 ? 0.2 : 0.8);
    EXPECT_EQ(p.truth.boundaries.at(BoundaryId::ILM), std::vector<double>(30, 50.0));
}

TEST(Phantom, SeedDeterminism)
{
    const auto a = generate(macular_phantom_spec(128, 96, 42));
    const auto b = generate(macular_phantom_spec(128, 96, 42));
    const auto c = generate(macular_phantom_spec(128, 96, 43));
    EXPECT_EQ(a.bscan.pixels, b.bscan.pixels);
    EXPECT_NE(a.bscan.pixels, c.bscan.pixels);
    for (double v : a.bscan.pixels.pixels()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Phantom, EllipseAreaWithinTwoPercent)
{
    PhantomSpec s;
    s.width = 200;
    s.height = 150;
    s.speckle_sigma = 0.0;
    s.blobs = {{100.3, 70.6, 40.0, 22.0, 0.0}, {30.0, 30.0, 9.0, 12.5, 0.0}};
    const auto p = generate(s);
    ASSERT_EQ(p.truth.fluid_masks.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const double want = std::numbers::pi * s.blobs[i].ax * s.blobs[i].ay;
        EXPECT_NEAR(static_cast<double>(count_set(p.truth.fluid_masks[i])), want, 0.02 * want);
    }
}

TEST(Phantom, NoiselessStepDetectionRecoversTruth)
{
    auto s = macular_phantom_spec(256, 200, 5, 0.0);
    const auto p = generate(s);
    for (const auto& layer : s.layers) {
        for (int x = 0; x < 256; ++x) {
            // first row at or below the interface
            const double c = layer.curve[static_cast<std::size_t>(x)];
            const int row = static_cast<int>(std::ceil(c));
            EXPECT_EQ(p.bscan.pixels(x, row), layer.intensity_below);
            EXPECT_NE(p.bscan.pixels(x, row - 1), layer.intensity_below);
        }
    }
}

TEST(Phantom, ShadowRunsAttenuateAndAreRecorded)
{
    auto s = peripapillary_phantom_spec(512, 496, 3, 0.0);
    ASSERT_EQ(s.shadow_runs.size(), 3u);
    const auto p = generate(s);
    for (const auto& r : s.shadow_runs) {
        EXPECT_GE(r.x1 - r.x0 + 1, 4);
        for (int x = r.x0; x <= r.x1; ++x)
            EXPECT_TRUE(p.truth.shadow_columns.contains(x));
        EXPECT_NE(r.x0 % 100, 0);
    }
    s.shadow_runs.clear();
    const auto clean = generate(s);
    const int x = *p.truth.shadow_columns.begin();
    for (int y = 0; y < 496; ++y)
        EXPECT_DOUBLE_EQ(p.bscan.pixels(x, y), 0.3 * clean.bscan.pixels(x, y));
}

TEST(Phantom, InvalidSpecsRejected)
{
    PhantomSpec s;
    s.width = 10;
    s.height = 10;
    s.layers = {{BoundaryId::ILM, std::vector<double>(9, 5.0), 0.1, 0.5}};
    EXPECT_THROW(generate(s), Error);
    s.layers = {{BoundaryId::ILM, std::vector<double>(10, 12.0), 0.1, 0.5}};
    EXPECT_THROW(generate(s), Error);
    s.layers.clear();
    s.blobs = {{5, 5, 0.0, 2.0, 0.1}};
    EXPECT_THROW(generate(s), Error);
    s.blobs.clear();
    s.speckle_sigma = -1;
    EXPECT_THROW(generate(s), Error);
}

TEST(Phantom, SpecFromJson)
{
    const auto j = nlohmann::json::parse(R"({
        "width": 64, "height": 48, "speckle_sigma": 0, "rng_seed": 3,
        "layers": [{"id": "ILM", "curve": {"offset": 10, "sines": [{"amplitude": 2, "period_px": 32}]},
                    "intensity_above": 0.1, "intensity_below": 0.7},
                   {"id": null, "curve": {"offset": 30}, "intensity_above": 0.7, "intensity_below": 0.3}],
        "blobs": [{"center": [32, 20], "axes": [5, 3], "intensity": 0.0}],
        "shadow_runs": [{"columns": [40, 44], "factor": 0.5}]
    })");
    const auto s = phantom_spec_from_json(j);
    EXPECT_EQ(s.width, 64);
    ASSERT_EQ(s.layers.size(), 2u);
    EXPECT_EQ(s.layers[0].id, BoundaryId::ILM);
    EXPECT_FALSE(s.layers[1].id.has_value());
    EXPECT_NEAR(s.layers[0].curve[8], 12.0, 1e-12);
    EXPECT_EQ(s.shadow_runs[0].x1, 44);
    const auto p = generate(s);
    EXPECT_EQ(p.truth.boundaries.size(), 1u);
    EXPECT_EQ(to_json(p.truth)["shadow_columns"].size(), 5u);
    EXPECT_THROW(phantom_spec_from_json(nlohmann::json::parse(R"({"width": 10})")), Error);
}
