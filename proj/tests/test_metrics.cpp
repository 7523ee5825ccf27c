#include "lwoct/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lwoct;

namespace {

BinaryImage mask_from_indices(int w, int h, std::initializer_list<std::pair<int, int>> ranges)
{
    BinaryImage m(w, h, 0);
    for (auto [lo, hi] : ranges)
        for (int i = lo; i < hi; ++i)
            m.pixels()[static_cast<std::size_t>(i)] = 1;
    return m;
}

SegmentationRecord record(std::string vol, int idx, BoundaryId id, std::vector<double> y, double secs = 0.0,
                          int clicks = 0)
{
    SegmentationRecord r;
    r.volume_id = std::move(vol);
    r.bscan_index = idx;
    Boundary b;
    b.id = id;
    b.y = std::move(y);
    b.elapsed_seconds = secs;
    b.click_count = clicks;
    r.boundaries[id] = b;
    r.session_stats[id] = {secs, clicks};
    return r;
}

} // namespace

TEST(UnsignedError, HandValues)
{
    const std::vector<double> x{0, 1, 2, 3}, y{1, 1, 1, 1};
    EXPECT_DOUBLE_EQ(unsigned_error(x, y), 1.0);
    std::vector<double> z(x);
    for (auto& v : z)
        v += 2.0;
    EXPECT_DOUBLE_EQ(unsigned_error(z, x), 2.0);
    EXPECT_EQ(unsigned_error(x, x), 0.0);
    EXPECT_THROW(unsigned_error(x, std::vector<double>{1, 2}), Error);
}

TEST(UnsignedError, MetricAxioms)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(64), b(64), c(64);
        for (std::size_t i = 0; i < 64; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            c[i] = u(rng);
        }
        const double ab = unsigned_error(a, b), ba = unsigned_error(b, a);
        EXPECT_GE(ab, 0.0);
        EXPECT_EQ(ab, ba);
        EXPECT_LE(ab, unsigned_error(a, c) + unsigned_error(c, b) + 1e-12);
        EXPECT_GT(ab, 0.0);
    }
}

TEST(Dice, HandValues)
{
    const auto x = mask_from_indices(20, 10, {{0, 100}});
    const auto y = mask_from_indices(20, 10, {{50, 150}});
    EXPECT_DOUBLE_EQ(dice(x, y), 0.5);
    EXPECT_DOUBLE_EQ(dice(x, x), 1.0);
    EXPECT_DOUBLE_EQ(dice(x, mask_from_indices(20, 10, {{100, 200}})), 0.0);
    try {
        dice(BinaryImage(3, 3, 0), BinaryImage(3, 3, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BothEmpty);
    }
    EXPECT_THROW(dice(x, BinaryImage(10, 20, 0)), Error);
}

TEST(Irregularity, HandValues)
{
    const std::vector<Point2> line{{0, 0}, {1, 2}, {3, 6}, {10, 20}};
    EXPECT_NEAR(irregularity_index(line), 1.0, 1e-12);
    const std::vector<Point2> elbow{{0, 0}, {1, 0}, {1, 1}};
    EXPECT_NEAR(irregularity_index(elbow), std::sqrt(2.0) / 2.0, 1e-12);
    std::vector<Point2> half;
    for (int k = 0; k <= 2000; ++k) {
        const double t = std::numbers::pi * k / 2000.0;
        half.push_back({5.0 * std::cos(t), 5.0 * std::sin(t)});
    }
    EXPECT_NEAR(irregularity_index(half), 2.0 / std::numbers::pi, 0.001);
    const std::vector<Point2> loop{{0, 0}, {1, 0}, {1, 1}, {0, 0}};
    EXPECT_EQ(irregularity_index(loop), 0.0);
    EXPECT_THROW(irregularity_index(std::vector<Point2>{{1, 1}}), Error);
}

TEST(Irregularity, RigidMotionAndScaleInvariance)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<Point2> pts;
    for (int i = 0; i < 30; ++i)
        pts.push_back({i + 0.3 * u(rng), u(rng)});
    const double base = irregularity_index(pts);
    const double th = 0.7, s = 3.25;
    std::vector<Point2> moved;
    for (const auto& p : pts)
        moved.push_back({s * (std::cos(th) * p.x - std::sin(th) * p.y) + 4.0, s * (std::sin(th) * p.x + std::cos(th) * p.y) - 9.0});
    EXPECT_NEAR(irregularity_index(moved), base, 1e-9);
}

TEST(Irregularity, BoundaryOverload)
{
    Boundary b;
    b.y = {5, 5, 5, 6, 7};
    EXPECT_NEAR(irregularity_index(b, 0, 2), 1.0, 1e-12);
    EXPECT_NEAR(irregularity_index(b), std::hypot(4.0, 2.0) / (2.0 + 2.0 * std::sqrt(2.0)), 1e-12);
    EXPECT_THROW(irregularity_index(b, 3, 3), Error);
}

TEST(BlandAltman, HandTwoPointCase)
{
    const std::vector<double> a{1.0, -1.0}, b{0.0, 0.0};
    const auto s = bland_altman(a, b);
    EXPECT_EQ(s.n, 2);
    EXPECT_EQ(s.mean_diff, 0.0);
    EXPECT_DOUBLE_EQ(s.sd_diff, std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(s.loa_low, -1.96 * std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(s.loa_high, 1.96 * std::sqrt(2.0));
    EXPECT_EQ(s.pct_within, 100.0);
}

TEST(BlandAltman, IdenticalAndGaussian)
{
    const std::vector<double> a{1, 2, 3};
    const auto same = bland_altman(a, a);
    EXPECT_EQ(same.mean_diff, 0.0);
    EXPECT_EQ(same.sd_diff, 0.0);
    EXPECT_EQ(same.pct_within, 100.0);

    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(10000), zero(10000, 0.0);
    for (auto& v : x)
        v = g(rng);
    const auto s = bland_altman(x, zero);
    EXPECT_GE(s.pct_within, 93.0);
    EXPECT_LE(s.pct_within, 97.0);
    EXPECT_THROW(bland_altman(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
    EXPECT_THROW(bland_altman(x, a), Error);
}

TEST(Effort, Means)
{
    const std::vector<SegmentationRecord> one{record("v", 0, BoundaryId::ILM, {1, 2}, 5.0, 4)};
    const auto s1 = summarize_effort(one);
    ASSERT_EQ(s1.size(), 1u);
    EXPECT_DOUBLE_EQ(s1[0].mean_seconds, 5.0);
    EXPECT_DOUBLE_EQ(s1[0].mean_clicks, 4.0);
    const std::vector<SegmentationRecord> two{record("v", 0, BoundaryId::ILM, {1, 2}, 4.0, 4),
                                              record("v", 1, BoundaryId::ILM, {1, 2}, 6.0, 5)};
    const auto s2 = summarize_effort(two);
    EXPECT_DOUBLE_EQ(s2[0].mean_seconds, 5.0);
    EXPECT_DOUBLE_EQ(s2[0].mean_clicks, 4.5);
    EXPECT_THROW(summarize_effort(std::vector<SegmentationRecord>{}), Error);
}

TEST(GoldStandard, PerColumnMean)
{
    const std::vector<std::vector<double>> graders{{1, 2, 3}, {3, 2, 1}, {2, 5, 2}};
    EXPECT_EQ(gold_standard(graders), (std::vector<double>{2, 3, 2}));
    const std::vector<std::vector<SegmentationRecord>> sets{{record("v", 0, BoundaryId::ILM, {0, 4})},
                                                            {record("v", 0, BoundaryId::ILM, {2, 6})}};
    const auto gold = gold_standard_records(sets);
    ASSERT_EQ(gold.size(), 1u);
    EXPECT_EQ(gold[0].boundaries.at(BoundaryId::ILM).y, (std::vector<double>{1, 5}));
    const std::vector<std::vector<SegmentationRecord>> bad{{record("v", 0, BoundaryId::ILM, {0, 4})},
                                                           {record("v", 1, BoundaryId::ILM, {2, 6})}};
    EXPECT_THROW(gold_standard_records(bad), Error);
}

TEST(Evaluate, SelfComparisonAndOffset)
{
    std::vector<double> y(50);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = 20.0 + std::sin(i * 0.2);
    auto a = record("v", 0, BoundaryId::ILM, y);
    FluidRegion f;
    f.mask = mask_from_indices(50, 30, {{100, 160}});
    f.area_px = 60;
    a.fluids.push_back(f);
    const std::vector<SegmentationRecord> as{a};
    const auto self = evaluate(as, as);
    ASSERT_EQ(self.boundaries.size(), 1u);
    EXPECT_EQ(self.boundaries[0].mean_unsigned_error, 0.0);
    ASSERT_EQ(self.dice.size(), 1u);
    EXPECT_EQ(self.dice[0].dice, 1.0);

    auto b = a;
    for (auto& v : b.boundaries[BoundaryId::ILM].y)
        v += 2.0;
    const std::vector<SegmentationRecord> bs{b};
    const auto off = evaluate(as, bs);
    EXPECT_DOUBLE_EQ(off.boundaries[0].mean_unsigned_error, 2.0);
    EXPECT_NEAR(off.boundaries[0].bland_altman.mean_diff, -2.0, 1e-12);
    EXPECT_EQ(off.boundaries[0].ba_points.size(), 50u);

    const std::vector<SegmentationRecord> other{record("w", 0, BoundaryId::ILM, y)};
    EXPECT_THROW(evaluate(as, other), Error);
}

TEST(Evaluate, NoFluidGivesEmptyDice)
{
    const std::vector<SegmentationRecord> as{record("v", 0, BoundaryId::ILM, {1, 2, 3})};
    const auto r = evaluate(as, as);
    EXPECT_FALSE(r.dice[0].dice.has_value());
}
