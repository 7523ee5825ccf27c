#include "lwoct/livewire.hpp"
#include "lwoct/phantom.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lwoct;

namespace {

CostMap random_cost(int w, int h, std::uint64_t seed, std::optional<BoundaryId> source = BoundaryId::ILM)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CostMap c{GrayImage(w, h), source, {}};
    for (auto& v : c.cost.pixels())
        v = u(rng);
    return c;
}

CostMap uniform_cost(int w, int h, double v = 1.0) { return CostMap{GrayImage(w, h, v), BoundaryId::ILM, {}}; }

std::vector<int> sine_ridge(int w, double center, double amp, double period)
{
    std::vector<int> r(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x)
        r[static_cast<std::size_t>(x)] =
            static_cast<int>(std::lround(center + amp * std::sin(2.0 * std::numbers::pi * x / period)));
    return r;
}

CostMap ridge_cost(int w, int h, const std::vector<int>& ridge)
{
    CostMap c = uniform_cost(w, h);
    for (int x = 0; x < w; ++x)
        c.cost(x, ridge[static_cast<std::size_t>(x)]) = 0.0;
    return c;
}

Anchor at(int x, double y) { return Anchor{x, y, 0.0}; }

} // namespace

TEST(LayerPath, MatchesExhaustiveEnumerationOn12x12)
{
    const auto c = random_cost(12, 12, 2024);
    for (auto [sy, ey] : {std::pair{3, 8}, {0, 11}, {6, 6}}) {
        const auto p = shortest_layer_path(c, at(0, sy), at(11, ey), 2);
        EXPECT_NEAR(p.total_cost, oracle::layer_brute_force(c.cost, {0, sy}, {11, ey}, 2), 1e-9);
    }
}

TEST(LayerPath, MatchesBellmanFordOnRandomMaps)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        std::uniform_int_distribution<int> dim(3, 20);
        const int w = dim(rng), h = dim(rng);
        const int d_max = 1 + trial % 3;
        const auto c = random_cost(w, h, 100 + trial);
        std::uniform_int_distribution<int> col(0, w - 1), row(0, h - 1);
        int x0 = col(rng), x1 = col(rng);
        if (x0 == x1)
            x1 = (x0 + 1) % w;
        if (x0 > x1)
            std::swap(x0, x1);
        const int y0 = row(rng);
        const int y1 = std::clamp(row(rng), y0 - d_max * (x1 - x0), y0 + d_max * (x1 - x0));
        const auto p = shortest_layer_path(c, at(x0, y0), at(x1, y1), d_max);
        EXPECT_NEAR(p.total_cost, oracle::layer_bellman_ford(c.cost, {x0, y0}, {x1, y1}, d_max, trial), 1e-9);
        EXPECT_NEAR(p.total_cost, oracle::path_cost(c.cost, p.nodes), 1e-9);
        ASSERT_EQ(p.nodes.size(), static_cast<std::size_t>(x1 - x0 + 1));
        for (std::size_t i = 1; i < p.nodes.size(); ++i) {
            EXPECT_EQ(p.nodes[i].x, p.nodes[i - 1].x + 1);
            EXPECT_LE(std::abs(p.nodes[i].y - p.nodes[i - 1].y), d_max);
        }
        EXPECT_EQ(p.nodes.front(), (Pixel{x0, y0}));
        EXPECT_EQ(p.nodes.back(), (Pixel{x1, y1}));
    }
}

TEST(LayerPath, UniformCostGivesStraightSegment)
{
    const auto p = shortest_layer_path(uniform_cost(30, 20), at(2, 7), at(25, 7), 3);
    for (const auto& n : p.nodes)
        EXPECT_EQ(n.y, 7);
    EXPECT_DOUBLE_EQ(p.total_cost, 23.0);
}

TEST(LayerPath, TieBreakPrefersSmallStepsThenSmallerRows)
{
    // Rise of 1 over 2 columns on a flat map: both placements of the step cost the same, and
    // the backtrack keeps the predecessor with the smaller |dy| at the last column.
    const auto p = shortest_layer_path(uniform_cost(3, 5), at(0, 2), at(2, 3), 2);
    ASSERT_EQ(p.nodes.size(), 3u);
    EXPECT_EQ(p.nodes[1].y, 3);
    // Fall of 2 over 2 columns with d_max 2: the unique cheapest route uses two unit steps.
    const auto q = shortest_layer_path(uniform_cost(3, 5), at(0, 3), at(2, 1), 2);
    EXPECT_EQ(q.nodes[1].y, 2);
}

TEST(LayerPath, RecoversZeroCostSineRidgeExactly)
{
    const int w = 200, h = 60;
    const auto ridge = sine_ridge(w, 30.0, 12.0, 90.0);
    for (int x = 1; x < w; ++x)
        ASSERT_LE(std::abs(ridge[x] - ridge[x - 1]), 3);
    const auto c = ridge_cost(w, h, ridge);
    const auto p = shortest_layer_path(c, at(0, ridge.front()), at(w - 1, ridge.back()), 3);
    EXPECT_EQ(p.total_cost, 0.0);
    for (const auto& n : p.nodes)
        EXPECT_EQ(n.y, ridge[static_cast<std::size_t>(n.x)]);
}

TEST(LayerPath, ScalingCostsScalesTotalAndKeepsPath)
{
    auto c = random_cost(20, 15, 5);
    const auto p = shortest_layer_path(c, at(0, 4), at(19, 10), 2);
    for (auto& v : c.cost.pixels())
        v *= 8.0;
    const auto q = shortest_layer_path(c, at(0, 4), at(19, 10), 2);
    EXPECT_EQ(p.nodes, q.nodes);
    EXPECT_NEAR(q.total_cost, 8.0 * p.total_cost, 1e-12);
}

TEST(LayerPath, Errors)
{
    const auto c = uniform_cost(10, 10);
    EXPECT_THROW(shortest_layer_path(c, at(3, 1), at(3, 1), 2), Error);
    EXPECT_THROW(shortest_layer_path(c, at(5, 1), at(3, 1), 2), Error);
    EXPECT_THROW(shortest_layer_path(c, at(0, 1), at(10, 1), 2), Error);
    try {
        shortest_layer_path(c, at(0, 0), at(2, 9), 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoPath);
    }
    EXPECT_NO_THROW(shortest_layer_path(c, at(0, 0), at(3, 9), 3));
}

TEST(FreePath, MatchesBellmanFordOnRandomMaps)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        std::uniform_int_distribution<int> dim(2, 15);
        const int w = dim(rng), h = dim(rng);
        const auto c = random_cost(w, h, 500 + trial, std::nullopt);
        std::uniform_int_distribution<int> col(0, w - 1), row(0, h - 1);
        Pixel s{col(rng), row(rng)}, e{col(rng), row(rng)};
        if (s == e)
            e.x = (e.x + 1) % w;
        const auto p = shortest_free_path(c, at(s.x, s.y), at(e.x, e.y));
        EXPECT_NEAR(p.total_cost, oracle::free_bellman_ford(c.cost, s, e, trial), 1e-9);
        EXPECT_NEAR(p.total_cost, oracle::path_cost(c.cost, p.nodes), 1e-9);
        for (std::size_t i = 1; i < p.nodes.size(); ++i) {
            EXPECT_LE(std::abs(p.nodes[i].x - p.nodes[i - 1].x), 1);
            EXPECT_LE(std::abs(p.nodes[i].y - p.nodes[i - 1].y), 1);
        }
    }
}

TEST(FreePath, StraightRowAndSingleEdge)
{
    const CostMap c{GrayImage(12, 6, 1.0), std::nullopt, {}};
    const auto p = shortest_free_path(c, at(1, 3), at(10, 3));
    for (const auto& n : p.nodes)
        EXPECT_EQ(n.y, 3);
    EXPECT_DOUBLE_EQ(p.total_cost, 9.0);

    auto r = random_cost(5, 5, 3, std::nullopt);
    const auto q = shortest_free_path(r, at(2, 2), at(3, 3));
    if (q.nodes.size() == 2) {
        EXPECT_DOUBLE_EQ(q.total_cost, 0.5 * (r(2, 2) + r(3, 3)) * std::sqrt(2.0));
    }
    EXPECT_LE(q.total_cost, 0.5 * (r(2, 2) + r(3, 3)) * std::sqrt(2.0));
    EXPECT_THROW(shortest_free_path(r, at(2, 2), at(2, 2)), Error);
}

TEST(Assemble, PassesThroughAnchorsAndSpansFullWidth)
{
    const auto c = random_cost(60, 30, 17);
    const std::vector<Anchor> anchors{at(40, 20), at(5, 10), at(22, 14)};
    const auto b = assemble_boundary(c, anchors, 3);
    ASSERT_EQ(b.y.size(), 60u);
    EXPECT_EQ(b.y[5], 10);
    EXPECT_EQ(b.y[22], 14);
    EXPECT_EQ(b.y[40], 20);
    for (std::size_t x = 1; x < b.y.size(); ++x)
        EXPECT_LE(std::abs(b.y[x] - b.y[x - 1]), 3);
    EXPECT_EQ(b.click_count, 3);
    EXPECT_EQ(b.anchors.front().x, 5);
    EXPECT_EQ(b.mode, BoundaryMode::Livewire);
}

TEST(Assemble, BorderExtensionIsOptimalOverAllStartRows)
{
    const auto c = random_cost(25, 12, 31);
    const auto b = assemble_boundary(c, {at(12, 6)}, 2);
    // Cheapest path from any row of column 0 to the anchor, and from the anchor to any row of the last column.
    double best_left = oracle::kInf, best_right = oracle::kInf;
    for (int y = 0; y < 12; ++y) {
        if (std::abs(y - 6) <= 2 * 12) {
            best_left = std::min(best_left, oracle::layer_bellman_ford(c.cost, {0, y}, {12, 6}, 2));
            best_right = std::min(best_right, oracle::layer_bellman_ford(c.cost, {12, 6}, {24, y}, 2));
        }
    }
    std::vector<Pixel> left, right;
    for (int x = 0; x <= 12; ++x)
        left.push_back({x, static_cast<int>(b.y[static_cast<std::size_t>(x)])});
    for (int x = 12; x < 25; ++x)
        right.push_back({x, static_cast<int>(b.y[static_cast<std::size_t>(x)])});
    EXPECT_NEAR(oracle::path_cost(c.cost, left), best_left, 1e-9);
    EXPECT_NEAR(oracle::path_cost(c.cost, right), best_right, 1e-9);
}

TEST(Assemble, RidgeAnchorsEvery50ColumnsReproduceRidge)
{
    const int w = 301, h = 80;
    const auto ridge = sine_ridge(w, 40.0, 15.0, 140.0);
    const auto c = ridge_cost(w, h, ridge);
    std::vector<Anchor> anchors;
    for (int x = 0; x < w; x += 50)
        anchors.push_back(at(x, ridge[static_cast<std::size_t>(x)]));
    const auto b = assemble_boundary(c, anchors, 3);
    for (int x = 0; x < w; ++x)
        EXPECT_EQ(b.y[static_cast<std::size_t>(x)], ridge[static_cast<std::size_t>(x)]);
}

TEST(Assemble, TwoAnchorsOnUniformCostGiveConstantBoundary)
{
    const auto b = assemble_boundary(uniform_cost(40, 20), {at(10, 9), at(30, 9)}, 3);
    for (double y : b.y)
        EXPECT_EQ(y, 9.0);
}

TEST(Assemble, SingleAnchorOnPhantomIlm)
{
    const auto ph = generate(macular_phantom_spec(512, 496, 3));
    const auto& truth = ph.truth.boundaries.at(BoundaryId::ILM);
    const auto cost = build_feature_map(ph.bscan, BoundaryId::ILM, PipelineConfig::defaults());
    const auto b = assemble_boundary(cost, {at(256, truth[256])}, 3);
    double err = 0.0;
    for (int x = 0; x < 512; ++x)
        err += std::abs(b.y[static_cast<std::size_t>(x)] - truth[static_cast<std::size_t>(x)]);
    EXPECT_LE(err / 512, 2.0);
}

TEST(Assemble, Errors)
{
    const auto c = uniform_cost(10, 10);
    EXPECT_THROW(assemble_boundary(c, {}, 3), Error);
    try {
        assemble_boundary(c, {at(3, 1), at(3, 5)}, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateAnchorColumn);
    }
    try {
        assemble_boundary(c, {at(3, 1), at(4, 9)}, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoPath);
    }
}

TEST(Splice, LeavesOutsideColumnsBitIdentical)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto c = random_cost(50, 25, 900 + trial);
        const auto base = assemble_boundary(c, {at(10, 12), at(40, 12)}, 3);
        std::uniform_int_distribution<int> col(0, 49), row(0, 24);
        int ax = col(rng), bx = col(rng);
        if (ax == bx)
            continue;
        if (ax > bx)
            std::swap(ax, bx);
        const int ay = row(rng);
        const int by = std::clamp(row(rng), ay - 3 * (bx - ax), ay + 3 * (bx - ax));
        const auto out = splice_correction(base, c, at(ax, ay), at(bx, by), 3);
        for (int x = 0; x < 50; ++x) {
            if (x < ax || x > bx) {
                EXPECT_EQ(std::bit_cast<std::uint64_t>(out.y[x]), std::bit_cast<std::uint64_t>(base.y[x]));
            }
        }
        EXPECT_EQ(out.y[ax], ay);
        EXPECT_EQ(out.y[bx], by);
        EXPECT_EQ(out.mode, BoundaryMode::Corrected);
        EXPECT_EQ(out.click_count, base.click_count + 2);
    }
}

TEST(Splice, FixedPointOnRidge)
{
    const int w = 120, h = 50;
    const auto ridge = sine_ridge(w, 25.0, 10.0, 70.0);
    const auto c = ridge_cost(w, h, ridge);
    const auto b = assemble_boundary(c, {at(0, ridge[0]), at(w - 1, ridge[w - 1])}, 3);
    const auto s = splice_correction(b, c, at(30, b.y[30]), at(80, b.y[80]), 3);
    EXPECT_EQ(s.y, b.y);
}

TEST(Splice, Errors)
{
    const auto c = uniform_cost(20, 10);
    const auto b = assemble_boundary(c, {at(5, 5)}, 3);
    EXPECT_THROW(splice_correction(b, c, at(8, 5), at(4, 5), 3), Error);
    try {
        splice_correction(b, c, at(8, 0), at(9, 9), 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoPath);
    }
}

TEST(Contour, TinyTriangleIsAValidLoop)
{
    const CostMap c{GrayImage(8, 8, 1.0), std::nullopt, {}};
    const auto loop = close_contour(c, std::vector<Anchor>{at(3, 3), at(4, 3), at(3, 4)});
    EXPECT_EQ(loop.size(), 3u);
    EXPECT_NE(polygon_area2(loop), 0);
}

TEST(Contour, CollinearAnchorsAreDegenerate)
{
    const CostMap c{GrayImage(10, 10, 1.0), std::nullopt, {}};
    try {
        close_contour(c, std::vector<Anchor>{at(1, 5), at(4, 5), at(8, 5)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateLoop);
    }
    EXPECT_THROW(close_contour(c, std::vector<Anchor>{at(1, 5), at(4, 5)}), Error);
}

TEST(Contour, RotatingAnchorsRotatesTheLoop)
{
    const auto c = random_cost(30, 30, 77, std::nullopt);
    std::vector<Anchor> anchors{at(5, 5), at(24, 7), at(20, 25), at(6, 21)};
    const auto loop = close_contour(c, anchors);
    for (int r = 1; r < 4; ++r) {
        std::rotate(anchors.begin(), anchors.begin() + 1, anchors.end());
        const auto other = close_contour(c, anchors);
        ASSERT_EQ(other.size(), loop.size());
        const auto it = std::find(loop.begin(), loop.end(), other.front());
        ASSERT_NE(it, loop.end());
        std::vector<Pixel> rotated(loop.begin(), loop.end());
        std::rotate(rotated.begin(), rotated.begin() + (it - loop.begin()), rotated.end());
        EXPECT_EQ(rotated, other);
    }
}

TEST(Contour, LoopIsClosedAndConnected)
{
    const auto c = random_cost(25, 25, 8, std::nullopt);
    const auto loop = close_contour(c, std::vector<Anchor>{at(3, 3), at(20, 4), at(12, 21)});
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const auto& p = loop[i];
        const auto& q = loop[(i + 1) % loop.size()];
        EXPECT_LE(std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)), 1);
    }
}

TEST(Contour, PhantomBlobPerimeterWithinTwoPixels)
{
    PhantomSpec spec;
    spec.width = spec.height = 200;
    spec.layers = {{std::nullopt, std::vector<double>(200, 40.0), 0.1, 0.7}};
    spec.blobs.push_back({100.0, 120.0, 30.0, 18.0, 0.05});
    spec.rng_seed = 5;
    const auto ph = generate(spec);
    const auto cost = fluid_feature_map(ph.bscan, PipelineConfig::defaults());
    const std::vector<Anchor> anchors{at(70, 120), at(100, 102), at(130, 120), at(100, 138)};
    const auto loop = close_contour(cost, anchors);
    // Hausdorff distance between the loop and the ellipse outline, the outline sampled densely.
    auto dist_to_ellipse = [](double x, double y) {
        double best = 1e9;
        for (int k = 0; k < 3600; ++k) {
            const double t = 2.0 * std::numbers::pi * k / 3600.0;
            best = std::min(best, std::hypot(x - (100.0 + 30.0 * std::cos(t)), y - (120.0 + 18.0 * std::sin(t))));
        }
        return best;
    };
    double worst = 0.0;
    for (const auto& p : loop)
        worst = std::max(worst, dist_to_ellipse(p.x, p.y));
    for (int k = 0; k < 360; ++k) {
        const double t = 2.0 * std::numbers::pi * k / 360.0;
        const double ex = 100.0 + 30.0 * std::cos(t), ey = 120.0 + 18.0 * std::sin(t);
        double best = 1e9;
        for (const auto& p : loop)
            best = std::min(best, std::hypot(p.x - ex, p.y - ey));
        worst = std::max(worst, best);
    }
    EXPECT_LE(worst, 2.0);
}

TEST(Raster, MatchesIntegerCrossingOracle)
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> n(3, 9), coord(0, 19);
        std::vector<Pixel> loop(static_cast<std::size_t>(n(rng)));
        for (auto& p : loop)
            p = {coord(rng), coord(rng)};
        EXPECT_EQ(rasterize_loop(loop, 20, 20), oracle::rasterize(loop, 20, 20)) << "trial " << trial;
    }
}

TEST(Raster, AxisAlignedSquareAreaAndShoelace)
{
    std::vector<Pixel> square;
    for (int x = 2; x < 7; ++x)
        square.push_back({x, 2});
    for (int y = 2; y < 7; ++y)
        square.push_back({7, y});
    for (int x = 7; x > 2; --x)
        square.push_back({x, 7});
    for (int y = 7; y > 2; --y)
        square.push_back({2, y});
    EXPECT_EQ(std::abs(polygon_area2(square)), 50);
    const auto m = rasterize_loop(square, 10, 10);
    EXPECT_EQ(count_set(m), 36u);
}
