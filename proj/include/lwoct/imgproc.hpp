#pragma once

#include "lwoct/config.hpp"
#include "lwoct/error.hpp"
#include "lwoct/image.hpp"
#include "lwoct/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace lwoct {

namespace detail {

inline int clamp_index(int i, int n) noexcept { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

} // namespace detail

/// Normalized 1-D Gaussian with radius ceil(3 sigma). sigma must be > 0.
inline std::vector<double> gaussian_kernel(double sigma)
{
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k)
        v /= sum;
    return k;
}

/// Convolve along x (horizontal), replicating border pixels.
inline GrayImage convolve_rows(const GrayImage& img, const std::vector<double>& kernel)
{
    const int w = img.width(), h = img.height();
    const int r = static_cast<int>(kernel.size() / 2);
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += kernel[static_cast<std::size_t>(i + r)] * img(detail::clamp_index(x + i, w), y);
            out(x, y) = acc;
        }
    return out;
}

/// Convolve along y (vertical), replicating border pixels.
inline GrayImage convolve_cols(const GrayImage& img, const std::vector<double>& kernel)
{
    const int w = img.width(), h = img.height();
    const int r = static_cast<int>(kernel.size() / 2);
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += kernel[static_cast<std::size_t>(i + r)] * img(x, detail::clamp_index(y + i, h));
            out(x, y) = acc;
        }
    return out;
}

/// Separable Gaussian smoothing. sigma == 0 returns the input unchanged.
inline GrayImage gaussian_blur(const GrayImage& img, double sigma_px)
{
    if (sigma_px < 0.0 || std::isnan(sigma_px))
        throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be >= 0");
    if (sigma_px == 0.0 || img.empty())
        return img;
    const auto k = gaussian_kernel(sigma_px);
    return convolve_cols(convolve_rows(img, k), k);
}

/// Min-max rescale to [0,1]; a constant image maps to all zeros.
inline GrayImage normalize(const GrayImage& img)
{
    if (img.empty())
        return img;
    auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    const double mn = *lo, range = *hi - *lo;
    GrayImage out(img.width(), img.height());
    auto dst = out.pixels();
    auto src = img.pixels();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = range > 0.0 ? (src[i] - mn) / range : 0.0;
    return out;
}

/// Raw 3x3 vertical Sobel response (positive where intensity increases downward).
/// Written as a sum of row differences so that sobel(1 - img) == -sobel(img) whenever 1 - img is exact.
inline GrayImage sobel_y(const GrayImage& img)
{
    const int w = img.width(), h = img.height();
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int up = detail::clamp_index(y - 1, h), dn = detail::clamp_index(y + 1, h);
        for (int x = 0; x < w; ++x) {
            const int l = detail::clamp_index(x - 1, w), r = detail::clamp_index(x + 1, w);
            out(x, y) = (img(l, dn) - img(l, up)) + 2.0 * (img(x, dn) - img(x, up)) + (img(r, dn) - img(r, up));
        }
    }
    return out;
}

inline GrayImage sobel_x(const GrayImage& img)
{
    const int w = img.width(), h = img.height();
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int up = detail::clamp_index(y - 1, h), dn = detail::clamp_index(y + 1, h);
        for (int x = 0; x < w; ++x) {
            const int l = detail::clamp_index(x - 1, w), r = detail::clamp_index(x + 1, w);
            out(x, y) = (img(r, up) - img(l, up)) + 2.0 * (img(r, y) - img(l, y)) + (img(r, dn) - img(l, dn));
        }
    }
    return out;
}

/// Polarity-selective vertical edge strength rescaled to [0,1].
inline GrayImage gradient_vertical(const GrayImage& img, Polarity polarity)
{
    if (img.height() < 3)
        throw Error(ErrorCode::InvalidArgument, "gradient_vertical needs at least 3 rows");
    GrayImage g = sobel_y(img);
    double mx = 0.0;
    for (auto& v : g.pixels()) {
        v = polarity == Polarity::DarkToBright ? std::max(v, 0.0) : std::max(-v, 0.0);
        mx = std::max(mx, v);
    }
    if (mx > 0.0)
        for (auto& v : g.pixels())
            v /= mx;
    return g;
}

/// Classic Canny detector. Thresholds are fractions of the maximum gradient magnitude.
inline BinaryImage canny(const GrayImage& img, double low, double high, double sigma_px = 1.0)
{
    if (!(low >= 0.0 && low < high && high <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "canny thresholds need 0 <= low < high <= 1");
    const int w = img.width(), h = img.height();
    BinaryImage edges(w, h, 0);
    if (img.empty())
        return edges;

    const GrayImage smooth = gaussian_blur(img, sigma_px);
    const GrayImage gx = sobel_x(smooth), gy = sobel_y(smooth);
    GrayImage mag(w, h);
    double mx = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            mag(x, y) = std::hypot(gx(x, y), gy(x, y));
            mx = std::max(mx, mag(x, y));
        }
    if (mx <= 0.0)
        return edges;

    // Non-maximum suppression along the quantized gradient direction. The asymmetric
    // comparison (> on one side, >= on the other) keeps a single pixel on symmetric ridges.
    const double tan22 = std::tan(std::numbers::pi / 8.0);
    auto at = [&](int x, int y) { return mag.contains(x, y) ? mag(x, y) : 0.0; };
    GrayImage thin(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double m = mag(x, y);
            if (m <= 0.0)
                continue;
            const double ax = std::abs(gx(x, y)), ay = std::abs(gy(x, y));
            int dx, dy;
            if (ay <= ax * tan22) {
                dx = 1, dy = 0;
            } else if (ax <= ay * tan22) {
                dx = 0, dy = 1;
            } else if ((gx(x, y) > 0) == (gy(x, y) > 0)) {
                dx = 1, dy = 1;
            } else {
                dx = 1, dy = -1;
            }
            if (m > at(x - dx, y - dy) && m >= at(x + dx, y + dy))
                thin(x, y) = m / mx;
        }

    // Hysteresis: keep weak pixels 8-connected to a strong one.
    std::vector<Pixel> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (thin(x, y) >= high && thin(x, y) > 0.0) {
                edges(x, y) = 1;
                stack.push_back({x, y});
            }
    while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = p.x + dx, ny = p.y + dy;
                if (!edges.contains(nx, ny) || edges(nx, ny))
                    continue;
                const double v = thin(nx, ny);
                if (v > 0.0 && v >= low) {
                    edges(nx, ny) = 1;
                    stack.push_back({nx, ny});
                }
            }
    }
    return edges;
}

enum class MorphOp { Dilate, Erode, Open, Close };

namespace detail {

// Offsets of a rectangle of length n around its anchor (n - 1) / 2: [-a, n - 1 - a].
inline std::pair<int, int> se_span(int n) noexcept
{
    const int a = (n - 1) / 2;
    return {-a, n - 1 - a};
}

// Separable passes. Outside the image counts as background for dilation and foreground for
// erosion, which keeps the two adjoint so closing stays extensive up to the border.
inline BinaryImage dilate_pass(const BinaryImage& in, int n, bool horizontal)
{
    const auto [lo, hi] = se_span(n);
    const int w = in.width(), h = in.height();
    BinaryImage out(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = 0;
            for (int b = lo; b <= hi && !v; ++b) {
                const int sx = horizontal ? x - b : x, sy = horizontal ? y : y - b;
                if (in.contains(sx, sy) && in(sx, sy))
                    v = 1;
            }
            out(x, y) = v;
        }
    return out;
}

inline BinaryImage erode_pass(const BinaryImage& in, int n, bool horizontal)
{
    const auto [lo, hi] = se_span(n);
    const int w = in.width(), h = in.height();
    BinaryImage out(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = 1;
            for (int b = lo; b <= hi && v; ++b) {
                const int sx = horizontal ? x + b : x, sy = horizontal ? y : y + b;
                if (in.contains(sx, sy) && !in(sx, sy))
                    v = 0;
            }
            out(x, y) = v;
        }
    return out;
}

inline BinaryImage dilate(const BinaryImage& in, StructuringElement se)
{
    return dilate_pass(dilate_pass(in, se.width, true), se.height, false);
}

inline BinaryImage erode(const BinaryImage& in, StructuringElement se)
{
    return erode_pass(erode_pass(in, se.width, true), se.height, false);
}

} // namespace detail

/// Binary morphology with a rectangular structuring element anchored at ((w-1)/2, (h-1)/2).
inline BinaryImage morph(const BinaryImage& img, MorphOp op, StructuringElement se)
{
    if (se.width < 1 || se.height < 1)
        throw Error(ErrorCode::InvalidArgument, "structuring element dims must be >= 1");
    switch (op) {
    case MorphOp::Dilate: return detail::dilate(img, se);
    case MorphOp::Erode: return detail::erode(img, se);
    case MorphOp::Open: return detail::dilate(detail::erode(img, se), se);
    case MorphOp::Close: return detail::erode(detail::dilate(img, se), se);
    }
    return img;
}

/// Per-pixel traversal cost. source == nullopt marks a fluid map.
struct CostMap {
    GrayImage cost;
    std::optional<BoundaryId> source;
    std::string config_hash;

    int width() const noexcept { return cost.width(); }
    int height() const noexcept { return cost.height(); }
    double operator()(int x, int y) const noexcept { return cost(x, y); }

    friend bool operator==(const CostMap&, const CostMap&) = default;
};

namespace detail {

// Shift so the minimum is exactly 0 unless the map is uniform.
inline void zero_minimum(GrayImage& c)
{
    if (c.empty())
        return;
    auto [lo, hi] = std::minmax_element(c.pixels().begin(), c.pixels().end());
    const double mn = *lo;
    if (*hi > mn)
        for (auto& v : c.pixels())
            v -= mn;
}

} // namespace detail

/// Cost map for one layer boundary:
/// normalize -> blur -> polarity gradient F -> c = 1 - F / max F -> band penalty -> min shifted to 0.
inline CostMap build_feature_map(const BScan& bscan, BoundaryId boundary, const PipelineConfig& config)
{
    const LayerPipeline& p = config.layer(boundary);
    const int h = bscan.height();
    if (p.search_band) {
        const auto& b = *p.search_band;
        if (b.row_min < 0 || b.row_max >= h || b.row_min > b.row_max)
            throw Error(ErrorCode::InvalidBand, "search band [" + std::to_string(b.row_min) + ", " +
                                                    std::to_string(b.row_max) + "] outside image rows");
    }
    const GrayImage feature = gradient_vertical(gaussian_blur(normalize(bscan.pixels), p.gaussian_sigma_px), p.polarity);
    // gradient_vertical already scales to max 1 (or all zeros).
    double mx = 0.0;
    for (double v : feature.pixels())
        mx = std::max(mx, v);

    CostMap out{GrayImage(bscan.width(), h, 1.0), boundary, config_hash(boundary, p)};
    if (mx > 0.0) {
        auto dst = out.cost.pixels();
        auto src = feature.pixels();
        for (std::size_t i = 0; i < src.size(); ++i)
            dst[i] = 1.0 - src[i] / mx;
    }
    if (p.search_band)
        for (int y = 0; y < h; ++y)
            if (y < p.search_band->row_min || y > p.search_band->row_max)
                for (auto& v : out.cost.row(y))
                    v += kBandPenalty;
    detail::zero_minimum(out.cost);
    return out;
}

/// Cost map for fluid contours: canny -> close -> 0 on edges, 1 elsewhere -> blur(1).
inline CostMap fluid_feature_map(const BScan& bscan, const PipelineConfig& config)
{
    const FluidPipeline& f = config.fluid;
    const BinaryImage edges =
        morph(canny(bscan.pixels, f.canny_low, f.canny_high), MorphOp::Close, f.morph_close_se);
    GrayImage c(bscan.width(), bscan.height(), 1.0);
    if (count_set(edges) == 0)
        return CostMap{std::move(c), std::nullopt, config_hash(f)};
    auto dst = c.pixels();
    auto src = edges.pixels();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] ? 0.0 : 1.0;
    CostMap out{gaussian_blur(c, 1.0), std::nullopt, config_hash(f)};
    for (auto& v : out.cost.pixels())
        v = std::clamp(v, 0.0, 1.0);
    detail::zero_minimum(out.cost);
    return out;
}

} // namespace lwoct
