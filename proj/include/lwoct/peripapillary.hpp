#pragma once

#include "lwoct/config.hpp"
#include "lwoct/error.hpp"
#include "lwoct/imgproc.hpp"
#include "lwoct/livewire.hpp"
#include "lwoct/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <vector>

namespace lwoct {

/// Integer per-column row shifts taking original coordinates to flattened ones (y_flat = y + shift).
struct FlattenMap {
    std::vector<int> shift;
    std::vector<double> reference; // the baseline that was flattened
    int height = 0;
};

struct ShadowMask {
    std::set<int> columns;
    bool contains(int x) const { return columns.contains(x); }
};

inline double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1)
        return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

/// Quadratic least-absolute-deviations fit over x = 0..n-1, by iteratively reweighted least squares.
inline std::vector<double> robust_quadratic_fit(std::span<const double> values, int iterations = 10)
{
    const int n = static_cast<int>(values.size());
    if (n < 3)
        return {values.begin(), values.end()};
    const double centre = 0.5 * (n - 1), scale = centre > 0 ? centre : 1.0;
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd target(n);
    for (int i = 0; i < n; ++i) {
        const double t = (i - centre) / scale;
        design(i, 0) = 1.0;
        design(i, 1) = t;
        design(i, 2) = t * t;
        target(i) = values[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(n);
    Eigen::Vector3d coef = Eigen::Vector3d::Zero();
    for (int it = 0; it <= iterations; ++it) {
        const Eigen::MatrixXd wd = weights.asDiagonal() * design;
        const Eigen::Matrix3d normal = design.transpose() * wd;
        coef = normal.ldlt().solve(wd.transpose() * target);
        const Eigen::VectorXd residual = target - design * coef;
        for (int i = 0; i < n; ++i)
            weights(i) = 1.0 / std::max(std::abs(residual(i)), 1e-3);
    }
    std::vector<double> fit(static_cast<std::size_t>(n));
    const Eigen::VectorXd curve = design * coef;
    for (int i = 0; i < n; ++i)
        fit[static_cast<std::size_t>(i)] = curve(i);
    return fit;
}

/// Row of the brightest band in each column (vertically smoothed, first maximum wins), then a
/// robust quadratic fit across columns.
inline std::vector<double> estimate_baseline(const BScan& bscan, double smoothing_sigma_px = 2.0)
{
    const GrayImage smooth = convolve_cols(bscan.pixels, gaussian_kernel(smoothing_sigma_px));
    std::vector<double> rows(static_cast<std::size_t>(bscan.width()));
    for (int x = 0; x < bscan.width(); ++x) {
        int best = 0;
        for (int y = 1; y < bscan.height(); ++y)
            if (smooth(x, y) > smooth(x, best))
                best = y;
        rows[static_cast<std::size_t>(x)] = best;
    }
    return robust_quadratic_fit(rows);
}

struct Flattened {
    BScan bscan;
    FlattenMap map;
};

/// Shifts each column by round(median(baseline) - baseline[x]); vacated pixels become 0.
inline Flattened flatten(const BScan& bscan, std::span<const double> baseline)
{
    const int w = bscan.width(), h = bscan.height();
    if (static_cast<int>(baseline.size()) != w)
        throw Error(ErrorCode::LengthMismatch, "baseline length differs from B-scan width");
    const double ref = median({baseline.begin(), baseline.end()});
    Flattened out{BScan{GrayImage(w, h, 0.0), bscan.index}, FlattenMap{{}, {baseline.begin(), baseline.end()}, h}};
    out.map.shift.resize(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) {
        long s = std::lround(ref - baseline[static_cast<std::size_t>(x)]);
        s = std::clamp<long>(s, -(h - 1), h - 1);
        out.map.shift[static_cast<std::size_t>(x)] = static_cast<int>(s);
        for (int y = 0; y < h; ++y) {
            const long src = y - s;
            if (src >= 0 && src < h)
                out.bscan.pixels(x, y) = bscan.pixels(x, static_cast<int>(src));
        }
    }
    return out;
}

/// Original coordinates -> flattened coordinates (no clamping).
inline Boundary flatten_boundary(const Boundary& b, const FlattenMap& map)
{
    Boundary out = b;
    for (std::size_t x = 0; x < out.y.size(); ++x)
        out.y[x] += map.shift[x];
    return out;
}

/// Flattened coordinates -> original coordinates, clamped to the image rows.
inline ClampedBoundary unflatten_boundary(const Boundary& b, const FlattenMap& map)
{
    if (b.y.size() != map.shift.size())
        throw Error(ErrorCode::LengthMismatch, "boundary width differs from flatten map width");
    ClampedBoundary out{b, false};
    const double top = map.height - 1;
    for (std::size_t x = 0; x < out.boundary.y.size(); ++x) {
        double v = out.boundary.y[x] - map.shift[x];
        if (v < 0.0 || v > top) {
            v = std::clamp(v, 0.0, top);
            out.clamped = true;
        }
        out.boundary.y[x] = v;
    }
    return out;
}

/// Columns whose mean intensity around the baseline falls below k times the median column.
inline ShadowMask detect_vessel_shadows(const BScan& bscan, std::span<const double> baseline,
                                        const ShadowParams& params = {})
{
    const int w = bscan.width(), h = bscan.height();
    if (static_cast<int>(baseline.size()) != w)
        throw Error(ErrorCode::LengthMismatch, "baseline length differs from B-scan width");
    std::vector<double> means(static_cast<std::size_t>(w), 0.0);
    for (int x = 0; x < w; ++x) {
        const long c = std::lround(baseline[static_cast<std::size_t>(x)]);
        const int lo = static_cast<int>(std::clamp<long>(c - params.band_half_width_px, 0, h - 1));
        const int hi = static_cast<int>(std::clamp<long>(c + params.band_half_width_px, 0, h - 1));
        double acc = 0.0;
        for (int y = lo; y <= hi; ++y)
            acc += bscan.pixels(x, y);
        means[static_cast<std::size_t>(x)] = acc / (hi - lo + 1);
    }
    const double threshold = params.k * median(means);
    ShadowMask mask;
    for (int x = 0; x < w; ++x)
        if (means[static_cast<std::size_t>(x)] < threshold)
            for (int d = -1; d <= 1; ++d)
                if (x + d >= 0 && x + d < w)
                    mask.columns.insert(x + d);
    return mask;
}

/// Replaces flagged columns by row-wise linear interpolation between the nearest clean columns.
inline BScan inpaint_shadows(const BScan& bscan, const ShadowMask& mask)
{
    const int w = bscan.width(), h = bscan.height();
    if (static_cast<int>(mask.columns.size()) >= w && w > 0)
        throw Error(ErrorCode::AllColumnsFlagged, "every column is flagged as shadow");
    BScan out = bscan;
    for (int x : mask.columns) {
        if (x < 0 || x >= w)
            throw Error(ErrorCode::OutOfBounds, "shadow column " + std::to_string(x) + " outside image");
        int left = x - 1, right = x + 1;
        while (left >= 0 && mask.contains(left))
            --left;
        while (right < w && mask.contains(right))
            ++right;
        for (int y = 0; y < h; ++y) {
            if (left < 0)
                out.pixels(x, y) = bscan.pixels(right, y);
            else if (right >= w)
                out.pixels(x, y) = bscan.pixels(left, y);
            else {
                const double t = static_cast<double>(x - left) / (right - left);
                out.pixels(x, y) = bscan.pixels(left, y) + t * (bscan.pixels(right, y) - bscan.pixels(left, y));
            }
        }
    }
    return out;
}

inline void require_peripapillary_boundary(BoundaryId id)
{
    if (id == BoundaryId::GCL_IPL)
        throw Error(ErrorCode::InvalidMode, "GCL_IPL is not segmented on peripapillary scans");
}

/// Baseline, shadow removal and flattening. `work` is the image the cost maps are built from.
struct PeripapillaryPrep {
    std::vector<double> baseline;
    ShadowMask shadows;
    FlattenMap map;
    BScan work;
};

inline PeripapillaryPrep prepare_peripapillary(const BScan& bscan, const ShadowParams& params = {})
{
    PeripapillaryPrep p;
    p.baseline = estimate_baseline(bscan);
    p.shadows = detect_vessel_shadows(bscan, p.baseline, params);
    auto flat = flatten(inpaint_shadows(bscan, p.shadows), p.baseline);
    p.map = std::move(flat.map);
    p.work = std::move(flat.bscan);
    return p;
}

/// Anchor in original coordinates -> flattened coordinates, kept inside the image.
inline Anchor to_flat(const Anchor& a, const FlattenMap& map)
{
    Anchor f = a;
    f.y = std::clamp(a.y + map.shift[static_cast<std::size_t>(a.x)], 0.0, static_cast<double>(map.height - 1));
    return f;
}

/// Livewire assembly on a cost map built from prep.work; anchors and result in original coordinates.
inline ClampedBoundary assemble_flattened(const PeripapillaryPrep& prep, const CostMap& cost,
                                          const std::vector<Anchor>& anchors, int d_max)
{
    for (const auto& a : anchors)
        if (a.x < 0 || a.x >= prep.work.width())
            throw Error(ErrorCode::OutOfBounds, "anchor column outside image");
    std::vector<Anchor> flat;
    flat.reserve(anchors.size());
    for (const auto& a : anchors)
        flat.push_back(to_flat(a, prep.map));
    auto result = unflatten_boundary(assemble_boundary(cost, flat, d_max), prep.map);
    result.boundary.anchors = sorted_anchors(anchors);
    return result;
}

/// Livewire segmentation of a circumpapillary B-scan; anchors and result in original coordinates.
inline ClampedBoundary segment_peripapillary(const PeripapillaryPrep& prep, BoundaryId id,
                                             const std::vector<Anchor>& anchors, const PipelineConfig& config)
{
    require_peripapillary_boundary(id);
    return assemble_flattened(prep, build_feature_map(prep.work, id, config), anchors, config.d_max);
}

} // namespace lwoct
