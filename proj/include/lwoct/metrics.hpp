#pragma once

#include "lwoct/error.hpp"
#include "lwoct/image.hpp"
#include "lwoct/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace lwoct {

/// Mean absolute per-column difference, in pixels.
inline double unsigned_error(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty())
        throw Error(ErrorCode::LengthMismatch, "boundaries must have equal, non-zero length (" +
                                                   std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

/// 2|X n Y| / (|X| + |Y|).
inline double dice(const BinaryImage& a, const BinaryImage& b)
{
    if (!a.same_shape(b))
        throw Error(ErrorCode::DimensionMismatch, "masks differ in size");
    std::size_t na = 0, nb = 0, both = 0;
    auto pa = a.pixels();
    auto pb = b.pixels();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const bool x = pa[i] != 0, y = pb[i] != 0;
        na += x;
        nb += y;
        both += x && y;
    }
    if (na + nb == 0)
        throw Error(ErrorCode::BothEmpty, "dice is undefined for two empty masks");
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Chord length over path length of an ordered point list. 1 for a straight run.
inline double irregularity_index(std::span<const Point2> points)
{
    if (points.size() < 2)
        throw Error(ErrorCode::DegenerateSegment, "irregularity index needs at least two points");
    double path = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        path += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
    if (!(path > 0.0))
        throw Error(ErrorCode::DegenerateSegment, "segment has zero length");
    const double chord = std::hypot(points.back().x - points.front().x, points.back().y - points.front().y);
    return chord / path;
}

/// Irregularity of columns [x0, x1] of a boundary (whole width by default).
inline double irregularity_index(const Boundary& b, int x0 = 0, int x1 = -1)
{
    if (x1 < 0)
        x1 = b.width() - 1;
    if (x0 < 0 || x1 >= b.width() || x0 >= x1)
        throw Error(ErrorCode::DegenerateSegment, "invalid column range for irregularity index");
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(x1 - x0 + 1));
    for (int x = x0; x <= x1; ++x)
        pts.push_back({static_cast<double>(x), b.y[static_cast<std::size_t>(x)]});
    return irregularity_index(pts);
}

struct BlandAltmanStats {
    int n = 0;
    double mean_diff = 0.0;
    double sd_diff = 0.0; // n - 1 denominator
    double loa_low = 0.0;
    double loa_high = 0.0;
    double pct_within = 0.0; // percentage of differences inside [loa_low, loa_high]
};

inline BlandAltmanStats bland_altman(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error(ErrorCode::LengthMismatch, "paired measurements differ in length");
    if (a.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "Bland-Altman needs at least two pairs");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        sum += d[i];
    }
    BlandAltmanStats s;
    s.n = static_cast<int>(n);
    s.mean_diff = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d)
        ss += (v - s.mean_diff) * (v - s.mean_diff);
    s.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
    s.loa_low = s.mean_diff - 1.96 * s.sd_diff;
    s.loa_high = s.mean_diff + 1.96 * s.sd_diff;
    std::size_t inside = 0;
    for (double v : d)
        inside += (v >= s.loa_low && v <= s.loa_high);
    s.pct_within = 100.0 * static_cast<double>(inside) / static_cast<double>(n);
    return s;
}

struct EffortSummary {
    BoundaryId id = BoundaryId::ILM;
    int n = 0;
    double mean_seconds = 0.0;
    double mean_clicks = 0.0;
};

/// Per-boundary mean time and clicks over the records that contain the boundary.
inline std::vector<EffortSummary> summarize_effort(std::span<const SegmentationRecord> records)
{
    if (records.empty())
        throw Error(ErrorCode::InvalidArgument, "no records to summarize");
    std::map<BoundaryId, std::tuple<int, double, double>> acc;
    for (const auto& r : records)
        for (const auto& [id, s] : r.session_stats) {
            auto& [n, secs, clicks] = acc[id];
            ++n;
            secs += s.elapsed_seconds;
            clicks += s.click_count;
        }
    std::vector<EffortSummary> out;
    for (const auto& [id, v] : acc) {
        const auto& [n, secs, clicks] = v;
        out.push_back({id, n, secs / n, clicks / n});
    }
    return out;
}

/// Per-column arithmetic mean of several graders' boundaries.
inline std::vector<double> gold_standard(std::span<const std::vector<double>> boundaries)
{
    if (boundaries.empty())
        throw Error(ErrorCode::InvalidArgument, "gold standard needs at least one boundary");
    const std::size_t w = boundaries.front().size();
    std::vector<double> out(w, 0.0);
    for (const auto& b : boundaries) {
        if (b.size() != w)
            throw Error(ErrorCode::LengthMismatch, "grader boundaries differ in width");
        for (std::size_t i = 0; i < w; ++i)
            out[i] += b[i];
    }
    for (auto& v : out)
        v /= static_cast<double>(boundaries.size());
    return out;
}

using ScanKey = std::pair<std::string, int>;

inline ScanKey scan_key(const SegmentationRecord& r) { return {r.volume_id, r.bscan_index}; }

/// Gold-standard records from several graders: for every scan and every boundary present in all
/// graders' records, the per-column mean. All graders must cover the same scans.
inline std::vector<SegmentationRecord> gold_standard_records(const std::vector<std::vector<SegmentationRecord>>& graders)
{
    if (graders.empty())
        throw Error(ErrorCode::InvalidArgument, "no grader record sets");
    std::vector<std::map<ScanKey, const SegmentationRecord*>> index(graders.size());
    for (std::size_t g = 0; g < graders.size(); ++g)
        for (const auto& r : graders[g])
            index[g][scan_key(r)] = &r;
    for (std::size_t g = 1; g < graders.size(); ++g) {
        if (index[g].size() != index[0].size() ||
            !std::equal(index[g].begin(), index[g].end(), index[0].begin(),
                        [](const auto& l, const auto& r) { return l.first == r.first; }))
            throw Error(ErrorCode::ScanMismatch, "grader record sets cover different scans");
    }
    std::vector<SegmentationRecord> out;
    for (const auto& [key, first] : index[0]) {
        SegmentationRecord gold;
        gold.volume_id = key.first;
        gold.bscan_index = key.second;
        gold.grader_id = "gold";
        for (const auto& [id, b] : first->boundaries) {
            std::vector<std::vector<double>> ys;
            for (const auto& g : index) {
                const auto* rec = g.at(key);
                auto it = rec->boundaries.find(id);
                if (it == rec->boundaries.end())
                    break;
                ys.push_back(it->second.y);
            }
            if (ys.size() != index.size())
                continue;
            Boundary avg;
            avg.id = id;
            avg.mode = BoundaryMode::Grid;
            avg.y = gold_standard(ys);
            gold.boundaries[id] = std::move(avg);
        }
        out.push_back(std::move(gold));
    }
    return out;
}

struct ScanError {
    std::string volume_id;
    int bscan_index = 0;
    double unsigned_error = 0.0;
    double irregularity_a = 0.0;
    double irregularity_b = 0.0;
};

struct BoundaryMetrics {
    BoundaryId id = BoundaryId::ILM;
    std::vector<ScanError> scans;
    double mean_unsigned_error = 0.0;
    BlandAltmanStats bland_altman;
    std::vector<std::pair<double, double>> ba_points; // (mean, difference) per column
};

struct DiceEntry {
    std::string volume_id;
    int bscan_index = 0;
    std::optional<double> dice; // empty when neither record has fluid
};

struct MetricsReport {
    std::vector<BoundaryMetrics> boundaries;
    std::vector<DiceEntry> dice;
    std::vector<EffortSummary> effort_a;
    std::vector<EffortSummary> effort_b;
};

inline BinaryImage fluid_union(const SegmentationRecord& r, int width, int height)
{
    BinaryImage m(width, height, 0);
    for (const auto& f : r.fluids) {
        if (f.mask.width() != width || f.mask.height() != height)
            throw Error(ErrorCode::DimensionMismatch, "fluid mask size differs");
        auto src = f.mask.pixels();
        auto dst = m.pixels();
        for (std::size_t i = 0; i < src.size(); ++i)
            dst[i] = dst[i] || src[i];
    }
    return m;
}

/// Compares record set b against reference set a, scan by scan.
inline MetricsReport evaluate(std::span<const SegmentationRecord> a, std::span<const SegmentationRecord> b)
{
    std::map<ScanKey, const SegmentationRecord*> ia, ib;
    for (const auto& r : a)
        ia[scan_key(r)] = &r;
    for (const auto& r : b)
        ib[scan_key(r)] = &r;
    if (ia.size() != ib.size() || !std::equal(ia.begin(), ia.end(), ib.begin(), [](const auto& l, const auto& r) {
            return l.first == r.first;
        }))
        throw Error(ErrorCode::ScanMismatch, "record sets cover different scans");

    MetricsReport report;
    std::map<BoundaryId, BoundaryMetrics> per;
    std::map<BoundaryId, std::pair<std::vector<double>, std::vector<double>>> pooled;
    for (const auto& [key, ra] : ia) {
        const SegmentationRecord* rb = ib.at(key);
        for (const auto& [id, ba] : ra->boundaries) {
            auto it = rb->boundaries.find(id);
            if (it == rb->boundaries.end())
                continue;
            const Boundary& bb = it->second;
            auto& m = per[id];
            m.id = id;
            m.scans.push_back({key.first, key.second, unsigned_error(ba.y, bb.y), irregularity_index(ba),
                               irregularity_index(bb)});
            auto& [pa, pb] = pooled[id];
            pa.insert(pa.end(), ba.y.begin(), ba.y.end());
            pb.insert(pb.end(), bb.y.begin(), bb.y.end());
        }
        // Fluid dice on the union of each record's masks.
        const BinaryImage* shape = nullptr;
        if (!ra->fluids.empty())
            shape = &ra->fluids.front().mask;
        else if (!rb->fluids.empty())
            shape = &rb->fluids.front().mask;
        DiceEntry d{key.first, key.second, std::nullopt};
        if (shape) {
            const int w = shape->width(), h = shape->height();
            d.dice = dice(fluid_union(*ra, w, h), fluid_union(*rb, w, h));
        }
        report.dice.push_back(std::move(d));
    }
    for (auto& [id, m] : per) {
        double acc = 0.0;
        for (const auto& s : m.scans)
            acc += s.unsigned_error;
        m.mean_unsigned_error = acc / static_cast<double>(m.scans.size());
        const auto& [pa, pb] = pooled[id];
        m.bland_altman = bland_altman(pa, pb);
        m.ba_points.reserve(pa.size());
        for (std::size_t i = 0; i < pa.size(); ++i)
            m.ba_points.emplace_back(0.5 * (pa[i] + pb[i]), pa[i] - pb[i]);
        report.boundaries.push_back(std::move(m));
    }
    const auto has_stats = [](std::span<const SegmentationRecord> rs) {
        return std::any_of(rs.begin(), rs.end(), [](const auto& r) { return !r.session_stats.empty(); });
    };
    if (!a.empty() && has_stats(a))
        report.effort_a = summarize_effort(a);
    if (!b.empty() && has_stats(b))
        report.effort_b = summarize_effort(b);
    return report;
}

} // namespace lwoct
