#pragma once

#include "lwoct/error.hpp"
#include "lwoct/image.hpp"
#include "lwoct/imgproc.hpp"
#include "lwoct/raster.hpp"
#include "lwoct/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace lwoct {

struct PathResult {
    std::vector<Pixel> nodes;
    double total_cost = 0.0;
};

/// Edge weight shared by both graphs: mean endpoint cost times Euclidean step length.
inline double step_weight(double c0, double c1, double length) noexcept { return 0.5 * (c0 + c1) * length; }

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline void check_anchor(const CostMap& cost, const Anchor& a)
{
    if (a.x < 0 || a.x >= cost.width() || !(a.y >= 0.0) || !(a.y < cost.height()))
        throw Error(ErrorCode::OutOfBounds, "anchor (" + std::to_string(a.x) + ", " + std::to_string(a.y) +
                                                ") outside " + std::to_string(cost.width()) + "x" +
                                                std::to_string(cost.height()));
}

// Best-cost table over the column-monotone DAG between columns x0..x1. Column x0 is seeded
// with `init` (inf = unreachable). pred holds the predecessor row in the previous column.
struct LayerTable {
    int x0 = 0;
    int height = 0;
    std::vector<double> dist;
    std::vector<int> pred;

    double& d(int x, int y) { return dist[static_cast<std::size_t>(x - x0) * height + y]; }
    int& p(int x, int y) { return pred[static_cast<std::size_t>(x - x0) * height + y]; }
};

inline LayerTable layer_dp(const CostMap& cost, int x0, int x1, std::span<const double> init, int d_max)
{
    const int h = cost.height();
    const int cols = x1 - x0 + 1;
    LayerTable t{x0, h, std::vector<double>(static_cast<std::size_t>(cols) * h, kInf),
                 std::vector<int>(static_cast<std::size_t>(cols) * h, -1)};
    std::copy(init.begin(), init.end(), t.dist.begin());

    // Candidate order: |dy| ascending, and for equal |dy| the smaller predecessor row first
    // (predecessor row = y' - dy, so +k precedes -k). Strict < keeps the first minimum.
    std::vector<int> order{0};
    std::vector<double> length{1.0};
    for (int k = 1; k <= d_max; ++k) {
        for (int dy : {k, -k}) {
            order.push_back(dy);
            length.push_back(std::sqrt(1.0 + static_cast<double>(dy) * dy));
        }
    }

    for (int x = x0; x < x1; ++x) {
        for (int yn = 0; yn < h; ++yn) {
            double best = kInf;
            int arg = -1;
            const double cn = cost(x + 1, yn);
            for (std::size_t i = 0; i < order.size(); ++i) {
                const int y = yn - order[i];
                if (y < 0 || y >= h)
                    continue;
                const double base = t.d(x, y);
                if (base == kInf)
                    continue;
                const double cand = base + step_weight(cost(x, y), cn, length[i]);
                if (cand < best) {
                    best = cand;
                    arg = y;
                }
            }
            t.d(x + 1, yn) = best;
            t.p(x + 1, yn) = arg;
        }
    }
    return t;
}

// Rows of the optimal path ending at (x1, row), for columns x0..x1.
inline std::vector<int> backtrack(LayerTable& t, int x1, int row)
{
    std::vector<int> rows(static_cast<std::size_t>(x1 - t.x0 + 1));
    for (int x = x1; x >= t.x0; --x) {
        rows[static_cast<std::size_t>(x - t.x0)] = row;
        if (x > t.x0)
            row = t.p(x, row);
    }
    return rows;
}

} // namespace detail

/// Minimum-cost column-monotone path: one node per column in [start.x, end.x], consecutive
/// rows differing by at most d_max.
inline PathResult shortest_layer_path(const CostMap& cost, const Anchor& start, const Anchor& end, int d_max)
{
    detail::check_anchor(cost, start);
    detail::check_anchor(cost, end);
    if (start.x >= end.x)
        throw Error(ErrorCode::InvalidArgument, "layer path needs start.x < end.x");
    if (d_max < 1)
        throw Error(ErrorCode::InvalidArgument, "d_max must be >= 1");
    const int h = cost.height();
    const int sy = start.row(h), ey = end.row(h);
    const long long span = end.x - start.x;
    if (std::abs(ey - sy) > d_max * span)
        throw Error(ErrorCode::NoPath, "rows " + std::to_string(sy) + " -> " + std::to_string(ey) + " over " +
                                           std::to_string(span) + " columns exceeds d_max " + std::to_string(d_max));

    std::vector<double> init(static_cast<std::size_t>(h), detail::kInf);
    init[static_cast<std::size_t>(sy)] = 0.0;
    auto table = detail::layer_dp(cost, start.x, end.x, init, d_max);
    const double total = table.d(end.x, ey);
    if (total == detail::kInf)
        throw Error(ErrorCode::NoPath, "end anchor unreachable");
    const auto rows = detail::backtrack(table, end.x, ey);

    PathResult out;
    out.total_cost = total;
    out.nodes.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.nodes.push_back({start.x + static_cast<int>(i), rows[i]});
    return out;
}

/// Dijkstra over the 8-connected pixel graph. Equal-distance frontier nodes are settled in
/// (y, x) order.
inline PathResult shortest_free_path(const CostMap& cost, const Anchor& start, const Anchor& end)
{
    detail::check_anchor(cost, start);
    detail::check_anchor(cost, end);
    const int w = cost.width(), h = cost.height();
    const Pixel s{start.x, start.row(h)}, e{end.x, end.row(h)};
    if (s == e)
        throw Error(ErrorCode::InvalidArgument, "free path endpoints coincide");

    const auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
    std::vector<double> dist(static_cast<std::size_t>(w) * h, detail::kInf);
    std::vector<int> pred(dist.size(), -1);
    std::vector<char> done(dist.size(), 0);
    using Entry = std::tuple<double, int, int>; // dist, y, x
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;

    dist[idx(s.x, s.y)] = 0.0;
    frontier.emplace(0.0, s.y, s.x);
    constexpr int kDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
    constexpr int kDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    const double diag = std::sqrt(2.0);

    while (!frontier.empty()) {
        const auto [d, y, x] = frontier.top();
        frontier.pop();
        const std::size_t i = idx(x, y);
        if (done[i])
            continue;
        done[i] = 1;
        if (x == e.x && y == e.y)
            break;
        for (int k = 0; k < 8; ++k) {
            const int nx = x + kDx[k], ny = y + kDy[k];
            if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                continue;
            const std::size_t j = idx(nx, ny);
            if (done[j])
                continue;
            const double len = (kDx[k] != 0 && kDy[k] != 0) ? diag : 1.0;
            const double cand = d + step_weight(cost(x, y), cost(nx, ny), len);
            if (cand < dist[j]) {
                dist[j] = cand;
                pred[j] = static_cast<int>(i);
                frontier.emplace(cand, ny, nx);
            }
        }
    }

    PathResult out;
    out.total_cost = dist[idx(e.x, e.y)];
    for (int cur = static_cast<int>(idx(e.x, e.y)); cur != -1; cur = pred[static_cast<std::size_t>(cur)])
        out.nodes.push_back({cur % w, cur / w});
    std::reverse(out.nodes.begin(), out.nodes.end());
    return out;
}

/// Sorts anchors by column and rejects duplicates.
inline std::vector<Anchor> sorted_anchors(std::vector<Anchor> anchors)
{
    std::stable_sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) { return a.x < b.x; });
    for (std::size_t i = 1; i < anchors.size(); ++i)
        if (anchors[i].x == anchors[i - 1].x)
            throw Error(ErrorCode::DuplicateAnchorColumn, "two anchors in column " + std::to_string(anchors[i].x));
    return anchors;
}

/// Full-width boundary through every anchor. Between anchors: shortest_layer_path. Before the
/// first and after the last anchor the path runs to a virtual source/sink attached at zero cost
/// to every pixel of the outermost column.
inline Boundary assemble_boundary(const CostMap& cost, std::vector<Anchor> anchors, int d_max)
{
    if (anchors.empty())
        throw Error(ErrorCode::InsufficientAnchors, "need at least one anchor");
    if (!cost.source)
        throw Error(ErrorCode::InvalidArgument, "layer assembly needs a boundary cost map");
    if (d_max < 1)
        throw Error(ErrorCode::InvalidArgument, "d_max must be >= 1");
    for (const auto& a : anchors)
        detail::check_anchor(cost, a);
    anchors = sorted_anchors(std::move(anchors));

    const int w = cost.width(), h = cost.height();
    Boundary b;
    b.id = *cost.source;
    b.y.assign(static_cast<std::size_t>(w), 0.0);

    const Anchor& first = anchors.front();
    if (first.x > 0) {
        std::vector<double> init(static_cast<std::size_t>(h), 0.0);
        auto t = detail::layer_dp(cost, 0, first.x, init, d_max);
        const auto rows = detail::backtrack(t, first.x, first.row(h));
        for (int x = 0; x <= first.x; ++x)
            b.y[static_cast<std::size_t>(x)] = rows[static_cast<std::size_t>(x)];
    } else {
        b.y[0] = first.row(h);
    }

    for (std::size_t i = 1; i < anchors.size(); ++i) {
        const auto path = shortest_layer_path(cost, anchors[i - 1], anchors[i], d_max);
        for (const auto& n : path.nodes)
            b.y[static_cast<std::size_t>(n.x)] = n.y;
    }

    const Anchor& last = anchors.back();
    if (last.x < w - 1) {
        std::vector<double> init(static_cast<std::size_t>(h), detail::kInf);
        init[static_cast<std::size_t>(last.row(h))] = 0.0;
        auto t = detail::layer_dp(cost, last.x, w - 1, init, d_max);
        int best = 0;
        for (int y = 1; y < h; ++y)
            if (t.d(w - 1, y) < t.d(w - 1, best))
                best = y;
        const auto rows = detail::backtrack(t, w - 1, best);
        for (int x = last.x; x < w; ++x)
            b.y[static_cast<std::size_t>(x)] = rows[static_cast<std::size_t>(x - last.x)];
    }

    b.click_count = static_cast<int>(anchors.size());
    b.anchors = std::move(anchors);
    b.mode = BoundaryMode::Livewire;
    return b;
}

/// Re-traces [a.x, b.x] between two correction anchors; every other column is left untouched.
inline Boundary splice_correction(const Boundary& boundary, const CostMap& cost, const Anchor& a, const Anchor& b,
                                  int d_max)
{
    if (boundary.width() != cost.width())
        throw Error(ErrorCode::DimensionMismatch, "boundary width differs from cost map width");
    if (a.x >= b.x)
        throw Error(ErrorCode::InvalidArgument, "splice needs a.x < b.x");
    const auto path = shortest_layer_path(cost, a, b, d_max);

    Boundary out = boundary;
    for (const auto& n : path.nodes)
        out.y[static_cast<std::size_t>(n.x)] = n.y;
    std::erase_if(out.anchors, [&](const Anchor& p) { return p.x >= a.x && p.x <= b.x; });
    out.anchors.push_back(a);
    out.anchors.push_back(b);
    std::stable_sort(out.anchors.begin(), out.anchors.end(),
                     [](const Anchor& l, const Anchor& r) { return l.x < r.x; });
    out.mode = BoundaryMode::Corrected;
    out.click_count += 2;
    return out;
}

/// Chains free paths through consecutive anchors (open polyline, no closing segment).
inline std::vector<Pixel> chain_free_paths(const CostMap& cost, std::span<const Anchor> anchors)
{
    std::vector<Pixel> out;
    const int h = cost.height();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        detail::check_anchor(cost, anchors[i]);
        const Pixel p{anchors[i].x, anchors[i].row(h)};
        if (i == 0) {
            out.push_back(p);
            continue;
        }
        if (p == out.back())
            continue;
        const auto seg = shortest_free_path(cost, Anchor{out.back().x, static_cast<double>(out.back().y)}, anchors[i]);
        out.insert(out.end(), seg.nodes.begin() + 1, seg.nodes.end());
    }
    return out;
}

/// Closed contour through the anchors in click order. The returned loop does not repeat its
/// first pixel; the last pixel is 8-adjacent to the first.
inline std::vector<Pixel> close_contour(const CostMap& cost, std::span<const Anchor> anchors)
{
    if (anchors.size() < 3)
        throw Error(ErrorCode::InsufficientAnchors, "a contour needs at least three anchors");
    std::vector<Anchor> cyclic(anchors.begin(), anchors.end());
    cyclic.push_back(anchors.front());
    auto loop = chain_free_paths(cost, cyclic);
    if (loop.size() > 1 && loop.back() == loop.front())
        loop.pop_back();
    if (loop.size() < 3 || polygon_area2(loop) == 0)
        throw Error(ErrorCode::DegenerateLoop, "contour encloses no area");
    return loop;
}

} // namespace lwoct
