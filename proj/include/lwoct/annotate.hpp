#pragma once

#include "lwoct/config.hpp"
#include "lwoct/error.hpp"
#include "lwoct/imgproc.hpp"
#include "lwoct/livewire.hpp"
#include "lwoct/peripapillary.hpp"
#include "lwoct/raster.hpp"
#include "lwoct/spline.hpp"
#include "lwoct/types.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lwoct {

/// Grid-manual boundary: natural cubic spline through the clicks at every column, end values
/// held outside the click span, clamped to [0, height - 1].
inline ClampedBoundary grid_boundary(BoundaryId id, std::vector<Anchor> clicks, int width, int height)
{
    if (clicks.size() < 2)
        throw Error(ErrorCode::TooFewClicks, "grid mode needs at least two clicks");
    for (const auto& c : clicks)
        if (c.x < 0 || c.x >= width)
            throw Error(ErrorCode::OutOfBounds, "click column " + std::to_string(c.x) + " outside image");
    clicks = sorted_anchors(std::move(clicks));

    std::vector<double> xs, ys;
    for (const auto& c : clicks) {
        xs.push_back(c.x);
        ys.push_back(c.y);
    }
    const NaturalCubicSpline spline(std::move(xs), std::move(ys));

    ClampedBoundary out;
    auto& b = out.boundary;
    b.id = id;
    b.mode = BoundaryMode::Grid;
    b.y.resize(static_cast<std::size_t>(width));
    const double top = height - 1;
    for (int x = 0; x < width; ++x) {
        double v = spline(x);
        if (v < 0.0 || v > top) {
            v = std::clamp(v, 0.0, top);
            out.clamped = true;
        }
        b.y[static_cast<std::size_t>(x)] = v;
    }
    b.click_count = static_cast<int>(clicks.size());
    b.anchors = std::move(clicks);
    return out;
}

/// Keeps regions with area_px >= min_area_px, in order.
inline std::vector<FluidRegion> filter_small_fluids(std::vector<FluidRegion> regions, int min_area_px)
{
    if (min_area_px < 0)
        throw Error(ErrorCode::InvalidArgument, "min_area_px must be >= 0");
    std::erase_if(regions, [&](const FluidRegion& r) { return r.area_px < min_area_px; });
    return regions;
}

/// Closed contour -> fluid region with its rasterized mask.
inline FluidRegion make_fluid_region(std::vector<Pixel> contour, int width, int height, FluidLabel label)
{
    FluidRegion r;
    r.label = label;
    r.mask = rasterize_loop(contour, width, height);
    r.area_px = static_cast<int>(count_set(r.mask));
    r.contour = std::move(contour);
    if (r.area_px < 1)
        throw Error(ErrorCode::DegenerateLoop, "contour rasterizes to an empty mask");
    return r;
}

enum class SessionModeKind { LayerLivewire, Grid, Fluid };

struct SessionMode {
    SessionModeKind kind = SessionModeKind::LayerLivewire;
    BoundaryId boundary = BoundaryId::ILM;
    FluidLabel label = FluidLabel::Unlabeled;
    friend bool operator==(const SessionMode&, const SessionMode&) = default;
};

/// What the grader sees after each click: a full-width boundary (layer modes), an open
/// polyline (fluid mode) or nothing yet.
struct Preview {
    enum class Kind { Empty, Boundary, Path };
    Kind kind = Kind::Empty;
    Boundary boundary;
    std::vector<Pixel> path;
    friend bool operator==(const Preview&, const Preview&) = default;
};

inline double steady_seconds()
{
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

/// One grader working on one B-scan. Single writer; not thread-safe.
class Session {
public:
    using Clock = std::function<double()>;

    Session(BScan bscan, std::string volume_id, ScanKind scan_kind, PipelineConfig config,
            std::string grader_id = {}, Clock clock = steady_seconds)
        : bscan_(std::move(bscan)), scan_kind_(scan_kind), config_(std::move(config)), clock_(std::move(clock))
    {
        validate(config_);
        record_.volume_id = std::move(volume_id);
        record_.bscan_index = bscan_.index;
        record_.grader_id = std::move(grader_id);
        started_at_ = clock_();
        if (scan_kind_ == ScanKind::Circumpapillary)
            prep_ = prepare_peripapillary(bscan_, config_.peripapillary);
    }

    const BScan& bscan() const noexcept { return bscan_; }
    const SegmentationRecord& record() const noexcept { return record_; }
    const PipelineConfig& config() const noexcept { return config_; }
    const std::optional<SessionMode>& mode() const noexcept { return mode_; }
    const std::vector<Anchor>& pending_anchors() const noexcept { return pending_; }
    int click_count() const noexcept { return clicks_; }
    double started_at() const noexcept { return started_at_; }

    void set_config(PipelineConfig config)
    {
        validate(config);
        config_ = std::move(config);
        layer_costs_.clear();
        fluid_cost_.reset();
        if (scan_kind_ == ScanKind::Circumpapillary)
            prep_ = prepare_peripapillary(bscan_, config_.peripapillary);
    }

    void set_mode(SessionMode mode)
    {
        if (mode.kind != SessionModeKind::Fluid && scan_kind_ == ScanKind::Circumpapillary)
            require_peripapillary_boundary(mode.boundary);
        mode_ = mode;
        reset_pending();
    }

    Preview add_anchor(int x, double y, std::optional<double> t = std::nullopt)
    {
        require_mode();
        if (x < 0 || x >= bscan_.width() || !(y >= 0.0) || !(y < bscan_.height()))
            throw Error(ErrorCode::OutOfBounds, "anchor (" + std::to_string(x) + ", " + std::to_string(y) +
                                                    ") outside the B-scan");
        if (mode_->kind != SessionModeKind::Fluid)
            for (const auto& a : pending_)
                if (a.x == x)
                    throw Error(ErrorCode::DuplicateAnchorColumn, "column " + std::to_string(x) + " already anchored");
        const double now = t.value_or(clock_());
        pending_.push_back({x, y, now});
        ++clicks_;
        try {
            Preview p = preview();
            if (!first_click_at_)
                first_click_at_ = now;
            return p;
        } catch (...) {
            pending_.pop_back();
            --clicks_;
            throw;
        }
    }

    /// Removes the last anchor. Clicks already spent stay counted.
    Preview undo_anchor()
    {
        require_mode();
        if (pending_.empty())
            throw Error(ErrorCode::NothingToUndo, "no pending anchors");
        pending_.pop_back();
        return preview();
    }

    Preview preview() const
    {
        require_mode();
        Preview p;
        switch (mode_->kind) {
        case SessionModeKind::LayerLivewire:
            if (!pending_.empty()) {
                p.kind = Preview::Kind::Boundary;
                p.boundary = assemble_layer(pending_);
            }
            break;
        case SessionModeKind::Grid:
            if (pending_.size() >= 2) {
                p.kind = Preview::Kind::Boundary;
                p.boundary = grid_boundary(mode_->boundary, pending_, bscan_.width(), bscan_.height()).boundary;
                p.boundary.click_count = clicks_;
            }
            break;
        case SessionModeKind::Fluid:
            if (!pending_.empty()) {
                p.kind = Preview::Kind::Path;
                p.path = chain_free_paths(fluid_cost(), pending_);
            }
            break;
        }
        return p;
    }

    const SegmentationRecord& commit(std::optional<double> t = std::nullopt)
    {
        require_mode();
        const double now = t.value_or(clock_());
        const double elapsed = first_click_at_ ? std::max(0.0, now - *first_click_at_) : 0.0;
        switch (mode_->kind) {
        case SessionModeKind::LayerLivewire:
        case SessionModeKind::Grid: {
            if (pending_.empty())
                throw Error(ErrorCode::InsufficientAnchors, "commit needs at least one anchor");
            Boundary b = mode_->kind == SessionModeKind::Grid
                             ? grid_boundary(mode_->boundary, pending_, bscan_.width(), bscan_.height()).boundary
                             : assemble_layer(pending_);
            b.elapsed_seconds = elapsed;
            b.click_count = clicks_;
            record_.session_stats[b.id] = EffortStats{elapsed, clicks_};
            record_.boundaries[b.id] = std::move(b);
            break;
        }
        case SessionModeKind::Fluid: {
            if (pending_.size() < 3)
                throw Error(ErrorCode::InsufficientAnchors, "a fluid contour needs at least three anchors");
            auto loop = close_contour(fluid_cost(), pending_);
            record_.fluids.push_back(make_fluid_region(std::move(loop), bscan_.width(), bscan_.height(), mode_->label));
            break;
        }
        }
        reset_pending();
        return record_;
    }

    /// Re-traces a committed boundary between two correction anchors.
    const Boundary& splice(BoundaryId id, const Anchor& a, const Anchor& b)
    {
        auto it = record_.boundaries.find(id);
        if (it == record_.boundaries.end())
            throw Error(ErrorCode::InvalidArgument, "boundary " + std::string(to_string(id)) + " not committed");
        for (const auto* p : {&a, &b})
            if (p->x < 0 || p->x >= bscan_.width() || !(p->y >= 0.0) || !(p->y < bscan_.height()))
                throw Error(ErrorCode::OutOfBounds, "splice anchor outside the B-scan");
        const CostMap& cost = layer_cost(id);
        Boundary updated;
        if (prep_) {
            if (a.x >= b.x)
                throw Error(ErrorCode::InvalidArgument, "splice needs a.x < b.x");
            const auto path = shortest_layer_path(cost, to_flat(a, prep_->map), to_flat(b, prep_->map), config_.d_max);
            updated = it->second;
            const double top = bscan_.height() - 1;
            for (const auto& n : path.nodes)
                updated.y[static_cast<std::size_t>(n.x)] =
                    std::clamp(static_cast<double>(n.y - prep_->map.shift[static_cast<std::size_t>(n.x)]), 0.0, top);
            std::erase_if(updated.anchors, [&](const Anchor& p) { return p.x >= a.x && p.x <= b.x; });
            updated.anchors.push_back(a);
            updated.anchors.push_back(b);
            std::stable_sort(updated.anchors.begin(), updated.anchors.end(),
                             [](const Anchor& l, const Anchor& r) { return l.x < r.x; });
            updated.mode = BoundaryMode::Corrected;
            updated.click_count += 2;
        } else {
            updated = splice_correction(it->second, cost, a, b, config_.d_max);
        }
        record_.session_stats[id].click_count += 2;
        it->second = std::move(updated);
        return it->second;
    }

    /// Drops committed fluid regions smaller than min_area_px (config default when omitted).
    const SegmentationRecord& filter_fluids(std::optional<int> min_area_px = std::nullopt)
    {
        record_.fluids = filter_small_fluids(std::move(record_.fluids), min_area_px.value_or(config_.fluid.min_area_px));
        return record_;
    }

    const CostMap& layer_cost(BoundaryId id) const
    {
        auto it = layer_costs_.find(id);
        if (it == layer_costs_.end())
            it = layer_costs_.emplace(id, build_feature_map(prep_ ? prep_->work : bscan_, id, config_)).first;
        return it->second;
    }

    const CostMap& fluid_cost() const
    {
        if (!fluid_cost_)
            fluid_cost_ = fluid_feature_map(bscan_, config_);
        return *fluid_cost_;
    }

private:
    void require_mode() const
    {
        if (!mode_)
            throw Error(ErrorCode::InvalidMode, "no active mode; call set_mode first");
    }

    void reset_pending()
    {
        pending_.clear();
        clicks_ = 0;
        first_click_at_.reset();
    }

    Boundary assemble_layer(const std::vector<Anchor>& anchors) const
    {
        const CostMap& cost = layer_cost(mode_->boundary);
        Boundary b = prep_ ? assemble_flattened(*prep_, cost, anchors, config_.d_max).boundary
                           : assemble_boundary(cost, anchors, config_.d_max);
        b.click_count = clicks_;
        return b;
    }

    BScan bscan_;
    ScanKind scan_kind_;
    PipelineConfig config_;
    Clock clock_;
    std::optional<PeripapillaryPrep> prep_;
    SegmentationRecord record_;
    std::optional<SessionMode> mode_;
    std::vector<Anchor> pending_;
    int clicks_ = 0;
    std::optional<double> first_click_at_;
    double started_at_ = 0.0;
    mutable std::map<BoundaryId, CostMap> layer_costs_;
    mutable std::optional<CostMap> fluid_cost_;
};

} // namespace lwoct
