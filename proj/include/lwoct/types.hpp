#pragma once

#include "lwoct/error.hpp"
#include "lwoct/image.hpp"

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lwoct {

// Retinal interfaces, top to bottom.
enum class BoundaryId { ILM, RNFL_GCL, GCL_IPL, IPL_INL, INL_OPL, OPL_ONL, ONL_PR, PR_RPE, RPE_OUTER };

inline constexpr std::array<BoundaryId, 9> kAllBoundaries{
    BoundaryId::ILM,     BoundaryId::RNFL_GCL, BoundaryId::GCL_IPL, BoundaryId::IPL_INL,  BoundaryId::INL_OPL,
    BoundaryId::OPL_ONL, BoundaryId::ONL_PR,   BoundaryId::PR_RPE,  BoundaryId::RPE_OUTER,
};

constexpr std::string_view to_string(BoundaryId id) noexcept
{
    switch (id) {
    case BoundaryId::ILM: return "ILM";
    case BoundaryId::RNFL_GCL: return "RNFL_GCL";
    case BoundaryId::GCL_IPL: return "GCL_IPL";
    case BoundaryId::IPL_INL: return "IPL_INL";
    case BoundaryId::INL_OPL: return "INL_OPL";
    case BoundaryId::OPL_ONL: return "OPL_ONL";
    case BoundaryId::ONL_PR: return "ONL_PR";
    case BoundaryId::PR_RPE: return "PR_RPE";
    case BoundaryId::RPE_OUTER: return "RPE_OUTER";
    }
    return "?";
}

inline BoundaryId boundary_from_string(std::string_view name)
{
    for (auto id : kAllBoundaries)
        if (to_string(id) == name)
            return id;
    throw Error(ErrorCode::InvalidArgument, "unknown boundary '" + std::string(name) + "'");
}

/// A grader click. y may be fractional; searches snap it to the nearest row.
struct Anchor {
    int x = 0;
    double y = 0.0;
    double t = 0.0;

    int row(int height) const noexcept
    {
        auto r = static_cast<int>(std::lround(y));
        return r < 0 ? 0 : (r >= height ? height - 1 : r);
    }

    friend bool operator==(const Anchor&, const Anchor&) = default;
};

enum class BoundaryMode { Livewire, Grid, Corrected };

constexpr std::string_view to_string(BoundaryMode m) noexcept
{
    switch (m) {
    case BoundaryMode::Livewire: return "Livewire";
    case BoundaryMode::Grid: return "Grid";
    case BoundaryMode::Corrected: return "Corrected";
    }
    return "?";
}

inline BoundaryMode boundary_mode_from_string(std::string_view s)
{
    for (auto m : {BoundaryMode::Livewire, BoundaryMode::Grid, BoundaryMode::Corrected})
        if (to_string(m) == s)
            return m;
    throw Error(ErrorCode::InvalidArgument, "unknown boundary mode '" + std::string(s) + "'");
}

/// One row position per column for a named interface.
struct Boundary {
    BoundaryId id = BoundaryId::ILM;
    std::vector<double> y;
    std::vector<Anchor> anchors;
    BoundaryMode mode = BoundaryMode::Livewire;
    double elapsed_seconds = 0.0;
    int click_count = 0;

    int width() const noexcept { return static_cast<int>(y.size()); }

    friend bool operator==(const Boundary&, const Boundary&) = default;
};

/// A boundary plus whether any value had to be clamped into the image rows.
struct ClampedBoundary {
    Boundary boundary;
    bool clamped = false;
};

enum class FluidLabel { IRF, SRF, Unlabeled };

constexpr std::string_view to_string(FluidLabel l) noexcept
{
    switch (l) {
    case FluidLabel::IRF: return "IRF";
    case FluidLabel::SRF: return "SRF";
    case FluidLabel::Unlabeled: return "Unlabeled";
    }
    return "?";
}

inline FluidLabel fluid_label_from_string(std::string_view s)
{
    for (auto l : {FluidLabel::IRF, FluidLabel::SRF, FluidLabel::Unlabeled})
        if (to_string(l) == s)
            return l;
    throw Error(ErrorCode::InvalidArgument, "unknown fluid label '" + std::string(s) + "'");
}

struct FluidRegion {
    FluidLabel label = FluidLabel::Unlabeled;
    std::vector<Pixel> contour; // closed loop, last pixel connects back to the first
    BinaryImage mask;
    int area_px = 0;

    friend bool operator==(const FluidRegion&, const FluidRegion&) = default;
};

struct EffortStats {
    double elapsed_seconds = 0.0;
    int click_count = 0;
    friend bool operator==(const EffortStats&, const EffortStats&) = default;
};

struct SegmentationRecord {
    std::string volume_id;
    int bscan_index = 0;
    std::map<BoundaryId, Boundary> boundaries;
    std::vector<FluidRegion> fluids;
    std::string grader_id;
    std::map<BoundaryId, EffortStats> session_stats;

    friend bool operator==(const SegmentationRecord&, const SegmentationRecord&) = default;
};

struct BScan {
    GrayImage pixels; // intensities in [0, 1]
    int index = 0;

    int width() const noexcept { return pixels.width(); }
    int height() const noexcept { return pixels.height(); }

    friend bool operator==(const BScan&, const BScan&) = default;
};

enum class ScanKind { Macular, Circumpapillary };
enum class Eye { OD, OS, Unknown };

constexpr std::string_view to_string(ScanKind k) noexcept
{
    return k == ScanKind::Macular ? "Macular" : "Circumpapillary";
}

constexpr std::string_view to_string(Eye e) noexcept
{
    switch (e) {
    case Eye::OD: return "OD";
    case Eye::OS: return "OS";
    case Eye::Unknown: return "Unknown";
    }
    return "?";
}

inline ScanKind scan_kind_from_string(std::string_view s)
{
    if (s == "Macular")
        return ScanKind::Macular;
    if (s == "Circumpapillary")
        return ScanKind::Circumpapillary;
    throw Error(ErrorCode::InvalidArgument, "unknown scan kind '" + std::string(s) + "'");
}

inline Eye eye_from_string(std::string_view s)
{
    if (s == "OD")
        return Eye::OD;
    if (s == "OS")
        return Eye::OS;
    if (s == "Unknown" || s.empty())
        return Eye::Unknown;
    throw Error(ErrorCode::InvalidArgument, "unknown eye '" + std::string(s) + "'");
}

struct Volume {
    std::string id;
    ScanKind scan_kind = ScanKind::Macular;
    std::vector<BScan> bscans;
    double scale_x_mm = 1.0;
    double scale_z_mm = 1.0;
    double spacing_y_mm = 1.0;
    Eye eye = Eye::Unknown;

    int width() const noexcept { return bscans.empty() ? 0 : bscans.front().width(); }
    int height() const noexcept { return bscans.empty() ? 0 : bscans.front().height(); }

    friend bool operator==(const Volume&, const Volume&) = default;
};

/// Throws unless the volume satisfies its structural invariants.
inline void validate(const Volume& v)
{
    if (v.bscans.empty())
        throw Error(ErrorCode::InconsistentHeader, "volume has no B-scans");
    if (!(v.scale_x_mm > 0) || !(v.scale_z_mm > 0) || !(v.spacing_y_mm > 0))
        throw Error(ErrorCode::InconsistentHeader, "volume scales must be strictly positive");
    const int w = v.width(), h = v.height();
    if (w < 2 || h < 2)
        throw Error(ErrorCode::InconsistentHeader, "B-scans must be at least 2x2");
    for (const auto& b : v.bscans) {
        if (b.width() != w || b.height() != h)
            throw Error(ErrorCode::DimensionMismatch, "B-scan " + std::to_string(b.index) + " has a different size");
        for (double p : b.pixels.pixels())
            if (!(p >= 0.0 && p <= 1.0))
                throw Error(ErrorCode::InconsistentHeader, "intensity outside [0,1] in B-scan " + std::to_string(b.index));
    }
}

} // namespace lwoct
