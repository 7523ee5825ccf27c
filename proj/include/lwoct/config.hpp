#pragma once

#include "lwoct/error.hpp"
#include "lwoct/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace lwoct {

enum class Polarity { DarkToBright, BrightToDark };

constexpr std::string_view to_string(Polarity p) noexcept
{
    return p == Polarity::DarkToBright ? "DarkToBright" : "BrightToDark";
}

struct StructuringElement {
    int width = 1;
    int height = 1;
    friend bool operator==(const StructuringElement&, const StructuringElement&) = default;
};

/// Inclusive row interval.
struct RowBand {
    int row_min = 0;
    int row_max = 0;
    friend bool operator==(const RowBand&, const RowBand&) = default;
};

struct LayerPipeline {
    Polarity polarity = Polarity::DarkToBright;
    double gaussian_sigma_px = 1.5;
    StructuringElement morph_close_se{3, 3};
    double canny_low = 0.1;
    double canny_high = 0.3;
    std::optional<RowBand> search_band;
    friend bool operator==(const LayerPipeline&, const LayerPipeline&) = default;
};

struct FluidPipeline {
    double canny_low = 0.1;
    double canny_high = 0.3;
    StructuringElement morph_close_se{3, 3};
    int min_area_px = 25;
    friend bool operator==(const FluidPipeline&, const FluidPipeline&) = default;
};

struct ShadowParams {
    double k = 0.7;
    int band_half_width_px = 10;
    friend bool operator==(const ShadowParams&, const ShadowParams&) = default;
};

// Penalty added outside a boundary's search band; dominates any in-band step cost (max 1).
inline constexpr double kBandPenalty = 10.0;
inline constexpr int kDefaultDMax = 3;

struct PipelineConfig {
    std::map<BoundaryId, LayerPipeline> layers;
    FluidPipeline fluid;
    ShadowParams peripapillary;
    int d_max = kDefaultDMax;

    static PipelineConfig defaults()
    {
        PipelineConfig c;
        for (auto id : kAllBoundaries) {
            LayerPipeline p;
            switch (id) {
            case BoundaryId::ILM:
            case BoundaryId::GCL_IPL:
            case BoundaryId::INL_OPL:
            case BoundaryId::ONL_PR:
            case BoundaryId::PR_RPE: p.polarity = Polarity::DarkToBright; break;
            case BoundaryId::RNFL_GCL:
            case BoundaryId::IPL_INL:
            case BoundaryId::OPL_ONL:
            case BoundaryId::RPE_OUTER: p.polarity = Polarity::BrightToDark; break;
            }
            c.layers[id] = p;
        }
        return c;
    }

    const LayerPipeline& layer(BoundaryId id) const
    {
        auto it = layers.find(id);
        if (it == layers.end())
            throw Error(ErrorCode::InvalidConfig, "no pipeline configured for " + std::string(to_string(id)));
        return it->second;
    }

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object())
        throw Error(ErrorCode::InvalidConfig, where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!ok.contains(item.key()))
            throw Error(ErrorCode::InvalidConfig, "unknown key '" + item.key() + "' in " + where);
}

inline void validate_thresholds(double low, double high, const std::string& where)
{
    if (!(low >= 0.0 && low < high && high <= 1.0))
        throw Error(ErrorCode::InvalidConfig, where + ": need 0 <= canny_low < canny_high <= 1");
}

inline void validate_se(const StructuringElement& se, const std::string& where)
{
    if (se.width < 1 || se.height < 1)
        throw Error(ErrorCode::InvalidConfig, where + ": structuring element dims must be >= 1");
}

inline nlohmann::json se_to_json(const StructuringElement& se) { return nlohmann::json::array({se.width, se.height}); }

inline StructuringElement se_from_json(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2)
        throw Error(ErrorCode::InvalidConfig, where + ": morph_close_se must be [width, height]");
    return {j[0].get<int>(), j[1].get<int>()};
}

} // namespace detail

inline void validate(const PipelineConfig& c)
{
    for (const auto& [id, p] : c.layers) {
        const std::string where = std::string(to_string(id));
        if (!(p.gaussian_sigma_px >= 0.0))
            throw Error(ErrorCode::InvalidConfig, where + ": gaussian_sigma_px must be >= 0");
        detail::validate_se(p.morph_close_se, where);
        detail::validate_thresholds(p.canny_low, p.canny_high, where);
        if (p.search_band && p.search_band->row_min > p.search_band->row_max)
            throw Error(ErrorCode::InvalidConfig, where + ": search_band row_min > row_max");
    }
    detail::validate_se(c.fluid.morph_close_se, "fluid");
    detail::validate_thresholds(c.fluid.canny_low, c.fluid.canny_high, "fluid");
    if (c.fluid.min_area_px < 0)
        throw Error(ErrorCode::InvalidConfig, "fluid: min_area_px must be >= 0");
    if (!(c.peripapillary.k > 0.0) || c.peripapillary.band_half_width_px < 0)
        throw Error(ErrorCode::InvalidConfig, "peripapillary: k must be > 0 and band_half_width_px >= 0");
    if (c.d_max < 1)
        throw Error(ErrorCode::InvalidConfig, "livewire: d_max must be >= 1");
}

inline nlohmann::json to_json(const LayerPipeline& p)
{
    nlohmann::json j;
    j["polarity"] = to_string(p.polarity);
    j["gaussian_sigma_px"] = p.gaussian_sigma_px;
    j["morph_close_se"] = detail::se_to_json(p.morph_close_se);
    j["canny_low"] = p.canny_low;
    j["canny_high"] = p.canny_high;
    j["search_band"] = p.search_band ? nlohmann::json::array({p.search_band->row_min, p.search_band->row_max})
                                     : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const PipelineConfig& c)
{
    nlohmann::json j;
    auto& b = j["boundaries"] = nlohmann::json::object();
    for (const auto& [id, p] : c.layers)
        b[std::string(to_string(id))] = to_json(p);
    j["fluid"] = {{"canny_low", c.fluid.canny_low},
                  {"canny_high", c.fluid.canny_high},
                  {"morph_close_se", detail::se_to_json(c.fluid.morph_close_se)},
                  {"min_area_px", c.fluid.min_area_px}};
    j["peripapillary"] = {{"shadow_k", c.peripapillary.k}, {"band_half_width_px", c.peripapillary.band_half_width_px}};
    j["livewire"] = {{"d_max", c.d_max}};
    return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline PipelineConfig config_from_json(const nlohmann::json& j)
{
    PipelineConfig c = PipelineConfig::defaults();
    try {
        detail::check_keys(j, {"boundaries", "fluid", "peripapillary", "livewire"}, "config");
        if (j.contains("boundaries")) {
            const auto& bs = j.at("boundaries");
            if (!bs.is_object())
                throw Error(ErrorCode::InvalidConfig, "boundaries must be an object");
            for (const auto& item : bs.items()) {
                BoundaryId id;
                try {
                    id = boundary_from_string(item.key());
                } catch (const Error&) {
                    throw Error(ErrorCode::InvalidConfig, "unknown boundary '" + item.key() + "'");
                }
                const auto& v = item.value();
                detail::check_keys(v,
                                   {"polarity", "gaussian_sigma_px", "morph_close_se", "canny_low", "canny_high",
                                    "search_band"},
                                   item.key());
                auto& p = c.layers[id];
                if (v.contains("polarity")) {
                    auto s = v.at("polarity").get<std::string>();
                    if (s == "DarkToBright")
                        p.polarity = Polarity::DarkToBright;
                    else if (s == "BrightToDark")
                        p.polarity = Polarity::BrightToDark;
                    else
                        throw Error(ErrorCode::InvalidConfig, item.key() + ": unknown polarity '" + s + "'");
                }
                if (v.contains("gaussian_sigma_px"))
                    p.gaussian_sigma_px = v.at("gaussian_sigma_px").get<double>();
                if (v.contains("morph_close_se"))
                    p.morph_close_se = detail::se_from_json(v.at("morph_close_se"), item.key());
                if (v.contains("canny_low"))
                    p.canny_low = v.at("canny_low").get<double>();
                if (v.contains("canny_high"))
                    p.canny_high = v.at("canny_high").get<double>();
                if (v.contains("search_band")) {
                    const auto& sb = v.at("search_band");
                    if (sb.is_null())
                        p.search_band.reset();
                    else if (sb.is_array() && sb.size() == 2)
                        p.search_band = RowBand{sb[0].get<int>(), sb[1].get<int>()};
                    else
                        throw Error(ErrorCode::InvalidConfig, item.key() + ": search_band must be [row_min, row_max]");
                }
            }
        }
        if (j.contains("fluid")) {
            const auto& f = j.at("fluid");
            detail::check_keys(f, {"canny_low", "canny_high", "morph_close_se", "min_area_px"}, "fluid");
            if (f.contains("canny_low"))
                c.fluid.canny_low = f.at("canny_low").get<double>();
            if (f.contains("canny_high"))
                c.fluid.canny_high = f.at("canny_high").get<double>();
            if (f.contains("morph_close_se"))
                c.fluid.morph_close_se = detail::se_from_json(f.at("morph_close_se"), "fluid");
            if (f.contains("min_area_px"))
                c.fluid.min_area_px = f.at("min_area_px").get<int>();
        }
        if (j.contains("peripapillary")) {
            const auto& p = j.at("peripapillary");
            detail::check_keys(p, {"shadow_k", "band_half_width_px"}, "peripapillary");
            if (p.contains("shadow_k"))
                c.peripapillary.k = p.at("shadow_k").get<double>();
            if (p.contains("band_half_width_px"))
                c.peripapillary.band_half_width_px = p.at("band_half_width_px").get<int>();
        }
        if (j.contains("livewire")) {
            const auto& l = j.at("livewire");
            detail::check_keys(l, {"d_max"}, "livewire");
            if (l.contains("d_max"))
                c.d_max = l.at("d_max").get<int>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    validate(c);
    return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const PipelineConfig& c, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write config " + path.string());
    out << to_json(c).dump(2) << '\n';
}

/// FNV-1a, 64 bit, as 16 hex digits. Stable across platforms and runs.
inline std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(BoundaryId id, const LayerPipeline& p)
{
    return fnv1a_hex(std::string(to_string(id)) + ":" + to_json(p).dump());
}

inline std::string config_hash(const FluidPipeline& f)
{
    nlohmann::json j = {{"canny_low", f.canny_low},
                        {"canny_high", f.canny_high},
                        {"morph_close_se", detail::se_to_json(f.morph_close_se)}};
    return fnv1a_hex("Fluid:" + j.dump());
}

} // namespace lwoct
