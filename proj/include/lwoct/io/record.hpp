#pragma once

#include "lwoct/error.hpp"
#include "lwoct/io/png.hpp"
#include "lwoct/io/portable.hpp"
#include "lwoct/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace lwoct::io {

using nlohmann::json;

// Masks are stored as row-major runs of set pixels: [start, length, start, length, ...].
inline json mask_to_json(const BinaryImage& m)
{
    json runs = json::array();
    const auto px = m.pixels();
    for (std::size_t i = 0; i < px.size();) {
        if (!px[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < px.size() && px[j])
            ++j;
        runs.push_back(i);
        runs.push_back(j - i);
        i = j;
    }
    return {{"width", m.width()}, {"height", m.height()}, {"runs", std::move(runs)}};
}

inline BinaryImage mask_from_json(const json& j)
{
    BinaryImage m(j.at("width").get<int>(), j.at("height").get<int>(), 0);
    const auto& runs = j.at("runs");
    if (runs.size() % 2 != 0)
        throw Error(ErrorCode::IoFailure, "mask runs must come in pairs");
    auto px = m.pixels();
    for (std::size_t k = 0; k < runs.size(); k += 2) {
        const auto start = runs[k].get<std::size_t>(), len = runs[k + 1].get<std::size_t>();
        if (start + len > px.size())
            throw Error(ErrorCode::IoFailure, "mask run outside image");
        std::fill_n(px.begin() + static_cast<std::ptrdiff_t>(start), len, std::uint8_t{1});
    }
    return m;
}

inline json to_json(const Boundary& b)
{
    json anchors = json::array();
    for (const auto& a : b.anchors)
        anchors.push_back({{"x", a.x}, {"y", a.y}, {"t", a.t}});
    return {{"y", b.y},
            {"anchors", std::move(anchors)},
            {"mode", to_string(b.mode)},
            {"elapsed_seconds", b.elapsed_seconds},
            {"click_count", b.click_count}};
}

inline Boundary boundary_from_json(BoundaryId id, const json& j)
{
    Boundary b;
    b.id = id;
    b.y = j.at("y").get<std::vector<double>>();
    for (const auto& a : j.value("anchors", json::array()))
        b.anchors.push_back({a.at("x").get<int>(), a.at("y").get<double>(), a.value("t", 0.0)});
    b.mode = boundary_mode_from_string(j.value("mode", "Livewire"));
    b.elapsed_seconds = j.value("elapsed_seconds", 0.0);
    b.click_count = j.value("click_count", 0);
    return b;
}

inline json to_json(const SegmentationRecord& r)
{
    json boundaries = json::object();
    for (const auto& [id, b] : r.boundaries)
        boundaries[std::string(to_string(id))] = to_json(b);
    json fluids = json::array();
    for (const auto& f : r.fluids) {
        json contour = json::array();
        for (const auto& p : f.contour)
            contour.push_back({p.x, p.y});
        fluids.push_back({{"label", to_string(f.label)},
                          {"contour", std::move(contour)},
                          {"mask", mask_to_json(f.mask)},
                          {"area_px", f.area_px}});
    }
    json stats = json::object();
    for (const auto& [id, s] : r.session_stats)
        stats[std::string(to_string(id))] = {{"elapsed_seconds", s.elapsed_seconds}, {"click_count", s.click_count}};
    return {{"volume_id", r.volume_id},
            {"bscan_index", r.bscan_index},
            {"grader_id", r.grader_id},
            {"boundaries", std::move(boundaries)},
            {"fluids", std::move(fluids)},
            {"session_stats", std::move(stats)}};
}

inline SegmentationRecord record_from_json(const json& j)
{
    try {
        SegmentationRecord r;
        r.volume_id = j.at("volume_id").get<std::string>();
        r.bscan_index = j.at("bscan_index").get<int>();
        r.grader_id = j.value("grader_id", "");
        const auto boundaries = j.value("boundaries", json::object());
        for (const auto& [name, b] : boundaries.items()) {
            const auto id = boundary_from_string(name);
            r.boundaries.emplace(id, boundary_from_json(id, b));
        }
        for (const auto& f : j.value("fluids", json::array())) {
            FluidRegion region;
            region.label = fluid_label_from_string(f.value("label", "Unlabeled"));
            for (const auto& p : f.at("contour"))
                region.contour.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
            region.mask = mask_from_json(f.at("mask"));
            region.area_px = f.value("area_px", static_cast<int>(count_set(region.mask)));
            r.fluids.push_back(std::move(region));
        }
        const auto stats = j.value("session_stats", json::object());
        for (const auto& [name, s] : stats.items())
            r.session_stats[boundary_from_string(name)] = {s.value("elapsed_seconds", 0.0), s.value("click_count", 0)};
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoFailure, std::string("malformed record: ") + e.what());
    }
}

inline void check_consistent(const SegmentationRecord& r, const BScan& bscan)
{
    for (const auto& [id, b] : r.boundaries)
        if (static_cast<int>(b.y.size()) != bscan.width())
            throw Error(ErrorCode::LengthMismatch, std::string(to_string(id)) + " has " + std::to_string(b.y.size())
                                                       + " columns, B-scan has " + std::to_string(bscan.width()));
    for (const auto& f : r.fluids)
        if (!f.mask.same_shape(bscan.pixels))
            throw Error(ErrorCode::DimensionMismatch, "fluid mask does not match the B-scan");
}

inline std::string record_stem(const SegmentationRecord& r)
{
    std::string id = r.volume_id.empty() ? "record" : r.volume_id;
    std::replace_if(id.begin(), id.end(), [](char c) {
        return !(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.');
    }, '_');
    char idx[16];
    std::snprintf(idx, sizeof idx, "_%03d", r.bscan_index);
    return id + idx;
}

inline constexpr std::array<std::array<std::uint8_t, 3>, 9> kBoundaryColors{{
    {255, 64, 64}, {255, 160, 0}, {255, 255, 0}, {0, 220, 0}, {0, 200, 255},
    {64, 96, 255}, {200, 64, 255}, {255, 96, 200}, {255, 255, 255},
}};

inline std::array<std::uint8_t, 3> fluid_color(FluidLabel l)
{
    switch (l) {
    case FluidLabel::IRF: return {0, 255, 255};
    case FluidLabel::SRF: return {255, 0, 255};
    case FluidLabel::Unlabeled: break;
    }
    return {255, 255, 128};
}

inline RgbImage render_overlay(const SegmentationRecord& r, const BScan& bscan)
{
    const int w = bscan.width(), h = bscan.height();
    RgbImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto v = quantize8(bscan.pixels(x, y));
            out(x, y) = {v, v, v};
        }
    auto row_of = [h](double y) { return std::clamp(static_cast<int>(std::lround(y)), 0, h - 1); };
    for (const auto& [id, b] : r.boundaries) {
        const auto color = kBoundaryColors[static_cast<std::size_t>(id)];
        for (int x = 0; x < w && x < static_cast<int>(b.y.size()); ++x) {
            // Fill the vertical gap to the previous column so steep sections stay connected.
            int lo = row_of(b.y[static_cast<std::size_t>(x)]), hi = lo;
            if (x > 0) {
                const int prev = row_of(b.y[static_cast<std::size_t>(x - 1)]);
                lo = std::min(lo, prev + 1);
                hi = std::max(hi, prev - 1);
            }
            for (int y = std::min(lo, hi); y <= std::max(lo, hi); ++y)
                out(x, y) = color;
        }
    }
    for (const auto& f : r.fluids)
        for (const auto& p : f.contour)
            if (out.contains(p.x, p.y))
                out(p.x, p.y) = fluid_color(f.label);
    return out;
}

struct ExportedFiles {
    std::filesystem::path json;
    std::vector<std::filesystem::path> csvs;
    std::filesystem::path overlay;
};

inline std::string boundary_csv(const Boundary& b)
{
    std::string text = "column,y\n";
    char line[64];
    for (std::size_t x = 0; x < b.y.size(); ++x) {
        std::snprintf(line, sizeof line, "%zu,%.3f\n", x, b.y[x]);
        text += line;
    }
    return text;
}

inline ExportedFiles export_record(const SegmentationRecord& r, const BScan& bscan, const std::filesystem::path& out_dir)
{
    check_consistent(r, bscan);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
    const auto stem = record_stem(r);
    ExportedFiles files;
    files.json = out_dir / (stem + ".json");
    write_text_file(files.json, to_json(r).dump(2) + "\n");
    for (const auto& [id, b] : r.boundaries) {
        auto path = out_dir / (stem + "_" + std::string(to_string(id)) + ".csv");
        write_text_file(path, boundary_csv(b));
        files.csvs.push_back(std::move(path));
    }
    files.overlay = out_dir / (stem + "_overlay.png");
    write_png_rgb8(files.overlay, render_overlay(r, bscan));
    return files;
}

inline bool looks_like_record(const json& j)
{
    return j.is_object() && j.contains("volume_id") && j.contains("bscan_index");
}

/// Accepts a record file, a file holding an array of records, or a directory of record files.
inline std::vector<SegmentationRecord> load_records(const std::filesystem::path& path)
{
    std::vector<SegmentationRecord> out;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            if (auto j = read_json_file(f); looks_like_record(j))
                out.push_back(record_from_json(j));
        return out;
    }
    const auto j = read_json_file(path);
    if (j.is_array()) {
        for (const auto& item : j)
            out.push_back(record_from_json(item));
    } else {
        out.push_back(record_from_json(j));
    }
    return out;
}

inline SegmentationRecord load_record(const std::filesystem::path& path)
{
    return record_from_json(read_json_file(path));
}

} // namespace lwoct::io
