#pragma once

#include "lwoct/error.hpp"
#include "lwoct/io/png.hpp"
#include "lwoct/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace lwoct::io {

inline nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoFailure, path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

/// Manifest: {id, scan_kind, eye, scale_x_mm, scale_z_mm, spacing_y_mm, slices: [relative paths]}.
inline Volume load_portable(const std::filesystem::path& manifest_path)
{
    const auto m = read_json_file(manifest_path);
    const auto base = manifest_path.parent_path();
    Volume v;
    try {
        v.id = m.value("id", manifest_path.stem().string());
        v.scan_kind = scan_kind_from_string(m.value("scan_kind", "Macular"));
        v.eye = eye_from_string(m.value("eye", "Unknown"));
        v.scale_x_mm = m.value("scale_x_mm", 1.0);
        v.scale_z_mm = m.value("scale_z_mm", 1.0);
        v.spacing_y_mm = m.value("spacing_y_mm", 1.0);
        const auto& slices = m.at("slices");
        for (std::size_t i = 0; i < slices.size(); ++i) {
            const auto path = base / slices[i].get<std::string>();
            if (!std::filesystem::is_regular_file(path))
                throw Error(ErrorCode::MissingSlice, "slice " + std::to_string(i) + " not found: " + path.string());
            BScan b{read_png_gray(path), static_cast<int>(i)};
            if (!v.bscans.empty() && !b.pixels.same_shape(v.bscans.front().pixels))
                throw Error(ErrorCode::DimensionMismatch, "slice " + path.string() + " is "
                                                              + std::to_string(b.width()) + "x" + std::to_string(b.height())
                                                              + ", expected " + std::to_string(v.width()) + "x"
                                                              + std::to_string(v.height()));
            v.bscans.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoFailure, manifest_path.string() + ": " + e.what());
    }
    validate(v);
    return v;
}

/// Writes 8-bit slices plus manifest.json into dir and returns the manifest path.
inline std::filesystem::path save_portable(const Volume& v, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    nlohmann::json m{{"id", v.id},
                     {"scan_kind", to_string(v.scan_kind)},
                     {"eye", to_string(v.eye)},
                     {"scale_x_mm", v.scale_x_mm},
                     {"scale_z_mm", v.scale_z_mm},
                     {"spacing_y_mm", v.spacing_y_mm},
                     {"slices", nlohmann::json::array()}};
    for (std::size_t i = 0; i < v.bscans.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "slice_%03zu.png", i);
        write_png_gray8(dir / name, v.bscans[i].pixels);
        m["slices"].push_back(name);
    }
    const auto manifest = dir / "manifest.json";
    write_text_file(manifest, m.dump(2) + "\n");
    return manifest;
}

} // namespace lwoct::io
