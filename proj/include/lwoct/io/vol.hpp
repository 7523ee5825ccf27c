#pragma once

#include "lwoct/error.hpp"
#include "lwoct/types.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace lwoct::io {

inline constexpr std::size_t kVolHeaderSize = 2048;
inline constexpr std::string_view kVolMagic = "HSF-OCT-";
inline constexpr int kVolCirclePattern = 2;

// Field offsets within the 2048-byte file header.
namespace vol_offset {
inline constexpr std::size_t version = 0, size_x = 12, num_bscans = 16, size_z = 20;
inline constexpr std::size_t scale_x = 24, distance = 32, scale_z = 40;
inline constexpr std::size_t size_x_slo = 48, size_y_slo = 52, scale_x_slo = 56, scale_y_slo = 64;
inline constexpr std::size_t field_size_slo = 72, scan_focus = 76, scan_position = 84;
inline constexpr std::size_t exam_time = 88, scan_pattern = 96, bscan_hdr_size = 100;
inline constexpr std::size_t id = 104, reference_id = 120, pid = 136, patient_id = 140;
inline constexpr std::size_t dob = 164, vid = 172, visit_id = 176, visit_date = 200;
inline constexpr std::size_t grid_type = 208, grid_offset = 212;
} // namespace vol_offset

struct VolHeader {
    std::string version;
    std::int32_t size_x = 0;
    std::int32_t num_bscans = 0;
    std::int32_t size_z = 0;
    double scale_x = 0.0;
    double distance = 0.0;
    double scale_z = 0.0;
    std::int32_t size_x_slo = 0;
    std::int32_t size_y_slo = 0;
    double scale_x_slo = 0.0;
    double scale_y_slo = 0.0;
    std::int32_t field_size_slo = 0;
    double scan_focus = 0.0;
    std::string scan_position;
    std::int64_t exam_time = 0;
    std::int32_t scan_pattern = 0;
    std::int32_t bscan_hdr_size = 0;
    std::string id;
    std::string reference_id;
    std::int32_t pid = 0;
    std::string patient_id;
    double dob = 0.0;
    std::int32_t vid = 0;
    std::string visit_id;
    double visit_date = 0.0;
    std::int32_t grid_type = 0;
    std::int32_t grid_offset = 0;

    friend bool operator==(const VolHeader&, const VolHeader&) = default;
};

/// Everything a .vol stream carries apart from the SLO pixels and B-scan headers.
struct VolData {
    VolHeader header;
    std::vector<std::vector<float>> raw; // per B-scan, row-major SizeZ x SizeX
};

template <class T>
T load_le(std::span<const std::byte> bytes, std::size_t offset)
{
    std::array<std::byte, sizeof(T)> buf;
    std::memcpy(buf.data(), bytes.data() + offset, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(buf.begin(), buf.end());
    return std::bit_cast<T>(buf);
}

template <class T>
void store_le(std::span<std::byte> bytes, std::size_t offset, T value)
{
    auto buf = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(buf.begin(), buf.end());
    std::memcpy(bytes.data() + offset, buf.data(), sizeof(T));
}

inline std::string load_fixed_string(std::span<const std::byte> bytes, std::size_t offset, std::size_t n)
{
    const auto* p = reinterpret_cast<const char*>(bytes.data() + offset);
    return std::string(p, strnlen(p, n));
}

inline void store_fixed_string(std::span<std::byte> bytes, std::size_t offset, std::size_t n, std::string_view s)
{
    std::memset(bytes.data() + offset, 0, n);
    std::memcpy(bytes.data() + offset, s.data(), std::min(n, s.size()));
}

inline double vol_display_value(float raw) noexcept
{
    if (!(raw < 3.4e38f) || std::isnan(raw))
        return 0.0;
    return std::pow(std::clamp(static_cast<double>(raw), 0.0, 1.0), 0.25);
}

inline VolHeader read_vol_header(std::span<const std::byte> bytes)
{
    namespace o = vol_offset;
    if (bytes.size() < kVolMagic.size()
        || std::memcmp(bytes.data(), kVolMagic.data(), kVolMagic.size()) != 0)
        throw Error(ErrorCode::BadMagic, "not a .vol stream");
    if (bytes.size() < kVolHeaderSize)
        throw Error(ErrorCode::TruncatedFile, ".vol header is shorter than 2048 bytes");

    VolHeader h;
    h.version = load_fixed_string(bytes, o::version, 12);
    h.size_x = load_le<std::int32_t>(bytes, o::size_x);
    h.num_bscans = load_le<std::int32_t>(bytes, o::num_bscans);
    h.size_z = load_le<std::int32_t>(bytes, o::size_z);
    h.scale_x = load_le<double>(bytes, o::scale_x);
    h.distance = load_le<double>(bytes, o::distance);
    h.scale_z = load_le<double>(bytes, o::scale_z);
    h.size_x_slo = load_le<std::int32_t>(bytes, o::size_x_slo);
    h.size_y_slo = load_le<std::int32_t>(bytes, o::size_y_slo);
    h.scale_x_slo = load_le<double>(bytes, o::scale_x_slo);
    h.scale_y_slo = load_le<double>(bytes, o::scale_y_slo);
    h.field_size_slo = load_le<std::int32_t>(bytes, o::field_size_slo);
    h.scan_focus = load_le<double>(bytes, o::scan_focus);
    h.scan_position = load_fixed_string(bytes, o::scan_position, 4);
    h.exam_time = load_le<std::int64_t>(bytes, o::exam_time);
    h.scan_pattern = load_le<std::int32_t>(bytes, o::scan_pattern);
    h.bscan_hdr_size = load_le<std::int32_t>(bytes, o::bscan_hdr_size);
    h.id = load_fixed_string(bytes, o::id, 16);
    h.reference_id = load_fixed_string(bytes, o::reference_id, 16);
    h.pid = load_le<std::int32_t>(bytes, o::pid);
    h.patient_id = load_fixed_string(bytes, o::patient_id, 21);
    h.dob = load_le<double>(bytes, o::dob);
    h.vid = load_le<std::int32_t>(bytes, o::vid);
    h.visit_id = load_fixed_string(bytes, o::visit_id, 24);
    h.visit_date = load_le<double>(bytes, o::visit_date);
    h.grid_type = load_le<std::int32_t>(bytes, o::grid_type);
    h.grid_offset = load_le<std::int32_t>(bytes, o::grid_offset);
    return h;
}

inline std::vector<std::byte> write_vol_header(const VolHeader& h)
{
    namespace o = vol_offset;
    std::vector<std::byte> out(kVolHeaderSize);
    std::span<std::byte> b(out);
    store_fixed_string(b, o::version, 12, h.version);
    store_le(b, o::size_x, h.size_x);
    store_le(b, o::num_bscans, h.num_bscans);
    store_le(b, o::size_z, h.size_z);
    store_le(b, o::scale_x, h.scale_x);
    store_le(b, o::distance, h.distance);
    store_le(b, o::scale_z, h.scale_z);
    store_le(b, o::size_x_slo, h.size_x_slo);
    store_le(b, o::size_y_slo, h.size_y_slo);
    store_le(b, o::scale_x_slo, h.scale_x_slo);
    store_le(b, o::scale_y_slo, h.scale_y_slo);
    store_le(b, o::field_size_slo, h.field_size_slo);
    store_le(b, o::scan_focus, h.scan_focus);
    store_fixed_string(b, o::scan_position, 4, h.scan_position);
    store_le(b, o::exam_time, h.exam_time);
    store_le(b, o::scan_pattern, h.scan_pattern);
    store_le(b, o::bscan_hdr_size, h.bscan_hdr_size);
    store_fixed_string(b, o::id, 16, h.id);
    store_fixed_string(b, o::reference_id, 16, h.reference_id);
    store_le(b, o::pid, h.pid);
    store_fixed_string(b, o::patient_id, 21, h.patient_id);
    store_le(b, o::dob, h.dob);
    store_le(b, o::vid, h.vid);
    store_fixed_string(b, o::visit_id, 24, h.visit_id);
    store_le(b, o::visit_date, h.visit_date);
    store_le(b, o::grid_type, h.grid_type);
    store_le(b, o::grid_offset, h.grid_offset);
    return out;
}

inline VolData parse_vol_raw(std::span<const std::byte> bytes)
{
    VolData data;
    data.header = read_vol_header(bytes);
    const auto& h = data.header;
    if (h.size_x <= 0 || h.size_z <= 0 || h.num_bscans <= 0)
        throw Error(ErrorCode::InconsistentHeader, "non-positive .vol dimensions");
    if (h.size_x_slo < 0 || h.size_y_slo < 0 || h.bscan_hdr_size < 0)
        throw Error(ErrorCode::InconsistentHeader, "negative SLO size or B-scan header size");

    const auto slo = static_cast<std::uint64_t>(h.size_x_slo) * static_cast<std::uint64_t>(h.size_y_slo);
    const auto pixels = static_cast<std::uint64_t>(h.size_x) * static_cast<std::uint64_t>(h.size_z);
    const auto per_bscan = static_cast<std::uint64_t>(h.bscan_hdr_size) + 4 * pixels;
    const auto needed = kVolHeaderSize + slo + static_cast<std::uint64_t>(h.num_bscans) * per_bscan;
    if (needed > bytes.size())
        throw Error(ErrorCode::TruncatedFile, "declared sizes need " + std::to_string(needed) + " bytes, stream has "
                                                  + std::to_string(bytes.size()));

    std::size_t pos = kVolHeaderSize + slo;
    data.raw.resize(static_cast<std::size_t>(h.num_bscans));
    for (auto& slice : data.raw) {
        pos += static_cast<std::size_t>(h.bscan_hdr_size);
        slice.resize(pixels);
        for (std::size_t i = 0; i < pixels; ++i, pos += 4)
            slice[i] = load_le<float>(bytes, pos);
    }
    return data;
}

inline Volume to_volume(const VolData& data)
{
    const auto& h = data.header;
    if (!(h.scale_x > 0) || !(h.scale_z > 0))
        throw Error(ErrorCode::InconsistentHeader, "non-positive .vol scale");
    Volume v;
    v.id = h.id.empty() ? "vol" : h.id;
    v.scan_kind = h.scan_pattern == kVolCirclePattern ? ScanKind::Circumpapillary : ScanKind::Macular;
    v.scale_x_mm = h.scale_x;
    v.scale_z_mm = h.scale_z;
    // Single-scan acquisitions often leave Distance at zero.
    v.spacing_y_mm = h.distance > 0 ? h.distance : 1.0;
    v.eye = h.scan_position == "OD" ? Eye::OD : h.scan_position == "OS" ? Eye::OS : Eye::Unknown;
    for (std::size_t i = 0; i < data.raw.size(); ++i) {
        BScan b{GrayImage(h.size_x, h.size_z), static_cast<int>(i)};
        std::transform(data.raw[i].begin(), data.raw[i].end(), b.pixels.pixels().begin(), vol_display_value);
        v.bscans.push_back(std::move(b));
    }
    validate(v);
    return v;
}

inline Volume parse_vol(std::span<const std::byte> bytes)
{
    return to_volume(parse_vol_raw(bytes));
}

inline std::vector<std::byte> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::byte> bytes;
    in.seekg(0, std::ios::end);
    bytes.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    return bytes;
}

inline Volume load_vol(const std::filesystem::path& path)
{
    auto bytes = read_file_bytes(path);
    return parse_vol(bytes);
}

} // namespace lwoct::io
