#pragma once

#include "lwoct/error.hpp"
#include "lwoct/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace lwoct::io {

using RgbImage = Image<std::array<std::uint8_t, 3>>;

inline std::uint8_t quantize8(double v) noexcept
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// Reads any PNG as grayscale scaled to [0,1]. 16-bit sources keep their precision.
inline GrayImage read_png_gray(const std::filesystem::path& path)
{
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw Error(ErrorCode::IoFailure, path.string() + ": " + img.message);
    const bool wide = (img.format & PNG_FORMAT_FLAG_LINEAR) != 0;
    img.format = wide ? PNG_FORMAT_LINEAR_Y : PNG_FORMAT_GRAY;
    const int w = static_cast<int>(img.width), h = static_cast<int>(img.height);
    GrayImage out(w, h);
    if (wide) {
        std::vector<std::uint16_t> buf(PNG_IMAGE_SIZE(img) / 2);
        if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr))
            throw Error(ErrorCode::IoFailure, path.string() + ": " + img.message);
        for (std::size_t i = 0; i < buf.size(); ++i)
            out.pixels()[i] = buf[i] / 65535.0;
    } else {
        std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
        if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr))
            throw Error(ErrorCode::IoFailure, path.string() + ": " + img.message);
        for (std::size_t i = 0; i < buf.size(); ++i)
            out.pixels()[i] = buf[i] / 255.0;
    }
    return out;
}

namespace detail {

inline std::vector<std::uint8_t> to_gray8(const GrayImage& g)
{
    std::vector<std::uint8_t> buf(g.size());
    std::transform(g.pixels().begin(), g.pixels().end(), buf.begin(), quantize8);
    return buf;
}

inline png_image describe(int w, int h, png_uint_32 format)
{
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = format;
    return img;
}

} // namespace detail

inline void write_png_gray8(const std::filesystem::path& path, const GrayImage& g)
{
    auto buf = detail::to_gray8(g);
    auto img = detail::describe(g.width(), g.height(), PNG_FORMAT_GRAY);
    if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, path.string() + ": " + img.message);
}

inline void write_png_gray16(const std::filesystem::path& path, const GrayImage& g)
{
    std::vector<std::uint16_t> buf(g.size());
    std::transform(g.pixels().begin(), g.pixels().end(), buf.begin(), [](double v) {
        return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
    });
    auto img = detail::describe(g.width(), g.height(), PNG_FORMAT_LINEAR_Y);
    if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, path.string() + ": " + img.message);
}

inline void write_png_rgb8(const std::filesystem::path& path, const RgbImage& rgb)
{
    std::vector<std::uint8_t> buf(rgb.size() * 3);
    for (std::size_t i = 0; i < rgb.size(); ++i)
        std::copy(rgb.pixels()[i].begin(), rgb.pixels()[i].end(), buf.begin() + static_cast<std::ptrdiff_t>(3 * i));
    auto img = detail::describe(rgb.width(), rgb.height(), PNG_FORMAT_RGB);
    if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, path.string() + ": " + img.message);
}

/// 8-bit grayscale PNG in memory.
inline std::vector<std::uint8_t> encode_png_gray8(const GrayImage& g)
{
    auto buf = detail::to_gray8(g);
    auto img = detail::describe(g.width(), g.height(), PNG_FORMAT_GRAY);
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, std::string("png encode: ") + img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, std::string("png encode: ") + img.message);
    out.resize(size);
    return out;
}

inline GrayImage decode_png_gray(const std::vector<std::uint8_t>& bytes)
{
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw Error(ErrorCode::IoFailure, std::string("png decode: ") + img.message);
    img.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr))
        throw Error(ErrorCode::IoFailure, std::string("png decode: ") + img.message);
    GrayImage out(static_cast<int>(img.width), static_cast<int>(img.height));
    for (std::size_t i = 0; i < buf.size(); ++i)
        out.pixels()[i] = buf[i] / 255.0;
    return out;
}

} // namespace lwoct::io
