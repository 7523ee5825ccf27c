#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lwoct {

/// Dense row-major 2-D grid. Column index x in [0, width), row index y in [0, height).
template <typename T>
class Image {
public:
    using value_type = T;

    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill)
    {
        assert(width >= 0 && height >= 0);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }

    std::span<T> row(int y) noexcept { return std::span<T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_)); }
    std::span<const T> row(int y) const noexcept
    {
        return std::span<const T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
    }

    bool same_shape(const auto& other) const noexcept { return width_ == other.width() && height_ == other.height(); }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        assert(contains(x, y));
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using GrayImage = Image<double>;
using BinaryImage = Image<std::uint8_t>;

struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

inline std::size_t count_set(const BinaryImage& mask) noexcept
{
    std::size_t n = 0;
    for (auto v : mask.pixels())
        n += v != 0 ? 1 : 0;
    return n;
}

} // namespace lwoct
