#pragma once

#include "lwoct/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace lwoct {

/// Twice the signed shoelace area of a closed pixel loop (vertices at pixel centres).
inline long long polygon_area2(std::span<const Pixel> loop) noexcept
{
    long long acc = 0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Pixel& p = loop[i];
        const Pixel& q = loop[(i + 1) % n];
        acc += static_cast<long long>(p.x) * q.y - static_cast<long long>(q.x) * p.y;
    }
    return acc;
}

/// Even-odd scanline fill of the polygon through the loop's pixel centres, plus the loop pixels
/// themselves. A pixel centre (x, y) is interior when a ray towards +x crosses the outline an odd
/// number of times (edges use the half-open rule on y).
inline BinaryImage rasterize_loop(std::span<const Pixel> loop, int width, int height)
{
    BinaryImage mask(width, height, 0);
    const std::size_t n = loop.size();
    std::vector<double> xs;
    for (int y = 0; y < height; ++y) {
        xs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const Pixel& p = loop[i];
            const Pixel& q = loop[(i + 1) % n];
            if ((p.y > y) != (q.y > y))
                xs.push_back(p.x + static_cast<double>(y - p.y) * (q.x - p.x) / static_cast<double>(q.y - p.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int from = std::max(0, static_cast<int>(std::ceil(xs[k])));
            const int to = std::min(width, static_cast<int>(std::ceil(xs[k + 1])));
            for (int x = from; x < to; ++x)
                mask(x, y) = 1;
        }
    }
    for (const Pixel& p : loop)
        if (mask.contains(p.x, p.y))
            mask(p.x, p.y) = 1;
    return mask;
}

} // namespace lwoct
