#pragma once

#include "lwoct/error.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace lwoct {

/// Natural cubic spline (zero second derivative at both ends) through strictly increasing knots.
/// Outside the knot span the end values are held constant.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> xs, std::vector<double> ys) : x_(std::move(xs)), y_(std::move(ys))
    {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw Error(ErrorCode::TooFewClicks, "spline needs at least two knots");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw Error(ErrorCode::InvalidArgument, "spline knots must be strictly increasing");

        m_.assign(n, 0.0);
        if (n < 3)
            return;
        // Tridiagonal system for the interior second derivatives (Thomas algorithm).
        const std::size_t k = n - 2;
        std::vector<double> diag(k), upper(k), rhs(k);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < k; ++i) {
            const double lower = x_[i + 1] - x_[i]; // h_{i} multiplies M_{i} in row i
            const double f = lower / diag[i - 1];
            diag[i] -= f * upper[i - 1];
            rhs[i] -= f * rhs[i - 1];
        }
        m_[k] = rhs[k - 1] / diag[k - 1];
        for (std::size_t i = k - 1; i >= 1; --i)
            m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
    }

    double operator()(double x) const noexcept
    {
        if (x <= x_.front())
            return y_.front();
        if (x >= x_.back())
            return y_.back();
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    std::span<const double> second_derivatives() const noexcept { return m_; }

private:
    std::vector<double> x_, y_, m_;
};

} // namespace lwoct
