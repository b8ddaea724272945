#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bbrcool {

// Natural cubic spline through tabulated (x, y) points. Abscissae must be
// strictly increasing; evaluation outside the table extrapolates with the
// end cubic.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::span<const double> x, std::span<const double> y)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
        const std::size_t n = x_.size();
        if (n != y_.size()) throw std::invalid_argument("spline: x and y differ in length");
        if (n < 2) throw std::invalid_argument("spline: need at least two points");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline: abscissae must be strictly increasing");
        if (n == 2) return;

        // Tridiagonal solve for second derivatives, m_0 = m_{n-1} = 0.
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            const double a = h0 / 6.0;
            const double b = (h0 + h1) / 3.0;
            const double cc = h1 / 6.0;
            const double r = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
            const double denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (r - a * d[i - 1]) / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
        }
    }

    double operator()(double x) const {
        const std::size_t n = x_.size();
        std::size_t hi = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        hi = std::clamp<std::size_t>(hi, 1, n - 1);
        const std::size_t lo = hi - 1;
        const double h = x_[hi] - x_[lo];
        const double a = (x_[hi] - x) / h;
        const double b = (x - x_[lo]) / h;
        return a * y_[lo] + b * y_[hi] + ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_, y_, m_;
};

}  // namespace bbrcool
