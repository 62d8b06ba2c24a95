#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace supr {

/// Points in R^J are plain vectors of 64-bit reals.
using Point = std::vector<double>;

inline void require_same_size(const Point& x, const Point& y, const char* where) {
    if (x.size() != y.size()) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()) + ")");
    }
}

inline double dot(const Point& x, const Point& y) {
    require_same_size(x, y, "dot");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
    return s;
}

inline double norm_sq(const Point& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double norm(const Point& x) { return std::sqrt(norm_sq(x)); }

inline double distance(const Point& x, const Point& y) {
    require_same_size(x, y, "distance");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        s += d * d;
    }
    return std::sqrt(s);
}

/// y := y + alpha * x
inline void axpy(double alpha, const Point& x, Point& y) {
    require_same_size(x, y, "axpy");
    for (std::size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

inline Point add_scaled(const Point& x, double alpha, const Point& v) {
    require_same_size(x, v, "add_scaled");
    Point z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = x[j] + alpha * v[j];
    return z;
}

inline double max_abs_diff(const Point& x, const Point& y) {
    require_same_size(x, y, "max_abs_diff");
    double m = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) m = std::max(m, std::abs(x[j] - y[j]));
    return m;
}

}  // namespace supr
