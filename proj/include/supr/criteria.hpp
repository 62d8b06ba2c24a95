#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "supr/vec.hpp"

namespace supr {

/// Optimization criterion phi: smaller is superior.
using Criterion = std::function<double(const Point&)>;

/// Returns a direction d with ||d|| <= 1 along which phi does not increase
/// for sufficiently small steps from the given point.
using NonascendingProvider = std::function<Point(const Point&)>;

/// A J-vector interpreted as a row-major square pixel grid (row 0 on top).
struct PixelImage {
    Point values;
    std::size_t side = 0;
    double pixel_size = 1.0;  // cm

    PixelImage() = default;
    PixelImage(Point v, std::size_t n, double pix = 1.0)
        : values(std::move(v)), side(n), pixel_size(pix) {
        if (values.size() != side * side)
            throw std::invalid_argument("PixelImage: values length must be side^2");
    }

    static PixelImage zero(std::size_t n, double pix = 1.0) {
        return {Point(n * n, 0.0), n, pix};
    }

    std::size_t dimension() const { return values.size(); }
    double& at(std::size_t row, std::size_t col) { return values[row * side + col]; }
    double at(std::size_t row, std::size_t col) const { return values[row * side + col]; }
};

/// Total variation: the sum, over pixels outside the rightmost column and
/// bottom row, of the local gradient magnitude
///   sqrt((x_j - x_right)^2 + (x_j - x_below)^2).
/// Grids with side < 2 have no such pixels and get TV = 0.
inline double tv(const PixelImage& image) {
    const std::size_t n = image.side;
    if (n < 2) return 0.0;
    const Point& x = image.values;
    double total = 0.0;
    for (std::size_t r = 0; r + 1 < n; ++r) {
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const std::size_t j = r * n + c;
            const double dr = x[j] - x[j + 1];
            const double db = x[j] - x[j + n];
            total += std::sqrt(dr * dr + db * db);
        }
    }
    return total;
}

inline double tv(const Point& values, std::size_t side) {
    return tv(PixelImage{values, side, 1.0});
}

/// Criterion adapter for a vector living on an n-by-n grid.
inline Criterion tv_criterion(std::size_t side) {
    return [side](const Point& x) { return tv(x, side); };
}

inline Point normalized_descent_direction(const Point& g) {
    const double n = norm(g);
    if (n == 0.0) return Point(g.size(), 0.0);
    Point d(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) d[j] = -g[j] / n;
    return d;
}

/// Direction from a vector g whose nonzero components equal existing partial
/// derivatives of a convex phi: zero when ||g|| = 0, else -g/||g||. Such a d
/// never increases phi for small enough steps.
inline Point theorem2_direction(const Point& g) { return normalized_descent_direction(g); }

/// Same construction driven by per-coordinate partial derivatives that may be
/// individually unavailable; unavailable coordinates contribute zero.
inline Point theorem2_nonascending(const std::function<std::optional<double>(std::size_t)>& partial,
                                   std::size_t dimension) {
    Point g(dimension, 0.0);
    for (std::size_t j = 0; j < dimension; ++j) g[j] = partial(j).value_or(0.0);
    return theorem2_direction(g);
}

/// Normalized negative subgradient. Kept only for reproducing comparisons
/// with older work; unlike theorem2_direction it is not guaranteed to be
/// nonascending at points where phi is not differentiable.
inline Point subgradient_legacy_direction(const Point& subgradient) {
    return normalized_descent_direction(subgradient);
}

namespace detail {

// The three TV terms a coordinate can appear in: its own term (when the pixel
// is outside the last row/column), the term of the pixel to its left, and the
// term of the pixel above.
struct TvTermRefs {
    bool has_own, has_left, has_above;
    double own, left, above;      // term values (the derivative denominators)
    double d_own, d_left, d_above;  // partial derivatives of those terms
};

inline TvTermRefs tv_terms_at(const PixelImage& image, std::size_t row, std::size_t col) {
    const std::size_t n = image.side;
    const Point& x = image.values;
    TvTermRefs t{};

    const bool in_c = (row + 1 < n) && (col + 1 < n);
    if (in_c) {
        const std::size_t j = row * n + col;
        const double dr = x[j] - x[j + 1];
        const double db = x[j] - x[j + n];
        t.has_own = true;
        t.own = std::sqrt(dr * dr + db * db);
        t.d_own = t.own > 0.0 ? (dr + db) / t.own : 0.0;
    }
    if (col >= 1 && row + 1 < n) {  // pixel to the left is in C and sees us as its right neighbor
        const std::size_t j = row * n + (col - 1);
        const double dr = x[j] - x[j + 1];
        const double db = x[j] - x[j + n];
        t.has_left = true;
        t.left = std::sqrt(dr * dr + db * db);
        t.d_left = t.left > 0.0 ? -dr / t.left : 0.0;
    }
    if (row >= 1 && col + 1 < n) {  // pixel above is in C and sees us as its below neighbor
        const std::size_t j = (row - 1) * n + col;
        const double dr = x[j] - x[j + 1];
        const double db = x[j] - x[j + n];
        t.has_above = true;
        t.above = std::sqrt(dr * dr + db * db);
        t.d_above = t.above > 0.0 ? -db / t.above : 0.0;
    }
    return t;
}

}  // namespace detail

/// Per-coordinate TV gradient with the guard that makes theorem2_direction
/// applicable: a coordinate whose value appears in any term with magnitude
/// below `threshold` (where the formal partial derivative blows up) is zeroed
/// outright. Terms absent for border pixels do not block the coordinate.
inline Point tv_guarded_gradient(const PixelImage& image, double threshold = 1e-20) {
    const std::size_t n = image.side;
    Point g(image.dimension(), 0.0);
    if (n < 2) return g;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const detail::TvTermRefs t = detail::tv_terms_at(image, r, c);
            if ((t.has_own && t.own < threshold) || (t.has_left && t.left < threshold) ||
                (t.has_above && t.above < threshold))
                continue;  // g stays zero for this coordinate
            double v = 0.0;
            if (t.has_own) v += t.d_own;
            if (t.has_left) v += t.d_left;
            if (t.has_above) v += t.d_above;
            g[r * n + c] = v;
        }
    }
    return g;
}

/// Nonascending vector for TV: guarded partial derivatives fed through the
/// theorem2 construction.
inline Point tv_nonascending(const PixelImage& image, double threshold = 1e-20) {
    return theorem2_direction(tv_guarded_gradient(image, threshold));
}

/// A subgradient of TV: each term with magnitude >= threshold contributes its
/// formal derivative, degenerate terms contribute zero. No whole-coordinate
/// guard, so the normalized negative of this vector is the legacy direction
/// choice that is not guaranteed nonascending.
inline Point tv_subgradient(const PixelImage& image, double threshold = 1e-20) {
    const std::size_t n = image.side;
    Point g(image.dimension(), 0.0);
    if (n < 2) return g;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const detail::TvTermRefs t = detail::tv_terms_at(image, r, c);
            double v = 0.0;
            if (t.has_own && t.own >= threshold) v += t.d_own;
            if (t.has_left && t.left >= threshold) v += t.d_left;
            if (t.has_above && t.above >= threshold) v += t.d_above;
            g[r * n + c] = v;
        }
    }
    return g;
}

/// Provider adapters for an n-by-n grid.
inline NonascendingProvider tv_nonascending_provider(std::size_t side, double threshold = 1e-20) {
    return [side, threshold](const Point& x) {
        return tv_nonascending(PixelImage{x, side, 1.0}, threshold);
    };
}

inline NonascendingProvider tv_legacy_provider(std::size_t side, double threshold = 1e-20) {
    return [side, threshold](const Point& x) {
        return subgradient_legacy_direction(tv_subgradient(PixelImage{x, side, 1.0}, threshold));
    };
}

/// Always-valid fallback: the zero vector is nonascending for every phi.
inline NonascendingProvider zero_provider() {
    return [](const Point& x) { return Point(x.size(), 0.0); };
}

}  // namespace supr
