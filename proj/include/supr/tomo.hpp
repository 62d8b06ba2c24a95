#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "supr/criteria.hpp"
#include "supr/linear.hpp"
#include "supr/rng.hpp"
#include "supr/vec.hpp"

namespace supr {

// --- phantom -----------------------------------------------------------------

struct Ellipse {
    double cx = 0.0, cy = 0.0;
    double rx = 1.0, ry = 1.0;
    double angle_deg = 0.0;
    double value = 0.0;  // additive attenuation, 1/cm
};

struct Rectangle {
    double cx = 0.0, cy = 0.0;
    double half_w = 1.0, half_h = 1.0;
    double value = 0.0;
};

using Shape = std::variant<Ellipse, Rectangle>;

inline double shape_value(const Shape& s) {
    return std::visit([](const auto& g) { return g.value; }, s);
}

/// Piecewise-constant test object: the attenuation at a point is the sum of
/// the values of all shapes containing it, so nested shapes layer additively.
struct Phantom {
    std::vector<Shape> shapes;
    double extent = 1.0;  // side length of the square support, cm

    double value_at(double x, double y) const {
        double v = 0.0;
        for (const Shape& s : shapes) {
            if (const Ellipse* e = std::get_if<Ellipse>(&s)) {
                const double rad = e->angle_deg * 0.017453292519943295;
                const double ca = std::cos(rad), sa = std::sin(rad);
                const double dx = x - e->cx, dy = y - e->cy;
                const double u = (dx * ca + dy * sa) / e->rx;
                const double w = (-dx * sa + dy * ca) / e->ry;
                if (u * u + w * w <= 1.0) v += e->value;
            } else {
                const Rectangle& r = std::get<Rectangle>(s);
                if (std::abs(x - r.cx) <= r.half_w && std::abs(y - r.cy) <= r.half_h) v += r.value;
            }
        }
        return v;
    }
};

// --- scan geometry -----------------------------------------------------------

/// Parallel-beam scan: `views` directions at `angular_increment_deg` steps,
/// each with `rays_per_view` equally spaced parallel lines centered on the
/// origin. For view v and in-view ray r, the line is
///   p(s) = t * (cos th, sin th) + s * (-sin th, cos th)
/// with th = v * increment and t = (r - (rays_per_view - 1)/2) * ray_spacing.
struct ScanGeometry {
    std::size_t views = 1;
    double angular_increment_deg = 0.0;
    std::size_t rays_per_view = 1;
    double ray_spacing = 1.0;          // cm between detector lines
    std::size_t detector_subrays = 1;  // sub-lines averaged per detector

    std::size_t total_rays() const { return views * rays_per_view; }

    struct Line {
        double px, py;  // a point on the line
        double ux, uy;  // unit direction
    };

    Line line_for(std::size_t view, std::size_t ray, double detector_offset = 0.0) const {
        if (view >= views || ray >= rays_per_view)
            throw std::invalid_argument("ScanGeometry: ray index out of range");
        const double theta = static_cast<double>(view) * angular_increment_deg * 0.017453292519943295;
        const double t = (static_cast<double>(ray) - 0.5 * static_cast<double>(rays_per_view - 1)) *
                             ray_spacing +
                         detector_offset;
        const double c = std::cos(theta), s = std::sin(theta);
        return {t * c, t * s, -s, c};
    }
};

struct ImageGrid {
    std::size_t side = 1;
    double pixel_size = 1.0;  // cm

    double extent() const { return static_cast<double>(side) * pixel_size; }
};

// --- rasterization -----------------------------------------------------------

/// Pixel values are means over subsample^2 point evaluations of the phantom,
/// so shape boundaries land at the covered-area fraction. Row 0 is the top of
/// the image (largest y).
inline PixelImage rasterize_phantom(const Phantom& phantom, std::size_t side, std::size_t subsample) {
    if (side < 2) throw std::invalid_argument("rasterize_phantom: side must be >= 2");
    if (subsample < 1) throw std::invalid_argument("rasterize_phantom: subsample must be >= 1");
    const double h = phantom.extent / static_cast<double>(side);
    const double x0 = -0.5 * phantom.extent;
    const double y0 = -0.5 * phantom.extent;
    PixelImage image = PixelImage::zero(side, h);
    const double inv = 1.0 / static_cast<double>(subsample);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            double sum = 0.0;
            for (std::size_t a = 0; a < subsample; ++a) {
                for (std::size_t b = 0; b < subsample; ++b) {
                    const double x = x0 + (static_cast<double>(c) + (a + 0.5) * inv) * h;
                    const double y = y0 + (static_cast<double>(side - 1 - r) + (b + 0.5) * inv) * h;
                    sum += phantom.value_at(x, y);
                }
            }
            image.at(r, c) = sum * inv * inv;
        }
    }
    return image;
}

// --- system matrix rows (ray tracing) ----------------------------------------

namespace detail {

struct LineClip {
    bool hits = false;
    double s_lo = 0.0, s_hi = 0.0;
};

inline LineClip clip_to_square(const ScanGeometry::Line& line, double half) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const double p[2] = {line.px, line.py};
    const double u[2] = {line.ux, line.uy};
    for (int axis = 0; axis < 2; ++axis) {
        if (std::abs(u[axis]) < 1e-15) {
            if (p[axis] < -half || p[axis] > half) return {};
        } else {
            double a = (-half - p[axis]) / u[axis];
            double b = (half - p[axis]) / u[axis];
            if (a > b) std::swap(a, b);
            lo = std::max(lo, a);
            hi = std::min(hi, b);
        }
    }
    if (hi <= lo) return {};
    return {true, lo, hi};
}

}  // namespace detail

/// Intersection lengths (cm) of one scan line with every pixel of the grid.
/// Segments are binned by their midpoints; a midpoint landing exactly on a
/// column boundary (a ray riding a pixel edge) is assigned to the lower pixel
/// index.
inline std::vector<LinearEquation::Entry> system_row(const ScanGeometry& geometry,
                                                     const ImageGrid& grid, std::size_t ray_index) {
    const std::size_t view = ray_index / geometry.rays_per_view;
    const std::size_t ray = ray_index % geometry.rays_per_view;
    const ScanGeometry::Line line = geometry.line_for(view, ray);
    const std::size_t n = grid.side;
    const double h = grid.pixel_size;
    const double half = 0.5 * grid.extent();

    const detail::LineClip clip = detail::clip_to_square(line, half);
    if (!clip.hits) return {};

    std::vector<double> crossings;
    crossings.reserve(2 * n + 4);
    crossings.push_back(clip.s_lo);
    crossings.push_back(clip.s_hi);
    const double p[2] = {line.px, line.py};
    const double u[2] = {line.ux, line.uy};
    for (int axis = 0; axis < 2; ++axis) {
        if (std::abs(u[axis]) < 1e-15) continue;
        for (std::size_t g = 1; g < n; ++g) {
            const double coord = -half + static_cast<double>(g) * h;
            const double s = (coord - p[axis]) / u[axis];
            if (s > clip.s_lo && s < clip.s_hi) crossings.push_back(s);
        }
    }
    std::sort(crossings.begin(), crossings.end());

    std::vector<double> lengths(n * n, 0.0);
    for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
        const double len = crossings[i + 1] - crossings[i];
        if (len <= 1e-14) continue;  // corner grazing contributes nothing
        const double sm = crossings[i] + 0.5 * len;
        const double mx = line.px + sm * line.ux;
        const double my = line.py + sm * line.uy;
        double fc = (mx + half) / h;
        double fr = (my + half) / h;
        long long c = static_cast<long long>(std::floor(fc));
        long long rb = static_cast<long long>(std::floor(fr));
        if (fc == std::floor(fc) && c > 0) --c;  // edge-riding ray: lower column index
        c = std::clamp<long long>(c, 0, static_cast<long long>(n) - 1);
        rb = std::clamp<long long>(rb, 0, static_cast<long long>(n) - 1);
        const std::size_t row = n - 1 - static_cast<std::size_t>(rb);
        lengths[row * n + static_cast<std::size_t>(c)] += len;
    }

    std::vector<LinearEquation::Entry> entries;
    for (std::size_t j = 0; j < lengths.size(); ++j)
        if (lengths[j] > 0.0) entries.push_back({j, lengths[j]});
    return entries;
}

// --- analytic line integrals --------------------------------------------------

inline double chord_length(const Shape& shape, const ScanGeometry::Line& line) {
    if (const Ellipse* e = std::get_if<Ellipse>(&shape)) {
        const double rad = e->angle_deg * 0.017453292519943295;
        const double ca = std::cos(rad), sa = std::sin(rad);
        const double dx = line.px - e->cx, dy = line.py - e->cy;
        const double qx = (dx * ca + dy * sa) / e->rx;
        const double qy = (-dx * sa + dy * ca) / e->ry;
        const double wx = (line.ux * ca + line.uy * sa) / e->rx;
        const double wy = (-line.ux * sa + line.uy * ca) / e->ry;
        const double a = wx * wx + wy * wy;
        const double b = qx * wx + qy * wy;
        const double c = qx * qx + qy * qy - 1.0;
        const double disc = b * b - a * c;
        if (disc <= 0.0 || a <= 0.0) return 0.0;
        return 2.0 * std::sqrt(disc) / a;
    }
    const Rectangle& r = std::get<Rectangle>(shape);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const double p[2] = {line.px - r.cx, line.py - r.cy};
    const double u[2] = {line.ux, line.uy};
    const double e[2] = {r.half_w, r.half_h};
    for (int axis = 0; axis < 2; ++axis) {
        if (std::abs(u[axis]) < 1e-15) {
            if (p[axis] < -e[axis] || p[axis] > e[axis]) return 0.0;
        } else {
            double a = (-e[axis] - p[axis]) / u[axis];
            double b = (e[axis] - p[axis]) / u[axis];
            if (a > b) std::swap(a, b);
            lo = std::max(lo, a);
            hi = std::min(hi, b);
        }
    }
    return std::max(0.0, hi - lo);
}

/// Exact line integral of the phantom (not of any rasterized image).
inline double analytic_integral(const Phantom& phantom, const ScanGeometry::Line& line) {
    double total = 0.0;
    for (const Shape& s : phantom.shapes) total += shape_value(s) * chord_length(s, line);
    return total;
}

// --- projection data ----------------------------------------------------------

struct NoiseModel {
    bool noiseless = true;
    long long photons_per_ray = 2000000;
    double scatter_fraction = 0.0;  // in [0, 1)
    std::uint64_t seed = 0;
};

struct RayMeasurement {
    std::size_t view = 0;
    std::size_t ray = 0;
    double b = 0.0;  // estimated line integral
};

struct ProjectionData {
    ScanGeometry geometry;
    NoiseModel noise;
    std::vector<RayMeasurement> rays;
    std::size_t floored_rays = 0;  // rays whose photon count hit the floor of 1
};

/// Simulates one scan. Noiseless mode records the exact analytic integral
/// along each central ray. Noisy mode spreads detector_subrays sub-lines over
/// the detector width, draws Poisson photon counts per sub-line (seed mixed
/// per ray and sub-line, so generation order cannot change the data), moves
/// scatter_fraction of each detector's counts to its two neighbours (half
/// each; shares that would fall off the array stay put), and converts summed
/// counts back to line integrals. A detector observing zero photons is floored
/// to one count and counted in `floored_rays`.
inline ProjectionData simulate_projections(const Phantom& phantom, const ScanGeometry& geometry,
                                           const NoiseModel& noise) {
    if (!noise.noiseless) {
        if (noise.photons_per_ray < 1)
            throw std::invalid_argument("simulate_projections: photons_per_ray must be >= 1");
        if (noise.scatter_fraction < 0.0 || noise.scatter_fraction >= 1.0)
            throw std::invalid_argument("simulate_projections: scatter_fraction must lie in [0, 1)");
    }
    ProjectionData data;
    data.geometry = geometry;
    data.noise = noise;
    data.rays.reserve(geometry.total_rays());

    if (noise.noiseless) {
        for (std::size_t v = 0; v < geometry.views; ++v)
            for (std::size_t r = 0; r < geometry.rays_per_view; ++r)
                data.rays.push_back({v, r, analytic_integral(phantom, geometry.line_for(v, r))});
        return data;
    }

    const std::size_t subrays = std::max<std::size_t>(1, geometry.detector_subrays);
    const double emitted = static_cast<double>(noise.photons_per_ray);
    const double per_subray = emitted / static_cast<double>(subrays);
    const std::uint64_t base = mix64(noise.seed);

    for (std::size_t v = 0; v < geometry.views; ++v) {
        std::vector<double> counts(geometry.rays_per_view, 0.0);
        for (std::size_t r = 0; r < geometry.rays_per_view; ++r) {
            const std::size_t global = v * geometry.rays_per_view + r;
            for (std::size_t u = 0; u < subrays; ++u) {
                const double offset =
                    ((static_cast<double>(u) + 0.5) / static_cast<double>(subrays) - 0.5) *
                    geometry.ray_spacing;
                const double integral = analytic_integral(phantom, geometry.line_for(v, r, offset));
                const double expected = per_subray * std::exp(-integral);
                Rng rng(mix64(base + static_cast<std::uint64_t>(global) * subrays + u));
                counts[r] += static_cast<double>(rng.poisson(expected));
            }
        }
        if (noise.scatter_fraction > 0.0) {
            std::vector<double> scattered(counts.size(), 0.0);
            for (std::size_t r = 0; r < counts.size(); ++r) {
                const double out = noise.scatter_fraction * counts[r];
                const double half = 0.5 * out;
                scattered[r] -= out;
                if (r > 0)
                    scattered[r - 1] += half;
                else
                    scattered[r] += half;
                if (r + 1 < counts.size())
                    scattered[r + 1] += half;
                else
                    scattered[r] += half;
            }
            for (std::size_t r = 0; r < counts.size(); ++r) counts[r] += scattered[r];
        }
        for (std::size_t r = 0; r < counts.size(); ++r) {
            double c = counts[r];
            if (c < 1.0) {
                c = 1.0;
                ++data.floored_rays;
            }
            data.rays.push_back({v, r, -std::log(c / emitted)});
        }
    }
    if (data.floored_rays > 0)
        std::cerr << "simulate_projections: " << data.floored_rays
                  << " ray(s) observed zero photons; counts floored to 1\n";
    return data;
}

// --- problem assembly ----------------------------------------------------------

struct AssembledProblem {
    BlockLinearProblem problem;
    std::size_t dropped_rows = 0;  // rays that missed the grid entirely
};

/// One block per view, blocks arranged by `view_order`; each equation pairs a
/// traced system row with the measured integral. Rays that miss the grid are
/// dropped (their rows would be zero and the block step divides by row norms).
inline AssembledProblem assemble_problem(const ProjectionData& data, const ImageGrid& grid,
                                         const std::vector<std::size_t>& view_order) {
    const ScanGeometry& geometry = data.geometry;
    if (view_order.size() != geometry.views)
        throw std::invalid_argument("assemble_problem: view_order must list every view once");

    std::vector<std::vector<const RayMeasurement*>> by_view(geometry.views);
    for (const RayMeasurement& m : data.rays) {
        if (m.view >= geometry.views || m.ray >= geometry.rays_per_view)
            throw std::invalid_argument("assemble_problem: measurement indices out of range");
        by_view[m.view].push_back(&m);
    }

    const std::size_t dim = grid.side * grid.side;
    std::size_t dropped = 0;
    std::vector<EquationBlock> blocks;
    blocks.reserve(geometry.views);
    std::vector<bool> seen(geometry.views, false);
    for (std::size_t w : view_order) {
        if (w >= geometry.views || seen[w])
            throw std::invalid_argument("assemble_problem: view_order is not a permutation");
        seen[w] = true;
        EquationBlock block;
        for (const RayMeasurement* m : by_view[w]) {
            auto entries = system_row(geometry, grid, m->view * geometry.rays_per_view + m->ray);
            if (entries.empty()) {
                ++dropped;
                continue;
            }
            block.emplace_back(std::move(entries), m->b, dim);
        }
        if (!block.empty()) blocks.push_back(std::move(block));
    }
    if (blocks.empty()) throw std::runtime_error("assemble_problem: every ray missed the grid");
    return {BlockLinearProblem(dim, std::move(blocks)), dropped};
}

// --- projection data file format ------------------------------------------------
//
//   supr-proj 1
//   views <V>
//   angular_increment <deg>
//   rays_per_view <R>
//   ray_spacing <cm>
//   detector_subrays <S>
//   noise <poisson|none>
//   photons_per_ray <count>      (poisson only)
//   scatter_fraction <f>         (poisson only)
//   seed <u64>                   (poisson only)
//   floored_rays <count>
//   rays <total>
//   <view> <ray> <b>             (one line per ray)

inline void save_projections(const ProjectionData& data, std::ostream& out) {
    out << "supr-proj 1\n";
    out << "views " << data.geometry.views << '\n';
    out.precision(17);
    out << "angular_increment " << data.geometry.angular_increment_deg << '\n';
    out << "rays_per_view " << data.geometry.rays_per_view << '\n';
    out << "ray_spacing " << data.geometry.ray_spacing << '\n';
    out << "detector_subrays " << data.geometry.detector_subrays << '\n';
    if (data.noise.noiseless) {
        out << "noise none\n";
    } else {
        out << "noise poisson\n";
        out << "photons_per_ray " << data.noise.photons_per_ray << '\n';
        out << "scatter_fraction " << data.noise.scatter_fraction << '\n';
        out << "seed " << data.noise.seed << '\n';
    }
    out << "floored_rays " << data.floored_rays << '\n';
    out << "rays " << data.rays.size() << '\n';
    for (const RayMeasurement& m : data.rays) out << m.view << ' ' << m.ray << ' ' << m.b << '\n';
}

inline void save_projections(const ProjectionData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_projections: cannot open " + path);
    save_projections(data, out);
    if (!out) throw std::runtime_error("save_projections: write failed for " + path);
}

inline ProjectionData load_projections(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "supr-proj" || version != 1)
        throw std::runtime_error("load_projections: not a supr-proj v1 stream");
    ProjectionData data;
    std::string key;
    std::size_t ray_count = 0;
    while (in >> key) {
        if (key == "views") in >> data.geometry.views;
        else if (key == "angular_increment") in >> data.geometry.angular_increment_deg;
        else if (key == "rays_per_view") in >> data.geometry.rays_per_view;
        else if (key == "ray_spacing") in >> data.geometry.ray_spacing;
        else if (key == "detector_subrays") in >> data.geometry.detector_subrays;
        else if (key == "noise") {
            std::string mode;
            in >> mode;
            data.noise.noiseless = (mode == "none");
            if (mode != "none" && mode != "poisson")
                throw std::runtime_error("load_projections: unknown noise mode '" + mode + "'");
        } else if (key == "photons_per_ray") in >> data.noise.photons_per_ray;
        else if (key == "scatter_fraction") in >> data.noise.scatter_fraction;
        else if (key == "seed") in >> data.noise.seed;
        else if (key == "floored_rays") in >> data.floored_rays;
        else if (key == "rays") {
            in >> ray_count;
            break;
        } else {
            throw std::runtime_error("load_projections: unexpected key '" + key + "'");
        }
        if (!in) throw std::runtime_error("load_projections: malformed header");
    }
    data.rays.reserve(ray_count);
    for (std::size_t i = 0; i < ray_count; ++i) {
        RayMeasurement m;
        if (!(in >> m.view >> m.ray >> m.b))
            throw std::runtime_error("load_projections: truncated ray list");
        data.rays.push_back(m);
    }
    return data;
}

inline ProjectionData load_projections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_projections: cannot open " + path);
    return load_projections(in);
}

// --- built-in phantoms ------------------------------------------------------------

/// Desk-scale head-like phantom: an elliptical ring at bone attenuation, a
/// brain-level fill, two lower-attenuation ventricle ellipses and three small
/// +0.003 contrast disks. Values are linear attenuation coefficients per cm
/// at 60 keV.
inline Phantom desk_phantom(double extent = 18.24) {
    Phantom p;
    p.extent = extent;
    p.shapes = {
        Ellipse{0.0, 0.0, 8.6, 6.9, 0.0, 0.416},
        Ellipse{0.0, 0.0, 7.9, 6.2, 0.0, 0.210 - 0.416},
        Ellipse{-1.9, 1.1, 1.0, 2.3, -14.0, 0.207 - 0.210},
        Ellipse{1.9, 1.1, 1.0, 2.3, 14.0, 0.207 - 0.210},
        Ellipse{0.0, -2.7, 0.55, 0.55, 0.0, 0.003},
        Ellipse{2.9, -1.7, 0.40, 0.40, 0.0, 0.003},
        Ellipse{-3.1, -2.3, 0.30, 0.30, 0.0, 0.003},
    };
    return p;
}

inline Phantom uniform_disk_phantom(double value, double radius, double extent) {
    Phantom p;
    p.extent = extent;
    p.shapes = {Ellipse{0.0, 0.0, radius, radius, 0.0, value}};
    return p;
}

}  // namespace supr
