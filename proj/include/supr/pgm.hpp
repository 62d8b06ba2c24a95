#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "supr/criteria.hpp"

namespace supr {

/// Linear grayscale window: `low` and below map to 0, `high` and above to
/// 255, values between round half-up. Output is binary PGM (P5), row-major
/// with row 0 on top.
inline void write_image(const PixelImage& image, double low, double high, std::ostream& out) {
    if (!(low < high)) throw std::invalid_argument("write_image: window low must be < high");
    out << "P5\n" << image.side << ' ' << image.side << "\n255\n";
    const double scale = 255.0 / (high - low);
    for (double v : image.values) {
        double t = (v - low) * scale;
        t = std::floor(t + 0.5);
        if (t < 0.0) t = 0.0;
        if (t > 255.0) t = 255.0;
        const unsigned char byte = static_cast<unsigned char>(t);
        out.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

inline void write_image(const PixelImage& image, double low, double high, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_image: cannot open " + path);
    write_image(image, low, high, out);
    if (!out) throw std::runtime_error("write_image: write failed for " + path);
}

}  // namespace supr
