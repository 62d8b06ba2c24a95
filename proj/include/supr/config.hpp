#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "supr/tomo.hpp"

namespace supr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything one experiment needs, read from a flat `key = value` file.
/// Unknown keys are rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    std::string name = "run";

    // phantom
    std::string phantom = "desk";  // desk | disk | empty
    double extent = 18.24;         // cm
    std::size_t side = 64;
    std::size_t subsample = 11;

    // scan geometry
    std::size_t views = 15;
    double angular_increment = 12.0;  // degrees
    std::size_t rays_per_view = 96;
    double ray_spacing = 0.19;  // cm
    std::size_t detector_subrays = 11;

    // noise
    std::string noise = "poisson";  // poisson | none
    long long photons_per_ray = 2000000;
    double scatter_fraction = 0.05;
    std::uint64_t seed = 42;

    // reconstruction
    std::string algorithm = "R";  // R | ART | SIRT
    bool apply_nonneg = true;
    std::string view_order = "efficient";  // efficient | sequential
    std::string superiorize = "standard";  // none | standard | interleaved
    std::size_t steering_steps = 20;       // N
    double gamma_ratio = 0.99995;          // a
    double epsilon = 0.33;
    std::size_t max_iterations = 100000;

    // display
    double window_low = 0.204;
    double window_high = 0.21675;

    void validate() const {
        auto need = [](bool ok, const std::string& what) {
            if (!ok) throw ConfigError("config: " + what);
        };
        need(phantom == "desk" || phantom == "disk" || phantom == "empty",
             "phantom must be desk, disk or empty");
        need(extent > 0.0, "extent must be positive");
        need(side >= 2, "side must be >= 2");
        need(subsample >= 1, "subsample must be >= 1");
        need(views >= 1, "views must be >= 1");
        need(rays_per_view >= 1, "rays_per_view must be >= 1");
        need(ray_spacing > 0.0, "ray_spacing must be positive");
        need(detector_subrays >= 1, "detector_subrays must be >= 1");
        need(noise == "poisson" || noise == "none", "noise must be poisson or none");
        need(photons_per_ray >= 1, "photons_per_ray must be >= 1");
        need(scatter_fraction >= 0.0 && scatter_fraction < 1.0, "scatter_fraction must lie in [0, 1)");
        need(algorithm == "R" || algorithm == "ART" || algorithm == "SIRT",
             "algorithm must be R, ART or SIRT");
        need(view_order == "efficient" || view_order == "sequential",
             "view_order must be efficient or sequential");
        need(superiorize == "none" || superiorize == "standard" || superiorize == "interleaved",
             "superiorize must be none, standard or interleaved");
        need(steering_steps >= 1, "N must be >= 1");
        need(gamma_ratio > 0.0 && gamma_ratio < 1.0, "a must lie in (0, 1)");
        need(epsilon >= 0.0, "epsilon must be nonnegative");
        need(max_iterations >= 1, "max_iterations must be >= 1");
        need(window_low < window_high, "window low must be < high");
    }

    Phantom make_phantom() const {
        if (phantom == "desk") return desk_phantom(extent);
        if (phantom == "disk") return uniform_disk_phantom(0.210, 0.4 * extent, extent);
        return Phantom{{}, extent};  // empty
    }

    ScanGeometry make_geometry() const {
        return {views, angular_increment, rays_per_view, ray_spacing, detector_subrays};
    }

    ImageGrid make_grid() const { return {side, extent / static_cast<double>(side)}; }

    NoiseModel make_noise() const {
        NoiseModel n;
        n.noiseless = (noise == "none");
        n.photons_per_ray = photons_per_ray;
        n.scatter_fraction = scatter_fraction;
        n.seed = seed;
        return n;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

}  // namespace detail

/// Applies one `key = value` assignment. Shared by the file parser and the
/// CLI's --set overrides.
inline void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    auto as_double = [&] {
        try {
            return std::stod(value);
        } catch (const std::exception&) {
            throw ConfigError("config: bad number for " + key + ": '" + value + "'");
        }
    };
    auto as_size = [&]() -> std::size_t {
        try {
            const long long v = std::stoll(value);
            if (v < 0) throw ConfigError("config: " + key + " must be nonnegative");
            return static_cast<std::size_t>(v);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
        }
    };

    if (key == "name") config.name = value;
    else if (key == "phantom") config.phantom = value;
    else if (key == "extent") config.extent = as_double();
    else if (key == "side") config.side = as_size();
    else if (key == "subsample") config.subsample = as_size();
    else if (key == "views") config.views = as_size();
    else if (key == "angular_increment") config.angular_increment = as_double();
    else if (key == "rays_per_view") config.rays_per_view = as_size();
    else if (key == "ray_spacing") config.ray_spacing = as_double();
    else if (key == "detector_subrays") config.detector_subrays = as_size();
    else if (key == "noise") config.noise = value;
    else if (key == "photons_per_ray") config.photons_per_ray = static_cast<long long>(as_size());
    else if (key == "scatter_fraction") config.scatter_fraction = as_double();
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "algorithm") config.algorithm = value;
    else if (key == "apply_nonneg") config.apply_nonneg = detail::parse_bool(value, key);
    else if (key == "view_order") config.view_order = value;
    else if (key == "superiorize") config.superiorize = value;
    else if (key == "N") config.steering_steps = as_size();
    else if (key == "a") config.gamma_ratio = as_double();
    else if (key == "epsilon") config.epsilon = as_double();
    else if (key == "max_iterations") config.max_iterations = as_size();
    else if (key == "window_low") config.window_low = as_double();
    else if (key == "window_high") config.window_high = as_double();
    else throw ConfigError("config: unknown key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, const std::string& origin = "<stream>") {
    RunConfig config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                              ": empty key or value");
        apply_config_entry(config, key, value);
    }
    return config;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return parse_config(in, path);
}

}  // namespace supr
