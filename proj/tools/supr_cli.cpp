// Command-line front end: simulate projection data, reconstruct with the
// plain / superiorized / interleaved pipelines, compare configurations and
// re-validate emitted traces.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "supr/supr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUndefined = 2;

supr::RunConfig load_with_overrides(const std::string& path,
                                    const std::vector<std::string>& overrides) {
    supr::RunConfig config = path.empty() ? supr::RunConfig{} : supr::load_config(path);
    for (const std::string& entry : overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw supr::ConfigError("--set expects key=value, got '" + entry + "'");
        supr::apply_config_entry(config, supr::detail::trim(entry.substr(0, eq)),
                                 supr::detail::trim(entry.substr(eq + 1)));
    }
    config.validate();
    return config;
}

void warn_if_large(const supr::RunConfig& config) {
    const std::size_t rays = config.views * config.rays_per_view;
    if (config.side >= 256 || rays >= 50000)
        std::cerr << "note: large configuration (side=" << config.side << ", rays=" << rays
                  << "); expect a long runtime\n";
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& data_path, const std::string& phantom_image_path) {
    const supr::RunConfig config = load_with_overrides(config_path, overrides);
    warn_if_large(config);

    const supr::Phantom phantom = config.make_phantom();
    const supr::ProjectionData data =
        supr::simulate_projections(phantom, config.make_geometry(), config.make_noise());
    supr::save_projections(data, data_path);
    std::cout << "wrote " << data.rays.size() << " ray measurements to " << data_path << '\n';

    if (!phantom_image_path.empty()) {
        const supr::PixelImage truth =
            supr::rasterize_phantom(phantom, config.side, config.subsample);
        supr::write_image(truth, config.window_low, config.window_high, phantom_image_path);
        std::cout << "wrote phantom image (" << config.side << "x" << config.side << ", tv="
                  << supr::tv(truth) << ") to " << phantom_image_path << '\n';
    }
    return kExitOk;
}

int cmd_reconstruct(const std::string& config_path, const std::vector<std::string>& overrides,
                    const std::string& data_path, const std::string& out_prefix) {
    const supr::RunConfig config = load_with_overrides(config_path, overrides);
    const supr::ProjectionData data = supr::load_projections(data_path);
    if (data.floored_rays > 0)
        std::cerr << "note: data file reports " << data.floored_rays << " floored ray(s)\n";

    const supr::ReconstructionOutcome outcome = supr::run_reconstruction(config, data);
    supr::write_trace(outcome.trace_meta, outcome.trace, out_prefix + ".csv");
    supr::write_image(supr::PixelImage{outcome.final_point, config.side, config.make_grid().pixel_size},
                      config.window_low, config.window_high, out_prefix + ".pgm");

    if (!outcome.output.defined()) {
        std::cerr << "no iterate reached epsilon=" << config.epsilon << " within "
                  << config.max_iterations << " iterations; partial trace saved to " << out_prefix
                  << ".csv\n";
        return kExitUndefined;
    }
    std::cout << "iterations=" << outcome.output.iterations_used << " res=" << outcome.final_res
              << " tv=" << outcome.final_tv << " dropped_rows=" << outcome.dropped_rows
              << " wall_s=" << outcome.wall_seconds << '\n';
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& data_path,
                const std::string& out_prefix) {
    if (config_paths.size() < 2)
        throw supr::ConfigError("compare needs at least two --config files");
    const supr::ProjectionData data = supr::load_projections(data_path);

    struct Row {
        std::string name;
        bool defined;
        std::size_t iterations;
        double res, tv, wall;
    };
    std::vector<Row> rows;
    for (const std::string& path : config_paths) {
        supr::RunConfig config = supr::load_config(path);
        config.validate();
        if (config.name == "run") config.name = path;
        const supr::ReconstructionOutcome outcome = supr::run_reconstruction(config, data);
        rows.push_back({config.name, outcome.output.defined(), outcome.output.iterations_used,
                        outcome.final_res, outcome.final_tv, outcome.wall_seconds});
    }

    std::ofstream txt(out_prefix + ".txt");
    std::ofstream csv(out_prefix + ".csv");
    if (!txt || !csv) throw std::runtime_error("compare: cannot open output files");
    csv << "name,defined,iterations,res,tv,wall_s\n";
    csv.precision(17);
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %9s %11s %12s %12s %9s", "name", "defined",
                  "iterations", "res", "tv", "wall_s");
    txt << line << '\n';
    std::cout << line << '\n';
    for (const Row& r : rows) {
        std::snprintf(line, sizeof(line), "%-24s %9s %11zu %12.5f %12.3f %9.2f", r.name.c_str(),
                      r.defined ? "yes" : "no", r.iterations, r.res, r.tv, r.wall);
        txt << line << '\n';
        std::cout << line << '\n';
        csv << r.name << ',' << (r.defined ? "yes" : "no") << ',' << r.iterations << ',' << r.res
            << ',' << r.tv << ',' << r.wall << '\n';
    }
    return kExitOk;
}

int cmd_verify_trace(const std::string& trace_path) {
    const supr::LoadedTrace trace = supr::read_trace(trace_path);
    const std::vector<std::string> issues = supr::verify_trace(trace);
    if (issues.empty()) {
        std::cout << "trace OK (" << trace.rows.size() << " rows, method " << trace.meta.method
                  << ")\n";
        return kExitOk;
    }
    for (const std::string& issue : issues) std::cerr << "violation: " << issue << '\n';
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"superiorized block-iterative reconstruction toolkit"};
    app.require_subcommand(1);

    std::string config_path, data_path, out_path, phantom_image_path, trace_path;
    std::vector<std::string> overrides, config_paths;

    CLI::App* simulate = app.add_subcommand("simulate", "generate projection data for a phantom");
    simulate->add_option("--config", config_path, "run configuration file");
    simulate->add_option("--set", overrides, "override a config key (key=value)");
    simulate->add_option("--out", data_path, "projection data output path")->required();
    simulate->add_option("--phantom-image", phantom_image_path, "also write the rasterized phantom (PGM)");

    CLI::App* reconstruct = app.add_subcommand("reconstruct", "reconstruct an image from data");
    reconstruct->add_option("--config", config_path, "run configuration file");
    reconstruct->add_option("--set", overrides, "override a config key (key=value)");
    reconstruct->add_option("--data", data_path, "projection data file")->required();
    reconstruct->add_option("--out", out_path, "output prefix for .pgm and .csv")->required();

    CLI::App* compare = app.add_subcommand("compare", "run several configs on one data set");
    compare->add_option("--config", config_paths, "configuration files (repeat; at least two)");
    compare->add_option("--data", data_path, "projection data file")->required();
    compare->add_option("--out", out_path, "output prefix for .txt and .csv")->required();

    CLI::App* verify = app.add_subcommand("verify-trace", "re-validate a reconstruction trace");
    verify->add_option("--trace", trace_path, "trace CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(config_path, overrides, data_path, phantom_image_path);
        if (reconstruct->parsed())
            return cmd_reconstruct(config_path, overrides, data_path, out_path);
        if (compare->parsed()) return cmd_compare(config_paths, data_path, out_path);
        if (verify->parsed()) return cmd_verify_trace(trace_path);
    } catch (const supr::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
