#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "supr/config.hpp"
#include "supr/core.hpp"
#include "supr/criteria.hpp"
#include "supr/linear.hpp"
#include "supr/superiorize.hpp"
#include "supr/tomo.hpp"
#include "supr/trace.hpp"

namespace supr {

/// One block per equation (ART) or a single block (SIRT), preserving the
/// equation order of the per-view grouping.
inline BlockLinearProblem regroup_blocks(const BlockLinearProblem& problem,
                                         const std::string& algorithm) {
    if (algorithm == "R") return problem;
    std::vector<EquationBlock> blocks;
    if (algorithm == "ART") {
        for (const EquationBlock& block : problem.blocks())
            for (const LinearEquation& eq : block) blocks.push_back({eq});
    } else if (algorithm == "SIRT") {
        EquationBlock all;
        for (const EquationBlock& block : problem.blocks())
            for (const LinearEquation& eq : block) all.push_back(eq);
        blocks.push_back(std::move(all));
    } else {
        throw std::invalid_argument("regroup_blocks: unknown algorithm '" + algorithm + "'");
    }
    return {problem.dimension(), std::move(blocks)};
}

inline std::vector<std::size_t> make_view_order(const RunConfig& config) {
    return config.view_order == "efficient" ? efficient_view_order(config.views)
                                            : sequential_view_order(config.views);
}

struct ReconstructionOutcome {
    OutputResult output;
    Point final_point;  // the defined output, or the last iterate when undefined
    double final_res = 0.0;
    double final_tv = 0.0;
    std::vector<TraceRow> trace;
    std::vector<PerturbationRecord> records;
    TraceMeta trace_meta;
    std::size_t dropped_rows = 0;
    double wall_seconds = 0.0;
};

/// Assembles the problem described by `config` from measured data and runs
/// the selected plain / superiorized / interleaved reconstruction.
inline ReconstructionOutcome run_reconstruction(const RunConfig& config, const ProjectionData& data) {
    config.validate();
    if (data.geometry.views != config.views || data.geometry.rays_per_view != config.rays_per_view)
        throw std::invalid_argument("run_reconstruction: config scan geometry disagrees with the data file");

    const auto t0 = std::chrono::steady_clock::now();
    const ImageGrid grid = config.make_grid();
    AssembledProblem assembled = assemble_problem(data, grid, make_view_order(config));
    const BlockLinearProblem problem = regroup_blocks(assembled.problem, config.algorithm);

    const std::size_t dim = problem.dimension();
    const Domain omega = config.apply_nonneg ? Domain::nonnegative_orthant(dim)
                                             : Domain::all_space(dim);
    const ProximityFn proximity = [&problem](const Point& x) { return res(problem, x); };
    const Criterion phi = tv_criterion(config.side);

    ReconstructionOutcome outcome;
    outcome.dropped_rows = assembled.dropped_rows;
    outcome.trace_meta.epsilon = config.epsilon;

    if (config.superiorize == "none") {
        outcome.trace_meta.method = "plain";
        const AlgorithmStep step = algorithm_r(problem, config.apply_nonneg);
        Point x(dim, 0.0);
        for (std::size_t k = 0;; ++k) {
            const double pr = proximity(x);
            outcome.trace.push_back({k, pr, phi(x), 0.0, 0.0, -1});
            if (pr <= config.epsilon) {
                outcome.output = {x, k, pr};
                break;
            }
            if (k == config.max_iterations) {
                outcome.output = {std::nullopt, config.max_iterations,
                                  std::numeric_limits<double>::quiet_NaN()};
                break;
            }
            x = step(x);
        }
        outcome.final_point = std::move(x);
    } else {
        SuperiorizationConfig sc;
        sc.steering_steps = config.steering_steps;
        sc.gamma_ratio = config.gamma_ratio;
        sc.initial = Point(dim, 0.0);
        sc.phi = phi;
        sc.provider = tv_nonascending_provider(config.side);
        sc.keep_steering_vectors = false;  // traces carry the norms; vectors are large

        SuperiorizedRunResult run;
        if (config.superiorize == "standard") {
            outcome.trace_meta.method = "standard";
            outcome.trace_meta.steering_steps = config.steering_steps;
            outcome.trace_meta.gamma_ratio = config.gamma_ratio;
            const AlgorithmStep step = algorithm_r(problem, config.apply_nonneg);
            run = superiorized_run(step, proximity, omega, sc, config.epsilon, config.max_iterations);
        } else {
            outcome.trace_meta.method = "interleaved";
            outcome.trace_meta.steering_steps = problem.block_count();
            outcome.trace_meta.gamma_ratio = config.gamma_ratio;
            run = interleaved_variant_run(problem, config.apply_nonneg, sc, config.epsilon,
                                          config.max_iterations);
        }
        outcome.output = std::move(run.output);
        outcome.trace = std::move(run.trace);
        outcome.records = std::move(run.records);
        outcome.final_point = std::move(run.last_iterate);
    }

    outcome.trace_meta.defined = outcome.output.defined();
    outcome.final_res = res(problem, outcome.final_point);
    outcome.final_tv = tv(outcome.final_point, config.side);
    outcome.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return outcome;
}

}  // namespace supr
