#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "supr/core.hpp"
#include "supr/criteria.hpp"
#include "supr/linear.hpp"
#include "supr/vec.hpp"

namespace supr {

/// Summable step-size sequence gamma_l = a^l, 0 < a < 1, drawn through a
/// cursor that starts at -1 and only ever moves forward. The cursor is shared
/// across the whole run: it is never reset between outer iterations.
class GammaSchedule {
  public:
    static GammaSchedule geometric(double ratio) { return GammaSchedule(ratio); }

    explicit GammaSchedule(double ratio) : ratio_(ratio) {
        if (!(ratio > 0.0 && ratio < 1.0))
            throw std::invalid_argument("GammaSchedule: ratio must lie in (0, 1)");
    }

    double ratio() const { return ratio_; }
    long long cursor() const { return cursor_; }

    /// Advances the cursor and returns gamma at the new position.
    double next() {
        ++cursor_;
        return std::pow(ratio_, static_cast<double>(cursor_));
    }

    /// Sum of the full series, an upper bound for any subsequence sum.
    double series_sum() const { return 1.0 / (1.0 - ratio_); }

  private:
    double ratio_;
    long long cursor_ = -1;
};

struct SuperiorizationConfig {
    std::size_t steering_steps = 20;   // N
    double gamma_ratio = 0.99995;      // a in gamma_l = a^l
    Point initial;                     // x-bar, must lie in Omega
    Criterion phi;
    NonascendingProvider provider;
    std::size_t draw_cap = 1000000;    // inner-loop guard against defective providers
    bool keep_steering_vectors = true; // store v^k in the records
};

/// Bookkeeping for one outer iteration: the accepted step sizes beta_{k,n},
/// the schedule positions they were drawn from, and the aggregate (beta_k,
/// v^k) pair that reconstructs x^{k,N} = x^k + beta_k v^k.
struct PerturbationRecord {
    std::size_t k = 0;
    std::vector<double> step_betas;          // beta_{k,n} for n = 0..N-1
    std::vector<long long> accepted_cursors; // schedule cursor of each accepted draw
    double beta = 0.0;                       // beta_k = max_n beta_{k,n}
    Point steering;                          // v^k (empty when not kept)
    double steering_norm = 0.0;              // ||v^k||
    double max_phi_excess = 0.0;             // max_n phi(x^{k,n}) - phi(x^k), <= 0 by construction
    std::optional<double> reconstruction_error;  // max |x^{k,N} - (x^k + beta_k v^k)|, standard method only
    std::size_t draws_used = 0;
    double phi_start = 0.0;                  // phi(x^k)
};

struct SuperiorizedStepResult {
    Point next;  // x^{k+1}
    PerturbationRecord record;
};

namespace detail {

inline void check_direction_norm(const Point& v, std::size_t k, std::size_t n) {
    const double nv = norm(v);
    if (nv > 1.0 + 1e-12)
        throw std::runtime_error("superiorize: provider returned ||d|| = " + std::to_string(nv) +
                                 " > 1 at (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
}

[[noreturn]] inline void draw_cap_exceeded(std::size_t k, std::size_t n, std::size_t cap) {
    throw std::runtime_error("superiorize: steering loop exceeded " + std::to_string(cap) +
                             " draws at (k=" + std::to_string(k) + ", n=" + std::to_string(n) +
                             "); the nonascending provider looks defective");
}

}  // namespace detail

/// One outer iteration of the superiorized version: N steering steps, each
/// drawing gamma values until the perturbed point z keeps phi at or below
/// phi(x^k), then one application of the algorithm's operator. phi(x^k) is
/// evaluated once and reused as the comparison target of every steering step.
inline SuperiorizedStepResult superiorized_step(const AlgorithmStep& algorithm,
                                                const SuperiorizationConfig& config, const Point& x_k,
                                                GammaSchedule& schedule, std::size_t k = 0) {
    const std::size_t dim = x_k.size();
    PerturbationRecord record;
    record.k = k;
    record.phi_start = config.phi(x_k);

    Point x_kn = x_k;
    Point weighted_sum(dim, 0.0);  // sum_n beta_{k,n} v^{k,n}
    record.step_betas.reserve(config.steering_steps);
    record.accepted_cursors.reserve(config.steering_steps);

    for (std::size_t n = 0; n < config.steering_steps; ++n) {
        const Point v = config.provider(x_kn);
        require_same_size(v, x_kn, "superiorized_step");
        detail::check_direction_norm(v, k, n);

        std::size_t draws = 0;
        for (;;) {
            if (++draws > config.draw_cap) detail::draw_cap_exceeded(k, n, config.draw_cap);
            const double beta_kn = schedule.next();
            Point z = add_scaled(x_kn, beta_kn, v);
            const double phi_z = config.phi(z);
            if (phi_z <= record.phi_start) {  // z is always in Delta = R^J
                x_kn = std::move(z);
                record.step_betas.push_back(beta_kn);
                record.accepted_cursors.push_back(schedule.cursor());
                record.max_phi_excess = std::max(record.max_phi_excess, phi_z - record.phi_start);
                axpy(beta_kn, v, weighted_sum);
                break;
            }
        }
        record.draws_used += draws;
    }

    record.beta = 0.0;
    for (double b : record.step_betas) record.beta = std::max(record.beta, b);
    Point steering(dim, 0.0);
    if (record.beta > 0.0)
        for (std::size_t j = 0; j < dim; ++j) steering[j] = weighted_sum[j] / record.beta;
    record.steering_norm = norm(steering);
    record.reconstruction_error = max_abs_diff(x_kn, add_scaled(x_k, record.beta, steering));
    if (config.keep_steering_vectors) record.steering = std::move(steering);

    return {algorithm(x_kn), std::move(record)};
}

/// One CSV-friendly sample of a run: the state of iterate x^k plus the
/// perturbation bookkeeping of the step that produced it (zeros for k = 0).
struct TraceRow {
    std::size_t k = 0;
    double res = 0.0;
    double phi = 0.0;
    double step_beta = 0.0;
    double step_vnorm = 0.0;
    long long cursor = -1;
};

struct SuperiorizedRunResult {
    OutputResult output;
    std::vector<PerturbationRecord> records;
    std::vector<TraceRow> trace;
    Point last_iterate;  // final x^k even when the output is undefined
};

/// Runs the superiorized version until the first epsilon-compatible iterate
/// (x^0 included) or until max_iterations outer steps have been taken.
inline SuperiorizedRunResult superiorized_run(const AlgorithmStep& algorithm,
                                              const ProximityFn& proximity, const Domain& omega,
                                              const SuperiorizationConfig& config, double epsilon,
                                              std::size_t max_iterations) {
    if (epsilon < 0.0) throw std::invalid_argument("superiorized_run: epsilon must be nonnegative");
    if (config.steering_steps < 1)
        throw std::invalid_argument("superiorized_run: steering_steps must be >= 1");
    if (!omega.contains(config.initial))
        throw std::invalid_argument("superiorized_run: initial point outside Omega");
    if (!std::isfinite(config.phi(config.initial)))
        throw std::invalid_argument("superiorized_run: phi is not finite at the initial point");

    SuperiorizedRunResult result;
    GammaSchedule schedule(config.gamma_ratio);
    Point x = config.initial;

    for (std::size_t k = 0;; ++k) {
        const double pr = proximity(x);
        result.trace.push_back({k, pr, config.phi(x),
                                k == 0 ? 0.0 : result.records.back().beta,
                                k == 0 ? 0.0 : result.records.back().steering_norm,
                                schedule.cursor()});
        if (pr <= epsilon) {
            result.output = {x, k, pr};
            result.last_iterate = std::move(x);
            return result;
        }
        if (k == max_iterations) break;
        auto [next, record] = superiorized_step(algorithm, config, x, schedule, k);
        result.records.push_back(std::move(record));
        x = std::move(next);
    }
    result.output = {std::nullopt, max_iterations, std::numeric_limits<double>::quiet_NaN()};
    result.last_iterate = std::move(x);
    return result;
}

/// Variant that interleaves one steering step with each block projection of
/// the block-iterative operator (then the nonnegativity clip). Implemented
/// for comparison runs; it does not fit the perturbation-resilience theory,
/// so no reconstruction identity is recorded.
inline SuperiorizedStepResult interleaved_variant_step(const BlockLinearProblem& problem,
                                                       bool apply_nonneg,
                                                       const SuperiorizationConfig& config,
                                                       const Point& x_k, GammaSchedule& schedule,
                                                       std::size_t k = 0) {
    const std::size_t dim = x_k.size();
    if (dim != problem.dimension())
        throw std::invalid_argument("interleaved_variant_step: point dimension mismatch");

    PerturbationRecord record;
    record.k = k;
    record.phi_start = config.phi(x_k);

    Point x = x_k;
    Point weighted_sum(dim, 0.0);
    for (const EquationBlock& block : problem.blocks()) {
        // Each interleaved steering step compares against phi at its own
        // starting point: the preceding block step may have raised phi above
        // phi(x^k), which would make the search unsatisfiable.
        const double phi_here = config.phi(x);
        const Point v = config.provider(x);
        require_same_size(v, x, "interleaved_variant_step");
        detail::check_direction_norm(v, k, record.step_betas.size());

        std::size_t draws = 0;
        for (;;) {
            if (++draws > config.draw_cap)
                detail::draw_cap_exceeded(k, record.step_betas.size(), config.draw_cap);
            const double beta = schedule.next();
            Point z = add_scaled(x, beta, v);
            const double phi_z = config.phi(z);
            if (phi_z <= phi_here) {
                x = std::move(z);
                record.step_betas.push_back(beta);
                record.accepted_cursors.push_back(schedule.cursor());
                record.max_phi_excess = std::max(record.max_phi_excess, phi_z - phi_here);
                axpy(beta, v, weighted_sum);
                break;
            }
        }
        record.draws_used += draws;
        x = block_step(block, x);
    }
    if (apply_nonneg) x = nonneg_clip(std::move(x));

    record.beta = 0.0;
    for (double b : record.step_betas) record.beta = std::max(record.beta, b);
    Point steering(dim, 0.0);
    if (record.beta > 0.0)
        for (std::size_t j = 0; j < dim; ++j) steering[j] = weighted_sum[j] / record.beta;
    record.steering_norm = norm(steering);
    if (config.keep_steering_vectors) record.steering = std::move(steering);

    return {std::move(x), std::move(record)};
}

inline SuperiorizedRunResult interleaved_variant_run(const BlockLinearProblem& problem,
                                                     bool apply_nonneg,
                                                     const SuperiorizationConfig& config,
                                                     double epsilon, std::size_t max_iterations) {
    if (epsilon < 0.0)
        throw std::invalid_argument("interleaved_variant_run: epsilon must be nonnegative");
    const Domain omega = apply_nonneg ? Domain::nonnegative_orthant(problem.dimension())
                                      : Domain::all_space(problem.dimension());
    if (!omega.contains(config.initial))
        throw std::invalid_argument("interleaved_variant_run: initial point outside Omega");

    SuperiorizedRunResult result;
    GammaSchedule schedule(config.gamma_ratio);
    Point x = config.initial;

    for (std::size_t k = 0;; ++k) {
        const double pr = res(problem, x);
        result.trace.push_back({k, pr, config.phi(x),
                                k == 0 ? 0.0 : result.records.back().beta,
                                k == 0 ? 0.0 : result.records.back().steering_norm,
                                schedule.cursor()});
        if (pr <= epsilon) {
            result.output = {x, k, pr};
            result.last_iterate = std::move(x);
            return result;
        }
        if (k == max_iterations) break;
        auto [next, record] = interleaved_variant_step(problem, apply_nonneg, config, x, schedule, k);
        result.records.push_back(std::move(record));
        x = std::move(next);
    }
    result.output = {std::nullopt, max_iterations, std::numeric_limits<double>::quiet_NaN()};
    result.last_iterate = std::move(x);
    return result;
}

}  // namespace supr
