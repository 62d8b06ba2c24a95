#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "supr/vec.hpp"

namespace supr {

/// One application of an iterative algorithm's operator: Delta -> Omega.
using AlgorithmStep = std::function<Point(const Point&)>;

/// Proximity function: measures how incompatible a point is with the
/// constraints of a problem. Nonnegative.
using ProximityFn = std::function<double(const Point&)>;

/// The set Omega the iterates must live in. Delta (the operator's domain) is
/// fixed to all of R^J throughout this library.
struct Domain {
    enum class Kind { NonnegativeOrthant, AllSpace };

    Kind kind = Kind::AllSpace;
    std::size_t dimension = 0;

    static Domain all_space(std::size_t j) { return {Kind::AllSpace, j}; }
    static Domain nonnegative_orthant(std::size_t j) { return {Kind::NonnegativeOrthant, j}; }

    bool contains(const Point& x) const {
        if (x.size() != dimension) return false;
        if (kind == Kind::AllSpace) return true;
        for (double v : x)
            if (v < 0.0) return false;
        return true;
    }
};

/// Result of the output operator: the first epsilon-compatible iterate, the
/// index at which it was reached, and its proximity value. `point` is empty
/// when no iterate within the iteration cap was epsilon-compatible.
struct OutputResult {
    std::optional<Point> point;
    std::size_t iterations_used = 0;
    double proximity_at_output = std::numeric_limits<double>::quiet_NaN();

    bool defined() const { return point.has_value(); }
};

/// Output operator: iterate `algorithm` from `initial` and return the first
/// iterate x^K (x^0 included) with proximity(x^K) <= epsilon. At most
/// `max_iterations` operator applications are made; if no iterate qualifies
/// the result is undefined.
inline OutputResult run_to_output(const AlgorithmStep& algorithm, const ProximityFn& proximity,
                                  const Domain& omega, const Point& initial, double epsilon,
                                  std::size_t max_iterations) {
    if (epsilon < 0.0) throw std::invalid_argument("run_to_output: epsilon must be nonnegative");
    if (max_iterations < 1) throw std::invalid_argument("run_to_output: max_iterations must be >= 1");
    if (initial.size() != omega.dimension)
        throw std::invalid_argument("run_to_output: initial point dimension mismatch");
    if (!omega.contains(initial))
        throw std::invalid_argument("run_to_output: initial point outside Omega");

    Point x = initial;
    for (std::size_t k = 0;; ++k) {
        const double pr = proximity(x);
        if (pr < 0.0) throw std::runtime_error("run_to_output: proximity returned a negative value");
        if (pr <= epsilon) return {std::move(x), k, pr};
        if (k == max_iterations) break;
        x = algorithm(x);
        if (x.size() != omega.dimension)
            throw std::runtime_error("run_to_output: algorithm changed the dimension");
    }
    return {std::nullopt, max_iterations, std::numeric_limits<double>::quiet_NaN()};
}

/// Empirical nonexpansiveness spot-check over sampled point pairs.
struct NonexpansiveReport {
    bool nonexpansive = false;
    double max_ratio = 0.0;       // max ||Ox-Oy|| / ||x-y|| over pairs with x != y
    double worst_excess = 0.0;    // max ||Ox-Oy|| - ||x-y||
    std::size_t pairs_checked = 0;
};

inline NonexpansiveReport check_nonexpansive(const AlgorithmStep& op,
                                             const std::vector<std::pair<Point, Point>>& sample_pairs,
                                             double tolerance) {
    if (sample_pairs.empty())
        throw std::invalid_argument("check_nonexpansive: empty sample list");
    NonexpansiveReport report;
    report.nonexpansive = true;
    for (const auto& [x, y] : sample_pairs) {
        require_same_size(x, y, "check_nonexpansive");
        const double din = distance(x, y);
        const double dout = distance(op(x), op(y));
        if (dout > din + tolerance) report.nonexpansive = false;
        report.worst_excess = std::max(report.worst_excess, dout - din);
        if (din > 0.0) report.max_ratio = std::max(report.max_ratio, dout / din);
        ++report.pairs_checked;
    }
    return report;
}

/// One bounded perturbation beta_k * v^k.
struct Perturbation {
    double beta = 0.0;
    Point direction;
};

/// Generates x^0..x^count with x^{k+1} = P(x^k + beta_k v^k). Perturbations
/// beyond the supplied list are treated as zero.
inline std::vector<Point> run_perturbed(const AlgorithmStep& algorithm, const Point& initial,
                                        const std::vector<Perturbation>& perturbations,
                                        std::size_t count) {
    if (count < 1) throw std::invalid_argument("run_perturbed: count must be >= 1");
    for (std::size_t k = 0; k < perturbations.size(); ++k) {
        if (perturbations[k].beta < 0.0)
            throw std::invalid_argument("run_perturbed: beta_" + std::to_string(k) + " is negative");
        if (perturbations[k].direction.size() != initial.size())
            throw std::invalid_argument("run_perturbed: v^" + std::to_string(k) + " dimension mismatch");
    }
    std::vector<Point> trajectory;
    trajectory.reserve(count + 1);
    trajectory.push_back(initial);
    for (std::size_t k = 0; k < count; ++k) {
        Point y = trajectory.back();
        if (k < perturbations.size())
            axpy(perturbations[k].beta, perturbations[k].direction, y);
        trajectory.push_back(algorithm(y));
    }
    return trajectory;
}

}  // namespace supr
