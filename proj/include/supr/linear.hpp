#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "supr/core.hpp"
#include "supr/vec.hpp"

namespace supr {

/// One linear equation <a, x> = b with a stored sparsely. Rows from ray
/// tracing touch only the pixels along the ray, so index/value pairs are the
/// natural storage; dense construction is kept for small tests.
class LinearEquation {
  public:
    struct Entry {
        std::size_t index;
        double value;
    };

    LinearEquation(std::vector<Entry> entries, double b, std::size_t dimension)
        : entries_(std::move(entries)), b_(b), dimension_(dimension) {
        double nsq = 0.0;
        for (const Entry& e : entries_) {
            if (e.index >= dimension_)
                throw std::invalid_argument("LinearEquation: entry index out of range");
            nsq += e.value * e.value;
        }
        if (nsq <= 0.0)
            throw std::invalid_argument("LinearEquation: zero row is not allowed");
        norm_sq_ = nsq;
    }

    LinearEquation(const Point& dense_a, double b)
        : LinearEquation(compress(dense_a), b, dense_a.size()) {}

    double b() const { return b_; }
    std::size_t dimension() const { return dimension_; }
    double row_norm_sq() const { return norm_sq_; }
    const std::vector<Entry>& entries() const { return entries_; }

    double dot_with(const Point& x) const {
        if (x.size() != dimension_)
            throw std::invalid_argument("LinearEquation: point dimension mismatch");
        double s = 0.0;
        for (const Entry& e : entries_) s += e.value * x[e.index];
        return s;
    }

    double residual(const Point& x) const { return b_ - dot_with(x); }

    Point dense_row() const {
        Point a(dimension_, 0.0);
        for (const Entry& e : entries_) a[e.index] += e.value;
        return a;
    }

  private:
    static std::vector<Entry> compress(const Point& dense) {
        std::vector<Entry> out;
        for (std::size_t j = 0; j < dense.size(); ++j)
            if (dense[j] != 0.0) out.push_back({j, dense[j]});
        return out;
    }

    std::vector<Entry> entries_;
    double b_;
    std::size_t dimension_;
    double norm_sq_;
};

using EquationBlock = std::vector<LinearEquation>;

/// An ordered sequence of W non-empty blocks of linear equations, all sharing
/// one dimension J.
class BlockLinearProblem {
  public:
    BlockLinearProblem(std::size_t dimension, std::vector<EquationBlock> blocks)
        : dimension_(dimension), blocks_(std::move(blocks)) {
        if (dimension_ < 1) throw std::invalid_argument("BlockLinearProblem: dimension must be >= 1");
        if (blocks_.empty()) throw std::invalid_argument("BlockLinearProblem: needs at least one block");
        for (const EquationBlock& block : blocks_) {
            if (block.empty()) throw std::invalid_argument("BlockLinearProblem: empty block");
            for (const LinearEquation& eq : block)
                if (eq.dimension() != dimension_)
                    throw std::invalid_argument("BlockLinearProblem: equation dimension mismatch");
        }
    }

    std::size_t dimension() const { return dimension_; }
    std::size_t block_count() const { return blocks_.size(); }
    const std::vector<EquationBlock>& blocks() const { return blocks_; }

    std::size_t equation_count() const {
        std::size_t n = 0;
        for (const EquationBlock& block : blocks_) n += block.size();
        return n;
    }

  private:
    std::size_t dimension_;
    std::vector<EquationBlock> blocks_;
};

/// Residual proximity: sqrt of the summed squared residuals over every
/// equation of every block. Equals ||b - Ax|| for the stacked system.
inline double res(const BlockLinearProblem& problem, const Point& x) {
    if (x.size() != problem.dimension())
        throw std::invalid_argument("res: point dimension mismatch");
    double s = 0.0;
    for (const EquationBlock& block : problem.blocks()) {
        for (const LinearEquation& eq : block) {
            const double r = eq.residual(x);
            s += r * r;
        }
    }
    return std::sqrt(s);
}

/// Simultaneous projection step for one block:
///   x + (1/l_w) * sum_i ((b_i - <a^i, x>) / ||a^i||^2) a^i
inline Point block_step(const EquationBlock& block, const Point& x) {
    if (block.empty()) throw std::invalid_argument("block_step: empty block");
    Point out = x;
    const double inv_count = 1.0 / static_cast<double>(block.size());
    for (const LinearEquation& eq : block) {
        const double scale = inv_count * eq.residual(x) / eq.row_norm_sq();
        for (const LinearEquation::Entry& e : eq.entries()) out[e.index] += scale * e.value;
    }
    return out;
}

/// Componentwise max with zero; maps any point into the nonnegative orthant.
inline Point nonneg_clip(Point x) {
    for (double& v : x) v = std::max(0.0, v);
    return x;
}

/// The block-iterative operator: apply the block steps for blocks 1..W in
/// order, then clip to the nonnegative orthant when `apply_nonneg` is set.
/// With one equation per block this is an ART sweep, with a single block a
/// SIRT step. Without the clip, Omega is all of R^J.
inline AlgorithmStep algorithm_r(BlockLinearProblem problem, bool apply_nonneg) {
    return [problem = std::move(problem), apply_nonneg](const Point& x) {
        if (x.size() != problem.dimension())
            throw std::invalid_argument("algorithm_r: point dimension mismatch");
        Point y = x;
        for (const EquationBlock& block : problem.blocks()) y = block_step(block, y);
        return apply_nonneg ? nonneg_clip(std::move(y)) : y;
    };
}

/// View processing order that keeps consecutively processed views far apart
/// in angle: bit-reversal over the smallest power of two covering the range,
/// with out-of-range entries dropped.
inline std::vector<std::size_t> efficient_view_order(std::size_t view_count) {
    if (view_count < 1) throw std::invalid_argument("efficient_view_order: view_count must be >= 1");
    std::size_t padded = 1, bits = 0;
    while (padded < view_count) {
        padded <<= 1;
        ++bits;
    }
    std::vector<std::size_t> order;
    order.reserve(view_count);
    for (std::size_t i = 0; i < padded; ++i) {
        std::size_t reversed = 0, v = i;
        for (std::size_t b = 0; b < bits; ++b) {
            reversed = (reversed << 1) | (v & 1u);
            v >>= 1;
        }
        if (reversed < view_count) order.push_back(reversed);
    }
    return order;
}

inline std::vector<std::size_t> sequential_view_order(std::size_t view_count) {
    std::vector<std::size_t> order(view_count);
    for (std::size_t i = 0; i < view_count; ++i) order[i] = i;
    return order;
}

// --- plain-text problem serialization ---------------------------------------
//
//   supr-blp 1
//   <J> <W>
//   block <l_w>
//   <b> <nnz> <index>:<value> ...     (one line per equation)

inline void save_problem(const BlockLinearProblem& problem, std::ostream& out) {
    out << "supr-blp 1\n" << problem.dimension() << ' ' << problem.block_count() << '\n';
    out.precision(17);
    for (const EquationBlock& block : problem.blocks()) {
        out << "block " << block.size() << '\n';
        for (const LinearEquation& eq : block) {
            out << eq.b() << ' ' << eq.entries().size();
            for (const LinearEquation::Entry& e : eq.entries()) out << ' ' << e.index << ':' << e.value;
            out << '\n';
        }
    }
}

inline void save_problem(const BlockLinearProblem& problem, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_problem: cannot open " + path);
    save_problem(problem, out);
    if (!out) throw std::runtime_error("save_problem: write failed for " + path);
}

inline BlockLinearProblem load_problem(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "supr-blp" || version != 1)
        throw std::runtime_error("load_problem: not a supr-blp v1 stream");
    std::size_t dimension = 0, block_count = 0;
    if (!(in >> dimension >> block_count))
        throw std::runtime_error("load_problem: bad header");
    std::vector<EquationBlock> blocks;
    blocks.reserve(block_count);
    for (std::size_t w = 0; w < block_count; ++w) {
        std::string tag;
        std::size_t len = 0;
        if (!(in >> tag >> len) || tag != "block")
            throw std::runtime_error("load_problem: bad block header");
        EquationBlock block;
        block.reserve(len);
        for (std::size_t i = 0; i < len; ++i) {
            double b = 0.0;
            std::size_t nnz = 0;
            if (!(in >> b >> nnz)) throw std::runtime_error("load_problem: bad equation line");
            std::vector<LinearEquation::Entry> entries;
            entries.reserve(nnz);
            for (std::size_t e = 0; e < nnz; ++e) {
                std::string pair;
                if (!(in >> pair)) throw std::runtime_error("load_problem: truncated entry list");
                const auto colon = pair.find(':');
                if (colon == std::string::npos)
                    throw std::runtime_error("load_problem: malformed entry '" + pair + "'");
                entries.push_back({static_cast<std::size_t>(std::stoull(pair.substr(0, colon))),
                                   std::stod(pair.substr(colon + 1))});
            }
            block.emplace_back(std::move(entries), b, dimension);
        }
        blocks.push_back(std::move(block));
    }
    return {dimension, std::move(blocks)};
}

inline BlockLinearProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_problem: cannot open " + path);
    return load_problem(in);
}

}  // namespace supr
