#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "supr/superiorize.hpp"

namespace supr {

/// Header metadata stored as comment lines in a trace CSV, enough to
/// re-validate the run's bookkeeping without the run itself.
struct TraceMeta {
    std::string method = "plain";  // plain | standard | interleaved
    std::size_t steering_steps = 0;  // per outer iteration (0 for plain)
    double gamma_ratio = 0.0;
    double epsilon = 0.0;
    bool defined = false;  // whether the run reached epsilon
};

inline void write_trace(const TraceMeta& meta, const std::vector<TraceRow>& rows, std::ostream& out) {
    out << "# supr-trace 1\n";
    out << "# method " << meta.method << '\n';
    out << "# n " << meta.steering_steps << '\n';
    out.precision(17);
    out << "# a " << meta.gamma_ratio << '\n';
    out << "# epsilon " << meta.epsilon << '\n';
    out << "# status " << (meta.defined ? "defined" : "undefined") << '\n';
    out << "k,res,tv,step_beta,step_vnorm,gamma_cursor\n";
    for (const TraceRow& r : rows) {
        out << r.k << ',' << r.res << ',' << r.phi << ',' << r.step_beta << ',' << r.step_vnorm
            << ',' << r.cursor << '\n';
    }
}

inline void write_trace(const TraceMeta& meta, const std::vector<TraceRow>& rows,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace: cannot open " + path);
    write_trace(meta, rows, out);
    if (!out) throw std::runtime_error("write_trace: write failed for " + path);
}

struct LoadedTrace {
    TraceMeta meta;
    std::vector<TraceRow> rows;
};

inline LoadedTrace read_trace(std::istream& in) {
    LoadedTrace t;
    std::string line;
    bool saw_magic = false, saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "supr-trace") saw_magic = true;
            else if (key == "method") ls >> t.meta.method;
            else if (key == "n") ls >> t.meta.steering_steps;
            else if (key == "a") ls >> t.meta.gamma_ratio;
            else if (key == "epsilon") ls >> t.meta.epsilon;
            else if (key == "status") {
                std::string s;
                ls >> s;
                t.meta.defined = (s == "defined");
            }
            continue;
        }
        if (!saw_header) {  // column header line
            saw_header = true;
            continue;
        }
        TraceRow row;
        char comma = 0;
        std::istringstream ls(line);
        if (!(ls >> row.k >> comma >> row.res >> comma >> row.phi >> comma >> row.step_beta >>
              comma >> row.step_vnorm >> comma >> row.cursor))
            throw std::runtime_error("read_trace: malformed row '" + line + "'");
        t.rows.push_back(row);
    }
    if (!saw_magic) throw std::runtime_error("read_trace: missing supr-trace marker");
    return t;
}

inline LoadedTrace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace: cannot open " + path);
    return read_trace(in);
}

/// Re-validates the bookkeeping a trace must satisfy. Returns human-readable
/// violations; an empty list means the trace is consistent.
inline std::vector<std::string> verify_trace(const LoadedTrace& trace) {
    std::vector<std::string> issues;
    const TraceMeta& meta = trace.meta;
    const auto& rows = trace.rows;
    auto fail = [&](std::size_t row, const std::string& what) {
        issues.push_back("row " + std::to_string(row) + ": " + what);
    };

    if (rows.empty()) {
        issues.push_back("trace has no rows");
        return issues;
    }
    const bool steered = meta.method == "standard" || meta.method == "interleaved";
    if (steered && !(meta.gamma_ratio > 0.0 && meta.gamma_ratio < 1.0)) {
        issues.push_back("gamma ratio " + std::to_string(meta.gamma_ratio) + " outside (0, 1)");
        return issues;
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const TraceRow& r = rows[i];
        if (r.k != i) fail(i, "iteration index " + std::to_string(r.k) + ", expected " + std::to_string(i));
        if (!std::isfinite(r.res) || r.res < 0.0) fail(i, "bad res value");
        if (!std::isfinite(r.phi)) fail(i, "bad tv value");
    }

    if (rows[0].step_beta != 0.0) fail(0, "nonzero step_beta before any step");
    if (rows[0].cursor != -1) fail(0, "gamma cursor should start at -1");

    if (!steered) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].step_beta != 0.0 || rows[i].step_vnorm != 0.0 || rows[i].cursor != -1)
                fail(i, "plain run carries perturbation bookkeeping");
        }
    } else {
        const double log_a = std::log(meta.gamma_ratio);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const TraceRow& r = rows[i];
            const long long prev_cursor = rows[i - 1].cursor;
            if (r.cursor <= prev_cursor) fail(i, "gamma cursor did not advance");
            if (meta.steering_steps > 0 &&
                r.cursor - prev_cursor < static_cast<long long>(meta.steering_steps))
                fail(i, "fewer gamma draws than steering steps");
            if (r.step_vnorm > static_cast<double>(meta.steering_steps) + 1e-9)
                fail(i, "||v^k|| exceeds the steering step count");
            if (!(r.step_beta > 0.0)) {
                fail(i, "step_beta must be positive for a steered run");
                continue;
            }
            // beta_k must be gamma_j for an integer j inside this step's draw window
            const double j_real = std::log(r.step_beta) / log_a;
            const long long j = std::llround(j_real);
            const double gamma_j = std::pow(meta.gamma_ratio, static_cast<double>(j));
            if (std::abs(r.step_beta - gamma_j) > 1e-9 * gamma_j)
                fail(i, "step_beta is not a schedule value");
            else if (j <= prev_cursor || j > r.cursor)
                fail(i, "step_beta drawn outside this step's cursor window");
        }
    }

    if (meta.defined && rows.back().res > meta.epsilon)
        fail(rows.size() - 1, "final res exceeds epsilon despite defined status");
    return issues;
}

}  // namespace supr
