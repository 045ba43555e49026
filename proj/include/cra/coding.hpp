#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cra/degree_distribution.hpp"
#include "cra/poisson_receiver.hpp"

namespace cra {

/// Per-class transmission code: the block-count distribution and the number
/// of blocks needed for decoding. blocks_needed = 1 is a plain repetition
/// code; larger values describe an ideal FEC code that recovers the packet
/// from any blocks_needed of its blocks.
struct CodeSpec {
    DegreeDistribution dd;
    int blocks_needed = 1;
    std::string label;

    CodeSpec(DegreeDistribution dd_, int blocks_needed_ = 1, std::string label_ = {})
        : dd(std::move(dd_)), blocks_needed(blocks_needed_), label(std::move(label_)) {
        if (blocks_needed < 1) throw ValidationError("code spec: blocks_needed must be at least 1");
        if (dd.min_degree() < static_cast<std::size_t>(blocks_needed))
            throw ValidationError(
                "code spec: cannot require more successful blocks than are ever transmitted");
        if (dd.mean() <= 0.0)
            throw ValidationError("code spec: degree distribution has no transmissions");
    }
};

/// Iteration-by-iteration record of the cancellation recursion.
/// p[i][k], q[i][k] are the undecodability probabilities at the receiver and
/// user end of a random class k edge after iteration i+1; with a normal
/// inner receiver and the all-ones start, q is coordinatewise nonincreasing.
struct DensityEvolutionTrace {
    std::vector<std::vector<double>> p;
    std::vector<std::vector<double>> q;
    OfferedLoad rho;        // per-class load at the inner receiver
    bool converged = false;
    bool monotone = true;
    int iterations_used = 0;

    const std::vector<double>& final_p() const { return p.back(); }
    const std::vector<double>& final_q() const { return q.back(); }
};

namespace detail {

/// sum_{j=0}^{n0-1} dd^(j)(x) * (1-x)^j / j!  -- the probability that fewer
/// than n0 of the blocks counted by dd are received when each survives
/// independently with probability 1-x. For n0 = 1 this is exactly dd(x).
inline double block_failure_sum(const DegreeDistribution& dd, int n0, double x) {
    double acc = dd.eval(x);
    double factor = 1.0;  // (1-x)^j / j!
    for (int j = 1; j < n0; ++j) {
        factor *= (1.0 - x) / static_cast<double>(j);
        acc += dd.derivative(static_cast<std::size_t>(j), x) * factor;
    }
    return acc;
}

struct CodeClass {
    DegreeDistribution dd;
    DegreeDistribution edge_dd;  // excess distribution
    int blocks_needed;
};

inline std::vector<CodeClass> compile_specs(const PoissonReceiver& inner,
                                            const std::vector<CodeSpec>& specs) {
    if (specs.size() != inner.num_classes())
        throw ValidationError("coding: one code spec per inner receiver class required");
    std::vector<CodeClass> classes;
    classes.reserve(specs.size());
    for (const CodeSpec& s : specs)
        classes.push_back({s.dd, s.dd.excess(), s.blocks_needed});
    return classes;
}

inline std::pair<std::vector<double>, std::vector<double>> de_step_impl(
    const PoissonReceiver& inner, const std::vector<CodeClass>& classes,
    const std::vector<double>& q, const OfferedLoad& rho) {
    const std::vector<double> suc = inner.success(rho.hadamard(q));
    std::vector<double> p(q.size()), q_next(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        p[k] = 1.0 - suc[k];
        double v = block_failure_sum(classes[k].edge_dd, classes[k].blocks_needed, p[k]);
        q_next[k] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return {std::move(p), std::move(q_next)};
}

}  // namespace detail

/// One synchronous update of the cancellation recursion for all classes:
/// thins the load by q, evaluates the inner receiver, and pushes the failure
/// probabilities through each class's edge-perspective code.
inline std::pair<std::vector<double>, std::vector<double>> de_step(
    const PoissonReceiver& inner, const std::vector<CodeSpec>& specs,
    const std::vector<double>& q, const OfferedLoad& rho) {
    for (double v : q)
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("de_step: q entries must be in [0,1]");
    if (q.size() != inner.num_classes() || rho.num_classes() != inner.num_classes())
        throw ValidationError("de_step: arity mismatch");
    return detail::de_step_impl(inner, detail::compile_specs(inner, specs), q, rho);
}

/// Runs the recursion from the all-ones start until the update falls below
/// tol in every coordinate or max_iters is reached. The normalized load is
/// per class; the per-receiver load is normalized load times mean degree.
inline DensityEvolutionTrace de_trace(const PoissonReceiver& inner,
                                      const std::vector<CodeSpec>& specs,
                                      const OfferedLoad& normalized_load, int max_iters = 100,
                                      double tol = 1e-12) {
    if (max_iters < 1) throw ValidationError("de_trace: max_iters must be at least 1");
    if (normalized_load.num_classes() != inner.num_classes())
        throw ValidationError("de_trace: load arity mismatch");
    const std::vector<detail::CodeClass> classes = detail::compile_specs(inner, specs);

    std::vector<double> rho_values(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k)
        rho_values[k] = normalized_load[k] * classes[k].dd.mean();
    const OfferedLoad rho{std::vector<double>(rho_values)};

    DensityEvolutionTrace trace;
    trace.rho = rho;
    std::vector<double> q(classes.size(), 1.0);
    for (int i = 0; i < max_iters; ++i) {
        auto [p, q_next] = detail::de_step_impl(inner, classes, q, rho);
        double delta = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            delta = std::max(delta, std::abs(q_next[k] - q[k]));
            if (q_next[k] > q[k] + 1e-12) trace.monotone = false;
        }
        trace.p.push_back(std::move(p));
        trace.q.push_back(q_next);
        q = std::move(q_next);
        trace.iterations_used = i + 1;
        if (delta < tol) {
            trace.converged = true;
            break;
        }
    }
    return trace;
}

/// Packet success probabilities implied by the last receiver-end failure
/// probabilities of a finished trace.
inline std::vector<double> coded_terminal_success(const std::vector<CodeSpec>& specs,
                                                  const DensityEvolutionTrace& trace) {
    const std::vector<double>& p = trace.final_p();
    if (p.size() != specs.size())
        throw ValidationError("coded_terminal_success: trace arity mismatch");
    std::vector<double> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double v =
            1.0 - detail::block_failure_sum(specs[k].dd, specs[k].blocks_needed, p[k]);
        out[k] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return out;
}

/// Coding closure: users protect packets with per-class codes and spread the
/// blocks over many copies of the inner receiver; the whole system is again
/// a receiver in the external classes. Evaluation runs the recursion at the
/// given normalized load and applies the terminal success formula to the
/// last receiver-end failure probabilities.
inline PoissonReceiver code(const PoissonReceiver& inner, const std::vector<CodeSpec>& specs,
                            int max_iters = 100, double tol = 1e-12) {
    detail::compile_specs(inner, specs);  // validate arity up front
    auto fn = [inner, specs, max_iters, tol](const OfferedLoad& g) {
        const DensityEvolutionTrace trace = de_trace(inner, specs, g, max_iters, tol);
        return coded_terminal_success(specs, trace);
    };
    return PoissonReceiver(specs.size(), std::move(fn), inner.normal_hint(),
                           "code(" + inner.name() + ")");
}

}  // namespace cra
