#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "opdyn/graph.hpp"
#include "opdyn/population.hpp"

namespace opdyn::dynamics {

/// n_agents x n_options row-stochastic state; every row lies on the unit
/// simplex (nonnegative, summing to 1 within 1e-12).
struct OpinionMatrix {
    std::uint64_t n_agents = 0;
    std::uint32_t n_options = 0;
    std::vector<double> values; // row-major

    double* row(std::uint64_t i) { return values.data() + i * n_options; }
    const double* row(std::uint64_t i) const { return values.data() + i * n_options; }
    double at(std::uint64_t i, std::uint32_t c) const { return values[i * n_options + c]; }
};

/// Per-agent predisposition weights (the diagonal of each agent's bias
/// matrix); all entries strictly positive. Same layout as OpinionMatrix.
struct BiasMatrix {
    std::uint64_t n_agents = 0;
    std::uint32_t n_options = 0;
    std::vector<double> values;

    const double* row(std::uint64_t i) const { return values.data() + i * n_options; }
};

/// [1-eps, eps] rows for group a, mirrored for group b.
BiasMatrix bias_matrix(const population::BiasAssignment& assign);

struct ConvergenceSettings {
    double tolerance = 1e-8;           // max-over-agents L1 step change
    std::uint64_t max_iterations = 10000;
};

struct RunResult {
    OpinionMatrix final_state;
    std::uint64_t iterations_used = 0;
    bool converged = false;
    double final_residual = 0.0;
};

/// All rows equal to `point` (default: the uniform vector). Points on the
/// simplex boundary are rejected: they sit in the basin of the vertex fixed
/// points and never leave it.
OpinionMatrix init_opinions(std::uint64_t n_agents, std::uint32_t n_options,
                            const std::optional<std::vector<double>>& point = std::nullopt);

/// One synchronous update of every agent:
///   new_i = (x_i + R_i * sum_{j in N(i)} x_j) / || ... ||_1,
/// every read from `in`, every write to `out`. The neighbor sum runs in
/// ascending neighbor order per agent, so the result is bit-identical for any
/// OpenMP worker count.
void step_into(const OpinionMatrix& in, const graph::Graph& g, const BiasMatrix& biases,
               OpinionMatrix& out);

OpinionMatrix step(const OpinionMatrix& state, const graph::Graph& g, const BiasMatrix& biases);

/// Serial per-agent reference evaluation of the same update. Kept as the
/// oracle for the parallel kernel and as the baseline in the benchmark;
/// deliberately written as plain scalar loops.
OpinionMatrix step_reference(const OpinionMatrix& state, const graph::Graph& g,
                             const BiasMatrix& biases);

/// Max over agents of the L1 row change between two states.
double max_row_l1_delta(const OpinionMatrix& a, const OpinionMatrix& b);

using IterationObserver =
    std::function<void(std::uint64_t iteration, const OpinionMatrix& state)>;

/// Iterate step_into until the residual drops below tolerance or
/// max_iterations is reached. Non-convergence is reported in the result, not
/// thrown; NaN in the state aborts with NumericalError.
RunResult run(OpinionMatrix initial, const graph::Graph& g, const BiasMatrix& biases,
              const ConvergenceSettings& settings, const IterationObserver& observer = {});

} // namespace opdyn::dynamics
