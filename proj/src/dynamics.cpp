#include "opdyn/dynamics.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "opdyn/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace opdyn::dynamics {

namespace {

void check_dimensions(const OpinionMatrix& state, const graph::Graph& g,
                      const BiasMatrix& biases) {
    if (state.n_agents != g.n_nodes)
        throw InputError("dynamics: state has " + std::to_string(state.n_agents) +
                         " agents but graph has " + std::to_string(g.n_nodes) + " nodes");
    if (biases.n_agents != state.n_agents || biases.n_options != state.n_options)
        throw InputError("dynamics: bias dimensions do not match the state");
    if (state.n_options < 2) throw InputError("dynamics: need at least 2 options");
}

} // namespace

BiasMatrix bias_matrix(const population::BiasAssignment& assign) {
    BiasMatrix biases;
    biases.n_agents = assign.group.size();
    biases.n_options = 2;
    biases.values.resize(biases.n_agents * 2);
    const double eps = assign.epsilon;
    for (std::uint64_t i = 0; i < biases.n_agents; ++i) {
        const bool pro = assign.group[i] == population::Group::a;
        biases.values[2 * i] = pro ? 1.0 - eps : eps;
        biases.values[2 * i + 1] = pro ? eps : 1.0 - eps;
    }
    return biases;
}

OpinionMatrix init_opinions(std::uint64_t n_agents, std::uint32_t n_options,
                            const std::optional<std::vector<double>>& point) {
    if (n_options < 2) throw InputError("init_opinions: need at least 2 options");
    std::vector<double> row;
    if (point) {
        row = *point;
        if (row.size() != n_options)
            throw InputError("init_opinions: point has wrong dimension");
        double sum = 0.0;
        for (double v : row) {
            if (!(v >= 0.0)) throw InputError("init_opinions: point is not on the simplex");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw InputError("init_opinions: point entries must sum to 1");
        for (double v : row)
            if (v == 0.0)
                throw InputError(
                    "init_opinions: point lies on the simplex boundary; boundary states are "
                    "vertex fixed points of the update and would never move");
    } else {
        row.assign(n_options, 1.0 / static_cast<double>(n_options));
    }
    OpinionMatrix state;
    state.n_agents = n_agents;
    state.n_options = n_options;
    state.values.resize(n_agents * n_options);
    for (std::uint64_t i = 0; i < n_agents; ++i)
        for (std::uint32_t c = 0; c < n_options; ++c) state.values[i * n_options + c] = row[c];
    return state;
}

void step_into(const OpinionMatrix& in, const graph::Graph& g, const BiasMatrix& biases,
               OpinionMatrix& out) {
    check_dimensions(in, g, biases);
    out.n_agents = in.n_agents;
    out.n_options = in.n_options;
    out.values.resize(in.values.size());

    const std::uint32_t k = in.n_options;
    const double* x = in.values.data();
    const double* r = biases.values.data();
    double* y = out.values.data();
    const auto n = static_cast<std::int64_t>(in.n_agents);

    if (k == 2) {
        // Hot path for binary options; same accumulation order as the generic
        // loop, so both produce identical bits.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t i = 0; i < n; ++i) {
            double s0 = 0.0, s1 = 0.0;
            const std::uint64_t begin = g.row_offsets[i], end = g.row_offsets[i + 1];
            for (std::uint64_t t = begin; t < end; ++t) {
                const std::uint64_t j = g.neighbor_ids[t];
                s0 += x[2 * j];
                s1 += x[2 * j + 1];
            }
            const double num0 = x[2 * i] + r[2 * i] * s0;
            const double num1 = x[2 * i + 1] + r[2 * i + 1] * s1;
            const double norm = num0 + num1;
            assert(norm > 0.0);
            y[2 * i] = num0 / norm;
            y[2 * i + 1] = num1 / norm;
        }
        return;
    }

#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<double> acc(k);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::uint32_t c = 0; c < k; ++c) acc[c] = 0.0;
            const std::uint64_t begin = g.row_offsets[i], end = g.row_offsets[i + 1];
            for (std::uint64_t t = begin; t < end; ++t) {
                const double* xj = x + static_cast<std::uint64_t>(g.neighbor_ids[t]) * k;
                for (std::uint32_t c = 0; c < k; ++c) acc[c] += xj[c];
            }
            const double* xi = x + static_cast<std::uint64_t>(i) * k;
            const double* ri = r + static_cast<std::uint64_t>(i) * k;
            double* yi = y + static_cast<std::uint64_t>(i) * k;
            double norm = 0.0;
            for (std::uint32_t c = 0; c < k; ++c) {
                yi[c] = xi[c] + ri[c] * acc[c];
                norm += yi[c];
            }
            assert(norm > 0.0);
            for (std::uint32_t c = 0; c < k; ++c) yi[c] /= norm;
        }
    }
}

OpinionMatrix step(const OpinionMatrix& state, const graph::Graph& g, const BiasMatrix& biases) {
    OpinionMatrix out;
    step_into(state, g, biases, out);
    return out;
}

OpinionMatrix step_reference(const OpinionMatrix& state, const graph::Graph& g,
                             const BiasMatrix& biases) {
    check_dimensions(state, g, biases);
    const std::uint32_t k = state.n_options;
    OpinionMatrix out;
    out.n_agents = state.n_agents;
    out.n_options = k;
    out.values.resize(state.values.size());
    for (std::uint64_t i = 0; i < state.n_agents; ++i) {
        std::vector<double> numerator(k);
        for (std::uint32_t c = 0; c < k; ++c) numerator[c] = 0.0;
        for (std::uint32_t j : g.neighbors(static_cast<std::uint32_t>(i)))
            for (std::uint32_t c = 0; c < k; ++c) numerator[c] += state.at(j, c);
        double norm = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) {
            numerator[c] = state.at(i, c) + biases.row(i)[c] * numerator[c];
            norm += numerator[c];
        }
        for (std::uint32_t c = 0; c < k; ++c) out.row(i)[c] = numerator[c] / norm;
    }
    return out;
}

double max_row_l1_delta(const OpinionMatrix& a, const OpinionMatrix& b) {
    if (a.n_agents != b.n_agents || a.n_options != b.n_options)
        throw InputError("max_row_l1_delta: shape mismatch");
    const std::uint32_t k = a.n_options;
    const auto n = static_cast<std::int64_t>(a.n_agents);
    double residual = 0.0;
    int saw_nan = 0; // tracked separately: NaN would vanish in a max reduction
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : residual) reduction(| : saw_nan)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::uint32_t c = 0; c < k; ++c)
            d += std::abs(a.values[i * k + c] - b.values[i * k + c]);
        if (std::isnan(d)) saw_nan = 1;
        if (d > residual) residual = d;
    }
    return saw_nan ? std::numeric_limits<double>::quiet_NaN() : residual;
}

RunResult run(OpinionMatrix initial, const graph::Graph& g, const BiasMatrix& biases,
              const ConvergenceSettings& settings, const IterationObserver& observer) {
    if (!(settings.tolerance > 0.0)) throw InputError("run: tolerance must be positive");
    if (settings.max_iterations < 1) throw InputError("run: max_iterations must be >= 1");
    check_dimensions(initial, g, biases);

    RunResult result;
    OpinionMatrix current = std::move(initial);
    OpinionMatrix next;
    for (std::uint64_t iter = 1; iter <= settings.max_iterations; ++iter) {
        step_into(current, g, biases, next);
        const double residual = max_row_l1_delta(current, next);
        if (std::isnan(residual))
            throw NumericalError("run: NaN in the state at iteration " + std::to_string(iter));
        std::swap(current, next);
        result.iterations_used = iter;
        result.final_residual = residual;
        if (observer) observer(iter, current);
        if (residual < settings.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.final_state = std::move(current);
    return result;
}

} // namespace opdyn::dynamics
