// Benchmark of the OpenMP update kernel against the serial reference path,
// plus the BFS fan-out used for path-length sampling. The two step
// implementations must agree bit for bit; the benchmark aborts if they do not.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "opdyn/dynamics.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/population.hpp"
#include "opdyn/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

opdyn::population::BiasAssignment half_split_biases(std::uint64_t n) {
    opdyn::population::BiasAssignment assign;
    assign.epsilon = 0.05;
    assign.group.resize(n);
    for (std::uint64_t i = 0; i < n; ++i)
        assign.group[i] = i < n / 2 ? opdyn::population::Group::a : opdyn::population::Group::b;
    return assign;
}

} // namespace

int main(int argc, char** argv) {
    std::uint32_t n = 20000;
    std::uint32_t k_ring = 8;
    int iters = 50;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--n")) n = static_cast<std::uint32_t>(std::stoul(argv[i + 1]));
        else if (!std::strcmp(argv[i], "--k")) k_ring = static_cast<std::uint32_t>(std::stoul(argv[i + 1]));
        else if (!std::strcmp(argv[i], "--iters")) iters = std::stoi(argv[i + 1]);
        else {
            std::fprintf(stderr, "usage: %s [--n N] [--k K] [--iters I]\n", argv[0]);
            return 1;
        }
    }

    const auto g = opdyn::graph::generate_watts_strogatz({n, k_ring, 0.2, 42});
    const auto bias = opdyn::dynamics::bias_matrix(half_split_biases(n));
    auto state = opdyn::dynamics::init_opinions(n, 2);
    // Walk a few steps away from the uniform start so the kernels see a
    // heterogeneous state.
    for (int t = 0; t < 3; ++t) state = opdyn::dynamics::step(state, g, bias);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("step kernel: n=%u k=%u iters=%d\n", n, k_ring, iters);

    auto serial_out = state;
    auto t0 = Clock::now();
    for (int t = 0; t < iters; ++t)
        serial_out = opdyn::dynamics::step_reference(state, g, bias);
    const double serial_ms = ms_since(t0) / iters;

    opdyn::dynamics::OpinionMatrix parallel_out;
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    t0 = Clock::now();
    for (int t = 0; t < iters; ++t)
        opdyn::dynamics::step_into(state, g, bias, parallel_out);
    const double kernel_1t_ms = ms_since(t0) / iters;

#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
    t0 = Clock::now();
    for (int t = 0; t < iters; ++t)
        opdyn::dynamics::step_into(state, g, bias, parallel_out);
    const double kernel_ms = ms_since(t0) / iters;

    if (serial_out.values != parallel_out.values) {
        std::fprintf(stderr, "FATAL: parallel step disagrees with the serial reference\n");
        return 1;
    }
    std::printf("  serial reference:    %8.3f ms/iter\n", serial_ms);
    std::printf("  kernel, 1 thread:    %8.3f ms/iter  (%.2fx vs reference)\n", kernel_1t_ms,
                serial_ms / kernel_1t_ms);
    std::printf("  kernel, %d threads:  %8.3f ms/iter  (%.2fx scaling, %.2fx vs reference)\n",
                threads, kernel_ms, kernel_1t_ms / kernel_ms, serial_ms / kernel_ms);

    t0 = Clock::now();
    const double apl = opdyn::graph::sampled_average_path_length(g, std::min(n, 100u), 7);
    std::printf("bfs fan-out: 100 sources in %.1f ms (sampled path length %.3f)\n", ms_since(t0),
                apl);
    return 0;
}
