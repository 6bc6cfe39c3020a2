#pragma once

#include <cstdint>
#include <string>

#include "opdyn/population.hpp"

namespace opdyn::app {

/// Resolved run configuration. Defaults are the validated reference setup:
/// 80000 agents on a Watts-Strogatz graph with k=8, p=0.2, bias strength
/// epsilon=0.05, convergence tolerance 1e-8.
struct RunConfig {
    std::uint64_t n_agents = 80000;
    std::uint32_t k_ring = 8;
    double p_rewire = 0.2;
    double epsilon = 0.05;
    double tolerance = 1e-8;
    std::uint64_t max_iterations = 10000;
    std::uint64_t seed = 1;
    std::string regions_path;
    bool synthetic = false;
    std::string output_dir = "out";
    std::uint64_t snapshot_every = 0; // 0 disables state snapshots
    std::uint64_t train_size = 300;
    std::uint32_t n_sources = 100;
    int threads = 0; // 0 keeps the runtime default; never echoed (results are thread-invariant)
    std::string save_graph_path;
    std::string export_assignment_path;
    population::SyntheticDataParams synth;
};

/// Flat key=value file, '#' comments allowed; unknown keys are rejected.
void apply_config_file(RunConfig& cfg, const std::string& path);

int cmd_simulate(const RunConfig& cfg);
int cmd_shuffle(const RunConfig& cfg);
int cmd_regress(const RunConfig& cfg);
int cmd_pathlen(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);

/// Full dispatch: subcommand + flags -> exit status. 0 = success (including a
/// reported non-convergence), 1 = input/config error, 2 = numerical error.
int run_cli(int argc, const char* const* argv);

} // namespace opdyn::app
