#include "opdyn/app.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "opdyn/analysis.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/errors.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace opdyn::app {

namespace {

namespace fs = std::filesystem;

// Fixed sub-seed streams per stochastic stage, derived from the master seed.
enum SeedStream : std::uint64_t {
    kGraphStream = 1,
    kShuffleStream = 2,
    kSynthStream = 3,
    kSplitStream = 4,
    kSourcesStream = 5,
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_pct(double fraction) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", fraction * 100.0);
    return buf;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    const fs::path path = fs::path(cfg.output_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open output file " + path.string());
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InputError("expected an unsigned integer for " + key + ", got '" + value + "'");
    }
}

double parse_f64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InputError("expected a number for " + key + ", got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw InputError("expected 0/1/true/false for " + key + ", got '" + value + "'");
}

// Shared by config-file keys and command-line flags; flag names use dashes,
// file keys use underscores.
bool apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "n_agents") cfg.n_agents = parse_u64(key, value);
    else if (key == "k_ring") cfg.k_ring = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "p_rewire") cfg.p_rewire = parse_f64(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_f64(key, value);
    else if (key == "tolerance") cfg.tolerance = parse_f64(key, value);
    else if (key == "max_iterations") cfg.max_iterations = parse_u64(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "regions") cfg.regions_path = value;
    else if (key == "synthetic") cfg.synthetic = parse_bool(key, value);
    else if (key == "output") cfg.output_dir = value;
    else if (key == "snapshot_every") cfg.snapshot_every = parse_u64(key, value);
    else if (key == "train_size") cfg.train_size = parse_u64(key, value);
    else if (key == "n_sources") cfg.n_sources = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "threads") cfg.threads = static_cast<int>(parse_u64(key, value));
    else if (key == "save_graph") cfg.save_graph_path = value;
    else if (key == "export_assignment") cfg.export_assignment_path = value;
    else if (key == "synth_regions") cfg.synth.n_regions = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "synth_municipalities") cfg.synth.n_municipalities = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "synth_slope") cfg.synth.slope = parse_f64(key, value);
    else if (key == "synth_intercept") cfg.synth.intercept = parse_f64(key, value);
    else if (key == "synth_noise") cfg.synth.noise_scale = parse_f64(key, value);
    else if (key == "synth_center") cfg.synth.heteroscedastic_center = parse_f64(key, value);
    else if (key == "synth_gain") cfg.synth.heteroscedastic_gain = parse_f64(key, value);
    else if (key == "synth_predictor_lo") cfg.synth.predictor_lo = parse_f64(key, value);
    else if (key == "synth_predictor_hi") cfg.synth.predictor_hi = parse_f64(key, value);
    else if (key == "synth_pop_lo") cfg.synth.population_lo = parse_u64(key, value);
    else if (key == "synth_pop_hi") cfg.synth.population_hi = parse_u64(key, value);
    else return false;
    return true;
}

// The echoed configuration is sufficient to reproduce the run byte for byte.
// threads and output are deliberately absent: neither influences the computed
// results.
void write_config_echo(const RunConfig& cfg, const std::string& command, std::ostream& out) {
    out << "command=" << command << '\n'
        << "seed=" << cfg.seed << '\n'
        << "n_agents=" << cfg.n_agents << '\n'
        << "k_ring=" << cfg.k_ring << '\n'
        << "p_rewire=" << fmt(cfg.p_rewire) << '\n'
        << "epsilon=" << fmt(cfg.epsilon) << '\n'
        << "tolerance=" << fmt(cfg.tolerance) << '\n'
        << "max_iterations=" << cfg.max_iterations << '\n'
        << "regions=" << cfg.regions_path << '\n'
        << "synthetic=" << (cfg.synthetic ? 1 : 0) << '\n'
        << "snapshot_every=" << cfg.snapshot_every << '\n'
        << "train_size=" << cfg.train_size << '\n'
        << "n_sources=" << cfg.n_sources << '\n'
        << "save_graph=" << cfg.save_graph_path << '\n'
        << "export_assignment=" << cfg.export_assignment_path << '\n'
        << "synth_regions=" << cfg.synth.n_regions << '\n'
        << "synth_municipalities=" << cfg.synth.n_municipalities << '\n'
        << "synth_slope=" << fmt(cfg.synth.slope) << '\n'
        << "synth_intercept=" << fmt(cfg.synth.intercept) << '\n'
        << "synth_noise=" << fmt(cfg.synth.noise_scale) << '\n'
        << "synth_center=" << fmt(cfg.synth.heteroscedastic_center) << '\n'
        << "synth_gain=" << fmt(cfg.synth.heteroscedastic_gain) << '\n'
        << "synth_predictor_lo=" << fmt(cfg.synth.predictor_lo) << '\n'
        << "synth_predictor_hi=" << fmt(cfg.synth.predictor_hi) << '\n'
        << "synth_pop_lo=" << cfg.synth.population_lo << '\n'
        << "synth_pop_hi=" << cfg.synth.population_hi << '\n';
}

population::RegionTable load_table(const RunConfig& cfg) {
    if (cfg.synthetic) {
        population::SyntheticDataParams params = cfg.synth;
        params.seed = derive_seed(cfg.seed, kSynthStream);
        return population::synthesize_regions(params);
    }
    if (cfg.regions_path.empty())
        throw InputError("no region data: give --regions PATH or --synthetic");
    std::ifstream in(cfg.regions_path);
    if (!in) throw InputError("cannot open regions file " + cfg.regions_path);
    return population::load_regions(in);
}

graph::Graph build_graph(const RunConfig& cfg) {
    if (cfg.n_agents > 0xffffffffull)
        throw InputError("n_agents exceeds the supported node-id range");
    graph::WattsStrogatzParams params;
    params.n_nodes = static_cast<std::uint32_t>(cfg.n_agents);
    params.k_ring = cfg.k_ring;
    params.p_rewire = cfg.p_rewire;
    params.seed = derive_seed(cfg.seed, kGraphStream);
    return graph::generate_watts_strogatz(params);
}

void write_predictions_csv(const std::vector<analysis::RegionPrediction>& preds,
                           std::ostream& out) {
    out << "region_id,n_agents,predicted_pct,measured_pct\n";
    for (const auto& p : preds) {
        out << p.region_id << ',' << p.n_agents << ',';
        if (p.predicted_rate) out << fmt_pct(*p.predicted_rate);
        out << ',';
        if (p.measured_rate) out << fmt_pct(*p.measured_rate);
        out << '\n';
    }
}

void write_histogram_csv(const analysis::Histogram& h, std::ostream& out) {
    out << "bin_lo,bin_hi,count\n";
    char lo[40], hi[40];
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        std::snprintf(lo, sizeof(lo), "%.10g", h.bin_edges[b]);
        std::snprintf(hi, sizeof(hi), "%.10g", h.bin_edges[b + 1]);
        out << lo << ',' << hi << ',' << h.counts[b] << '\n';
    }
}

std::vector<double> predicted_pct_values(const std::vector<analysis::RegionPrediction>& preds) {
    std::vector<double> values;
    values.reserve(preds.size());
    for (const auto& p : preds)
        if (p.predicted_rate) values.push_back(*p.predicted_rate * 100.0);
    return values;
}

std::vector<double> measured_pct_values(const std::vector<analysis::RegionPrediction>& preds) {
    std::vector<double> values;
    for (const auto& p : preds)
        if (p.measured_rate) values.push_back(*p.measured_rate * 100.0);
    return values;
}

using MetricList = std::vector<std::pair<std::string, std::string>>;

void write_metrics(const MetricList& metrics, std::ostream& out) {
    for (const auto& [key, value] : metrics) out << key << '=' << value << '\n';
}

void write_snapshot(const dynamics::OpinionMatrix& state, std::ostream& out) {
    out << "agent_id";
    for (std::uint32_t c = 0; c < state.n_options; ++c) out << ",x" << c;
    out << '\n';
    for (std::uint64_t i = 0; i < state.n_agents; ++i) {
        out << i;
        for (std::uint32_t c = 0; c < state.n_options; ++c) out << ',' << fmt(state.at(i, c));
        out << '\n';
    }
}

struct SimulationOutcome {
    dynamics::RunResult result;
    std::vector<analysis::RegionPrediction> predictions;
};

SimulationOutcome run_pipeline(const RunConfig& cfg, const graph::Graph& g,
                               const population::RegionTable& table,
                               const population::AgentAllocation& alloc,
                               const population::BiasAssignment& biases,
                               const std::string& snapshot_prefix) {
    auto state = dynamics::init_opinions(cfg.n_agents, 2);
    const auto bias = dynamics::bias_matrix(biases);
    dynamics::ConvergenceSettings settings{cfg.tolerance, cfg.max_iterations};

    dynamics::IterationObserver observer;
    if (cfg.snapshot_every > 0) {
        observer = [&cfg, &snapshot_prefix](std::uint64_t iter, const dynamics::OpinionMatrix& s) {
            if (iter % cfg.snapshot_every != 0) return;
            char name[64];
            std::snprintf(name, sizeof(name), "%ssnapshot_%06" PRIu64 ".csv",
                          snapshot_prefix.c_str(), iter);
            auto out = open_output(cfg, name);
            write_snapshot(s, out);
        };
    }

    SimulationOutcome outcome;
    outcome.result = dynamics::run(std::move(state), g, bias, settings, observer);
    outcome.predictions = analysis::region_means(outcome.result.final_state, alloc, table);
    return outcome;
}

void report_convergence(const std::string& tag, const dynamics::RunResult& r) {
    std::cout << "[" << tag << "] iterations=" << r.iterations_used
              << " residual=" << fmt(r.final_residual)
              << " converged=" << (r.converged ? "true" : "false") << '\n';
    if (!r.converged)
        std::cout << "[" << tag << "] warning: tolerance not reached within max_iterations\n";
}

} // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (!apply_setting(cfg, key, value))
            throw InputError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
}

int cmd_simulate(const RunConfig& cfg) {
    const auto table = load_table(cfg);
    const auto g = build_graph(cfg);
    const auto alloc = population::allocate_agents(table, cfg.n_agents);
    const auto biases = population::assign_biases(alloc, table, cfg.epsilon);

    if (!cfg.save_graph_path.empty()) {
        std::ofstream out(cfg.save_graph_path, std::ios::binary);
        if (!out) throw InputError("cannot open " + cfg.save_graph_path);
        graph::save_edge_list(g, out);
    }
    if (!cfg.export_assignment_path.empty()) {
        std::ofstream out(cfg.export_assignment_path, std::ios::binary);
        if (!out) throw InputError("cannot open " + cfg.export_assignment_path);
        population::save_assignment(alloc, table, biases, out);
    }

    const auto outcome = run_pipeline(cfg, g, table, alloc, biases, "");
    report_convergence("simulate", outcome.result);

    {
        auto out = open_output(cfg, "predictions.csv");
        write_predictions_csv(outcome.predictions, out);
    }
    {
        auto out = open_output(cfg, "histogram.csv");
        write_histogram_csv(analysis::histogram(predicted_pct_values(outcome.predictions)), out);
    }
    const auto measured = measured_pct_values(outcome.predictions);
    if (!measured.empty()) {
        auto out = open_output(cfg, "histogram_measured.csv");
        write_histogram_csv(analysis::histogram(measured), out);
    }

    MetricList metrics;
    const auto dispersion = analysis::dispersion_report(outcome.predictions);
    bool has_pairs = false;
    for (const auto& p : outcome.predictions)
        has_pairs = has_pairs || (p.predicted_rate && p.measured_rate);
    if (has_pairs) {
        const auto err = analysis::paired_error(outcome.predictions);
        metrics.emplace_back("mse_model", fmt(err.mse));
        metrics.emplace_back("rmse_model", fmt(err.rmse));
        metrics.emplace_back("mse_pairs", std::to_string(err.n_pairs));
        metrics.emplace_back("mse_pairs_skipped", std::to_string(err.n_skipped));
    }
    metrics.emplace_back("stddev_regions", fmt(dispersion.stddev));
    metrics.emplace_back("mean_regions", fmt(dispersion.mean));
    metrics.emplace_back("mean_x0", fmt(analysis::column_mean(outcome.result.final_state, 0)));
    metrics.emplace_back("iterations_used", std::to_string(outcome.result.iterations_used));
    metrics.emplace_back("converged", outcome.result.converged ? "true" : "false");
    metrics.emplace_back("final_residual", fmt(outcome.result.final_residual));
    {
        auto out = open_output(cfg, "metrics.txt");
        write_metrics(metrics, out);
    }
    {
        auto out = open_output(cfg, "config.txt");
        write_config_echo(cfg, "simulate", out);
    }
    return 0;
}

int cmd_shuffle(const RunConfig& cfg) {
    const auto table = load_table(cfg);
    const auto g = build_graph(cfg);
    const auto alloc = population::allocate_agents(table, cfg.n_agents);
    const auto clustered = population::assign_biases(alloc, table, cfg.epsilon);
    const auto shuffled =
        population::shuffle_biases(clustered, derive_seed(cfg.seed, kShuffleStream));

    const auto outcome_c = run_pipeline(cfg, g, table, alloc, clustered, "clustered_");
    report_convergence("shuffle/clustered", outcome_c.result);
    const auto outcome_s = run_pipeline(cfg, g, table, alloc, shuffled, "shuffled_");
    report_convergence("shuffle/shuffled", outcome_s.result);

    {
        auto out = open_output(cfg, "predictions_clustered.csv");
        write_predictions_csv(outcome_c.predictions, out);
    }
    {
        auto out = open_output(cfg, "predictions_shuffled.csv");
        write_predictions_csv(outcome_s.predictions, out);
    }
    {
        auto out = open_output(cfg, "histogram_clustered.csv");
        write_histogram_csv(analysis::histogram(predicted_pct_values(outcome_c.predictions)), out);
    }
    {
        auto out = open_output(cfg, "histogram_shuffled.csv");
        write_histogram_csv(analysis::histogram(predicted_pct_values(outcome_s.predictions)), out);
    }

    const auto disp_c = analysis::dispersion_report(outcome_c.predictions);
    const auto disp_s = analysis::dispersion_report(outcome_s.predictions);
    MetricList metrics;
    metrics.emplace_back("stddev_regions_clustered", fmt(disp_c.stddev));
    metrics.emplace_back("stddev_regions_shuffled", fmt(disp_s.stddev));
    metrics.emplace_back("stddev_contrast", fmt(disp_c.stddev - disp_s.stddev));
    metrics.emplace_back("mean_x0_clustered",
                         fmt(analysis::column_mean(outcome_c.result.final_state, 0)));
    metrics.emplace_back("mean_x0_shuffled",
                         fmt(analysis::column_mean(outcome_s.result.final_state, 0)));
    metrics.emplace_back("iterations_used_clustered",
                         std::to_string(outcome_c.result.iterations_used));
    metrics.emplace_back("iterations_used_shuffled",
                         std::to_string(outcome_s.result.iterations_used));
    metrics.emplace_back("converged", (outcome_c.result.converged && outcome_s.result.converged)
                                          ? "true" : "false");
    {
        auto out = open_output(cfg, "metrics.txt");
        write_metrics(metrics, out);
    }
    {
        auto out = open_output(cfg, "config.txt");
        write_config_echo(cfg, "shuffle", out);
    }
    std::cout << "[shuffle] stddev clustered=" << fmt(disp_c.stddev)
              << " shuffled=" << fmt(disp_s.stddev) << '\n';
    return 0;
}

int cmd_regress(const RunConfig& cfg) {
    const auto table = load_table(cfg);

    std::vector<std::size_t> usable;
    for (std::size_t r = 0; r < table.records.size(); ++r)
        if (table.records[r].outcome) usable.push_back(r);
    if (usable.empty())
        throw InputError("regress: the regions file carries no outcome values");
    if (cfg.train_size < 2)
        throw InputError("regress: train_size must be at least 2");
    if (cfg.train_size >= usable.size())
        throw InputError("regress: train_size " + std::to_string(cfg.train_size) +
                         " must be smaller than the number of measured regions (" +
                         std::to_string(usable.size()) + ")");

    // Seeded uniform split without replacement.
    const auto perm = random_permutation(usable.size(), derive_seed(cfg.seed, kSplitStream));
    std::vector<bool> in_train(table.records.size(), false);
    for (std::uint64_t t = 0; t < cfg.train_size; ++t) in_train[usable[perm[t]]] = true;

    std::vector<std::pair<double, double>> train;
    train.reserve(cfg.train_size);
    for (std::size_t r : usable)
        if (in_train[r])
            train.emplace_back(table.records[r].predictor.fraction(),
                               table.records[r].outcome->fraction());
    const auto model = analysis::fit_linear(train);

    std::vector<double> eval_pred, eval_meas, eval_pred_pct;
    std::uint64_t clamp_count = 0;
    for (std::size_t r : usable) {
        if (in_train[r]) continue;
        const auto p = analysis::predict_linear(model, table.records[r].predictor.fraction());
        clamp_count += p.clamped ? 1 : 0;
        eval_pred.push_back(p.value);
        eval_meas.push_back(table.records[r].outcome->fraction());
        eval_pred_pct.push_back(p.value * 100.0);
    }
    const double mse_regression = analysis::mse(eval_pred, eval_meas);

    {
        auto out = open_output(cfg, "regression.csv");
        out << "region_id,predictor_pct,measured_pct,predicted_pct,split\n";
        for (std::size_t r : usable) {
            const auto& rec = table.records[r];
            const auto p = analysis::predict_linear(model, rec.predictor.fraction());
            out << rec.region_id << ',' << rec.predictor.to_percent_string() << ','
                << rec.outcome->to_percent_string() << ',' << fmt_pct(p.value) << ','
                << (in_train[r] ? "train" : "eval") << '\n';
        }
    }
    {
        auto out = open_output(cfg, "histogram_regression.csv");
        write_histogram_csv(analysis::histogram(eval_pred_pct), out);
    }
    MetricList metrics;
    metrics.emplace_back("mse_regression", fmt(mse_regression));
    metrics.emplace_back("rmse_regression", fmt(std::sqrt(mse_regression)));
    metrics.emplace_back("slope", fmt(model.slope));
    metrics.emplace_back("intercept", fmt(model.intercept));
    metrics.emplace_back("n_train", std::to_string(train.size()));
    metrics.emplace_back("n_eval", std::to_string(eval_pred.size()));
    metrics.emplace_back("clamp_count", std::to_string(clamp_count));
    {
        auto out = open_output(cfg, "metrics.txt");
        write_metrics(metrics, out);
    }
    {
        auto out = open_output(cfg, "config.txt");
        write_config_echo(cfg, "regress", out);
    }
    std::cout << "[regress] n_train=" << train.size() << " n_eval=" << eval_pred.size()
              << " mse=" << fmt(mse_regression) << '\n';
    return 0;
}

int cmd_pathlen(const RunConfig& cfg) {
    const auto g = build_graph(cfg);
    if (!cfg.save_graph_path.empty()) {
        std::ofstream out(cfg.save_graph_path, std::ios::binary);
        if (!out) throw InputError("cannot open " + cfg.save_graph_path);
        graph::save_edge_list(g, out);
    }
    const double sampled =
        graph::sampled_average_path_length(g, cfg.n_sources, derive_seed(cfg.seed, kSourcesStream));
    std::cout << "[pathlen] n_nodes=" << g.n_nodes << " n_sources=" << cfg.n_sources
              << " sampled_avg_path_length=" << fmt(sampled) << '\n';

    MetricList metrics;
    metrics.emplace_back("n_nodes", std::to_string(g.n_nodes));
    metrics.emplace_back("n_edges", std::to_string(g.n_edges()));
    metrics.emplace_back("n_sources", std::to_string(cfg.n_sources));
    metrics.emplace_back("sampled_avg_path_length", fmt(sampled));
    if (g.n_nodes <= 20000) {
        const double exact = graph::exact_average_path_length(g);
        std::cout << "[pathlen] exact_avg_path_length=" << fmt(exact) << '\n';
        metrics.emplace_back("exact_avg_path_length", fmt(exact));
    }
    {
        auto out = open_output(cfg, "pathlen.txt");
        write_metrics(metrics, out);
    }
    {
        auto out = open_output(cfg, "config.txt");
        write_config_echo(cfg, "pathlen", out);
    }
    return 0;
}

int cmd_synth(const RunConfig& cfg) {
    population::SyntheticDataParams params = cfg.synth;
    params.seed = derive_seed(cfg.seed, kSynthStream);
    const auto table = population::synthesize_regions(params);
    {
        auto out = open_output(cfg, "regions.csv");
        population::save_regions(table, out);
    }
    {
        auto out = open_output(cfg, "config.txt");
        write_config_echo(cfg, "synth", out);
    }
    std::cout << "[synth] wrote " << table.records.size() << " regions\n";
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    static const char* kUsage =
        "usage: opdyn <simulate|shuffle|regress|pathlen|synth> [flags]\n"
        "flags: --config PATH --seed U64 --threads N --output DIR --snapshot-every N\n"
        "       --synthetic --regions PATH --n-agents N --k-ring N --p-rewire X\n"
        "       --epsilon X --tolerance X --max-iterations N --train-size N\n"
        "       --n-sources N --save-graph PATH --export-assignment PATH\n"
        "       --synth-regions N --synth-municipalities N --synth-slope X\n"
        "       --synth-intercept X --synth-noise X --synth-center X --synth-gain X\n"
        "       --synth-predictor-lo X --synth-predictor-hi X --synth-pop-lo N --synth-pop-hi N\n";

    try {
        if (argc < 2) {
            std::cerr << kUsage;
            return 1;
        }
        const std::string command = argv[1];
        if (command == "--help" || command == "-h" || command == "help") {
            std::cout << kUsage;
            return 0;
        }

        RunConfig cfg;
        std::vector<std::pair<std::string, std::string>> flags;
        for (int i = 2; i < argc; ++i) {
            std::string flag = argv[i];
            if (flag.rfind("--", 0) != 0) throw InputError("unexpected argument '" + flag + "'");
            flag = flag.substr(2);
            for (char& c : flag)
                if (c == '-') c = '_';
            if (flag == "synthetic") {
                flags.emplace_back(flag, "1");
                continue;
            }
            if (i + 1 >= argc) throw InputError("flag --" + flag + " needs a value");
            flags.emplace_back(flag, argv[++i]);
        }
        // Config file first, then flags on top: flags win.
        for (const auto& [key, value] : flags)
            if (key == "config") apply_config_file(cfg, value);
        for (const auto& [key, value] : flags) {
            if (key == "config") continue;
            if (!apply_setting(cfg, key, value)) throw InputError("unknown flag --" + key);
        }

#ifdef _OPENMP
        if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

        if (command == "simulate") return cmd_simulate(cfg);
        if (command == "shuffle") return cmd_shuffle(cfg);
        if (command == "regress") return cmd_regress(cfg);
        if (command == "pathlen") return cmd_pathlen(cfg);
        if (command == "synth") return cmd_synth(cfg);
        std::cerr << "unknown subcommand '" << command << "'\n" << kUsage;
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace opdyn::app
