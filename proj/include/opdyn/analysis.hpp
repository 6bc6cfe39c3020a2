#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/dynamics.hpp"
#include "opdyn/population.hpp"

namespace opdyn::analysis {

struct RegionPrediction {
    std::string region_id;
    std::uint64_t n_agents = 0;
    std::optional<double> predicted_rate; // absent for regions with no agents
    std::optional<double> measured_rate;
};

/// predicted_rate = mean of opinion column 0 over each region's interval.
std::vector<RegionPrediction> region_means(const dynamics::OpinionMatrix& state,
                                           const population::AgentAllocation& alloc,
                                           const population::RegionTable& table);

/// Mean of opinion column `option` over all agents.
double column_mean(const dynamics::OpinionMatrix& state, std::uint32_t option);

struct PairedError {
    double mse = 0.0;
    double rmse = 0.0;
    std::size_t n_pairs = 0;
    std::size_t n_skipped = 0; // predictions without a measurement
};

/// Squared-error metrics over prediction/measurement pairs, on fractions.
/// Pairs lacking either side are skipped and counted; zero usable pairs is an
/// error.
PairedError paired_error(const std::vector<RegionPrediction>& predictions);
double mse(const std::vector<double>& predictions, const std::vector<double>& measurements);
double rmse(const std::vector<double>& predictions, const std::vector<double>& measurements);

struct Histogram {
    std::vector<double> bin_edges;      // n_bins + 1, strictly increasing
    std::vector<std::uint64_t> counts;  // n_bins
    std::uint64_t out_of_range = 0;
};

/// Equal-width bins over [lo, hi), left-closed right-open, last bin closed.
/// Defaults match the reporting convention: 80 bins over percent values 0-100.
Histogram histogram(const std::vector<double>& values, std::uint32_t n_bins = 80,
                    double lo = 0.0, double hi = 100.0);

struct RegressionModel {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t n_train = 0;
};

/// Ordinary least squares for one predictor, closed-form normal equations.
RegressionModel fit_linear(const std::vector<std::pair<double, double>>& train);

struct Prediction {
    double value = 0.0;
    bool clamped = false;
};

/// slope*x + intercept clamped to [0, 1]; reports whether the clamp fired.
Prediction predict_linear(const RegressionModel& model, double x);

struct DispersionSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0; // population form
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

/// Summary statistics over the regional predicted rates (regions without
/// agents are ignored).
DispersionSummary dispersion_report(const std::vector<RegionPrediction>& predictions);
DispersionSummary dispersion_report(const std::vector<double>& values);

} // namespace opdyn::analysis
