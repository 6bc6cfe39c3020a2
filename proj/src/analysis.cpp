#include "opdyn/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "opdyn/errors.hpp"

namespace opdyn::analysis {

std::vector<RegionPrediction> region_means(const dynamics::OpinionMatrix& state,
                                           const population::AgentAllocation& alloc,
                                           const population::RegionTable& table) {
    if (alloc.ranges.size() != table.records.size())
        throw InputError("region_means: allocation and table sizes differ");
    if (alloc.n_total != state.n_agents)
        throw InputError("region_means: allocation covers " + std::to_string(alloc.n_total) +
                         " agents but the state has " + std::to_string(state.n_agents));

    std::vector<RegionPrediction> out;
    out.reserve(table.records.size());
    for (std::size_t r = 0; r < table.records.size(); ++r) {
        const auto& range = alloc.ranges[r];
        RegionPrediction pred;
        pred.region_id = table.records[r].region_id;
        pred.n_agents = range.length();
        if (range.length() > 0) {
            double sum = 0.0;
            for (std::uint64_t i = range.begin; i < range.end; ++i) sum += state.at(i, 0);
            pred.predicted_rate = sum / static_cast<double>(range.length());
        }
        if (table.records[r].outcome) pred.measured_rate = table.records[r].outcome->fraction();
        out.push_back(std::move(pred));
    }
    return out;
}

double column_mean(const dynamics::OpinionMatrix& state, std::uint32_t option) {
    if (state.n_agents == 0) throw InputError("column_mean: empty state");
    if (option >= state.n_options) throw InputError("column_mean: option out of range");
    double sum = 0.0;
    for (std::uint64_t i = 0; i < state.n_agents; ++i) sum += state.at(i, option);
    return sum / static_cast<double>(state.n_agents);
}

PairedError paired_error(const std::vector<RegionPrediction>& predictions) {
    PairedError err;
    double sum_sq = 0.0;
    for (const auto& p : predictions) {
        if (p.predicted_rate && p.measured_rate) {
            const double d = *p.predicted_rate - *p.measured_rate;
            sum_sq += d * d;
            ++err.n_pairs;
        } else {
            ++err.n_skipped;
        }
    }
    if (err.n_pairs == 0) throw InputError("paired_error: no comparable prediction/measurement pairs");
    err.mse = sum_sq / static_cast<double>(err.n_pairs);
    err.rmse = std::sqrt(err.mse);
    return err;
}

double mse(const std::vector<double>& predictions, const std::vector<double>& measurements) {
    if (predictions.size() != measurements.size())
        throw InputError("mse: unaligned input lists");
    if (predictions.empty()) throw InputError("mse: no comparable pairs");
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - measurements[i];
        sum_sq += d * d;
    }
    return sum_sq / static_cast<double>(predictions.size());
}

double rmse(const std::vector<double>& predictions, const std::vector<double>& measurements) {
    return std::sqrt(mse(predictions, measurements));
}

Histogram histogram(const std::vector<double>& values, std::uint32_t n_bins, double lo,
                    double hi) {
    if (n_bins < 1) throw InputError("histogram: need at least one bin");
    if (!(lo < hi)) throw InputError("histogram: lo must be smaller than hi");

    Histogram h;
    h.bin_edges.resize(n_bins + 1);
    const double width = (hi - lo) / static_cast<double>(n_bins);
    for (std::uint32_t b = 0; b <= n_bins; ++b)
        h.bin_edges[b] = lo + width * static_cast<double>(b);
    h.bin_edges[n_bins] = hi;
    h.counts.assign(n_bins, 0);

    for (double v : values) {
        if (std::isnan(v) || v < lo || v > hi) {
            ++h.out_of_range;
            continue;
        }
        auto b = static_cast<std::uint32_t>((v - lo) / (hi - lo) * static_cast<double>(n_bins));
        if (b >= n_bins) b = n_bins - 1; // v == hi lands in the closed last bin
        ++h.counts[b];
    }
    return h;
}

RegressionModel fit_linear(const std::vector<std::pair<double, double>>& train) {
    if (train.size() < 2) throw InputError("fit_linear: need at least 2 training points");
    const auto n = static_cast<double>(train.size());
    double sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_xy = 0.0;
    for (const auto& [x, y] : train) {
        sum_x += x;
        sum_y += y;
        sum_xx += x * x;
        sum_xy += x * y;
    }
    const double denom = n * sum_xx - sum_x * sum_x;
    // denom is n^2 * var(x); compare against the magnitude of the x's so the
    // all-identical case is caught despite rounding noise.
    if (!(denom > 1e-12 * n * sum_xx))
        throw InputError("fit_linear: degenerate fit, all x values identical");
    RegressionModel model;
    model.slope = (n * sum_xy - sum_x * sum_y) / denom;
    model.intercept = (sum_y - model.slope * sum_x) / n;
    model.n_train = train.size();
    return model;
}

Prediction predict_linear(const RegressionModel& model, double x) {
    Prediction p;
    p.value = model.slope * x + model.intercept;
    if (p.value < 0.0) {
        p.value = 0.0;
        p.clamped = true;
    } else if (p.value > 1.0) {
        p.value = 1.0;
        p.clamped = true;
    }
    return p;
}

DispersionSummary dispersion_report(const std::vector<double>& values) {
    if (values.empty()) throw InputError("dispersion_report: no values");
    DispersionSummary s;
    s.count = values.size();
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
        s.mean = sorted.front(); // constant data: exact mean, exactly zero spread
        s.stddev = 0.0;
    } else {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(sq / n);
    }
    const auto quantile = [&](double q) {
        const double pos = q * (n - 1);
        const auto lo_idx = static_cast<std::size_t>(pos);
        const std::size_t hi_idx = std::min(lo_idx + 1, sorted.size() - 1);
        const double w = pos - static_cast<double>(lo_idx);
        return sorted[lo_idx] * (1.0 - w) + sorted[hi_idx] * w;
    };
    s.min = sorted.front();
    s.q25 = quantile(0.25);
    s.median = quantile(0.5);
    s.q75 = quantile(0.75);
    s.max = sorted.back();
    return s;
}

DispersionSummary dispersion_report(const std::vector<RegionPrediction>& predictions) {
    std::vector<double> values;
    values.reserve(predictions.size());
    for (const auto& p : predictions)
        if (p.predicted_rate) values.push_back(*p.predicted_rate);
    return dispersion_report(values);
}

} // namespace opdyn::analysis
