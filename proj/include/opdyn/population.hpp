#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace opdyn::population {

/// A rate held as an exact decimal: millionths of a fraction (1e-6 steps, so
/// percentages with up to four decimal places are represented exactly).
/// Per-region head counts are rounded half-up from this integer form, which
/// keeps the rounding independent of binary floating point.
struct Rate {
    std::uint32_t ppm = 0; // 0 .. 1'000'000

    double fraction() const { return static_cast<double>(ppm) * 1e-6; }
    bool operator==(const Rate&) const = default;

    static Rate from_fraction(double f);               // clamps to [0,1], rounds to nearest ppm
    static Rate parse_percent(const std::string& text); // "64.5" -> 645000 ppm
    std::string to_percent_string() const;              // 645000 -> "64.5"
};

struct RegionRecord {
    std::string region_id;
    std::string municipality_id;
    std::uint64_t population = 0;
    Rate predictor;                // e.g. vaccination coverage
    std::optional<Rate> outcome;   // e.g. measured participation
};

/// Records sorted by (municipality_id, region_id); region ids unique.
struct RegionTable {
    std::vector<RegionRecord> records;

    std::uint64_t total_population() const;
    std::size_t n_with_outcome() const;
};

/// Contiguous per-region agent index intervals [begin, end), laid out in
/// table order and partitioning [0, n_total).
struct AgentAllocation {
    struct Range {
        std::uint64_t begin = 0;
        std::uint64_t end = 0;
        std::uint64_t length() const { return end - begin; }
    };
    std::vector<Range> ranges;
    std::uint64_t n_total = 0;
};

enum class Group : std::uint8_t { a = 0, b = 1 }; // a = affirmative option, opinion index 0

/// Per-agent group label plus the bias strength epsilon. Group a carries the
/// bias vector [1-eps, eps], group b the mirrored one.
struct BiasAssignment {
    double epsilon = 0.0;
    std::vector<Group> group;

    std::uint64_t count_group_a() const;
};

struct SyntheticDataParams {
    std::uint32_t n_regions = 3363;
    std::uint32_t n_municipalities = 290;
    double slope = 0.8;
    double intercept = 0.2;
    double noise_scale = 0.02;
    double heteroscedastic_center = 0.65; // residual spread grows away from this predictor value
    double heteroscedastic_gain = 4.0;
    double predictor_lo = 0.30;
    double predictor_hi = 0.98;
    std::uint64_t population_lo = 300;
    std::uint64_t population_hi = 30000;
    std::uint64_t seed = 0;
};

/// CSV schema: "region_id,municipality_id,population,predictor_pct,outcome_pct",
/// rates as percentages 0-100, outcome_pct may be empty. Output is sorted by
/// (municipality_id, region_id). Parse failures name the offending line.
RegionTable load_regions(std::istream& in);
void save_regions(const RegionTable& table, std::ostream& out);

/// Largest-remainder apportionment of n_total agents by population share;
/// leftover agents go to regions by descending fractional remainder, ties in
/// table order. Computed in exact integer arithmetic.
AgentAllocation allocate_agents(const RegionTable& table, std::uint64_t n_total);

/// Within each region's interval the first round-half-up(length * predictor)
/// agents join group a, the rest group b.
BiasAssignment assign_biases(const AgentAllocation& alloc, const RegionTable& table,
                             double epsilon);

/// Uniform random permutation of the group labels; epsilon and the global
/// label counts are unchanged.
BiasAssignment shuffle_biases(const BiasAssignment& assign, std::uint64_t seed);

/// Synthetic region table shaped like the real data: log-uniform populations,
/// predictor rates uniform on [predictor_lo, predictor_hi], outcomes on a
/// linear trend with noise whose spread grows away from heteroscedastic_center.
RegionTable synthesize_regions(const SyntheticDataParams& params);

/// CSV "agent_id,region_id,group" for every agent.
void save_assignment(const AgentAllocation& alloc, const RegionTable& table,
                     const BiasAssignment& assign, std::ostream& out);

} // namespace opdyn::population
