#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "opdyn/errors.hpp"
#include "opdyn/population.hpp"
#include "opdyn/rng.hpp"

using namespace opdyn;
using namespace opdyn::population;

namespace {

RegionTable table_from(const std::vector<RegionRecord>& records) {
    std::string csv = "region_id,municipality_id,population,predictor_pct,outcome_pct\n";
    for (const auto& r : records) {
        csv += r.region_id + "," + r.municipality_id + "," + std::to_string(r.population) + "," +
               r.predictor.to_percent_string() + ",";
        if (r.outcome) csv += r.outcome->to_percent_string();
        csv += "\n";
    }
    std::istringstream in(csv);
    return load_regions(in);
}

RegionRecord record(const std::string& id, const std::string& mun, std::uint64_t pop,
                    std::uint32_t predictor_ppm) {
    RegionRecord r;
    r.region_id = id;
    r.municipality_id = mun;
    r.population = pop;
    r.predictor = Rate{predictor_ppm};
    return r;
}

// Independent largest-remainder reference: long-double shares, explicit
// leftover handout.
std::vector<std::uint64_t> apportion_reference(const std::vector<std::uint64_t>& pops,
                                               std::uint64_t n_total) {
    const long double total = std::accumulate(pops.begin(), pops.end(), 0.0L);
    std::vector<std::uint64_t> lengths(pops.size());
    std::vector<long double> rem(pops.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < pops.size(); ++i) {
        const long double share = n_total * (pops[i] / total);
        lengths[i] = static_cast<std::uint64_t>(std::floor(share));
        rem[i] = share - std::floor(share);
        assigned += lengths[i];
    }
    while (assigned < n_total) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pops.size(); ++i)
            if (rem[i] > rem[best]) best = i;
        ++lengths[best];
        rem[best] = -1;
        ++assigned;
    }
    return lengths;
}

std::vector<std::uint64_t> lengths_of(const AgentAllocation& alloc) {
    std::vector<std::uint64_t> lengths;
    for (const auto& r : alloc.ranges) lengths.push_back(r.length());
    return lengths;
}

} // namespace

TEST_CASE("rate parsing is exact decimal arithmetic") {
    CHECK(Rate::parse_percent("65.0").ppm == 650000);
    CHECK(Rate::parse_percent("65").ppm == 650000);
    CHECK(Rate::parse_percent("64.5").ppm == 645000);
    CHECK(Rate::parse_percent("0.0012").ppm == 12);
    CHECK(Rate::parse_percent("100").ppm == 1000000);
    CHECK(Rate::parse_percent("0").ppm == 0);
    CHECK(Rate::parse_percent("65.0").fraction() == doctest::Approx(0.65).epsilon(1e-15));

    CHECK_THROWS_AS(Rate::parse_percent("101"), InputError);
    CHECK_THROWS_AS(Rate::parse_percent("-5"), InputError);
    CHECK_THROWS_AS(Rate::parse_percent("100.0001"), InputError);
    CHECK_THROWS_AS(Rate::parse_percent(""), InputError);
    CHECK_THROWS_AS(Rate::parse_percent("abc"), InputError);
    CHECK_THROWS_AS(Rate::parse_percent("6 5"), InputError);

    CHECK(Rate{645000}.to_percent_string() == "64.5");
    CHECK(Rate{650000}.to_percent_string() == "65");
    CHECK(Rate{12}.to_percent_string() == "0.0012");
    for (std::uint32_t ppm : {0u, 1u, 5000u, 333333u, 999999u, 1000000u})
        CHECK(Rate::parse_percent(Rate{ppm}.to_percent_string()).ppm == ppm);
}

TEST_CASE("load_regions sorts by municipality then region and converts units") {
    std::istringstream in(
        "region_id,municipality_id,population,predictor_pct,outcome_pct\n"
        "R9,M2,100,65.0,80\n"
        "R1,M1,50,40,\n"
        "R0,M2,10,12.5,33.3\n");
    const auto table = load_regions(in);
    REQUIRE(table.records.size() == 3);
    CHECK(table.records[0].region_id == "R1");
    CHECK(table.records[1].region_id == "R0");
    CHECK(table.records[2].region_id == "R9");
    CHECK(table.records[2].predictor.fraction() == doctest::Approx(0.65).epsilon(1e-15));
    CHECK_FALSE(table.records[0].outcome.has_value());
    CHECK(table.records[1].outcome->ppm == 333000);
    CHECK(table.total_population() == 160);
    CHECK(table.n_with_outcome() == 2);
}

TEST_CASE("load_regions parse failures name the line") {
    const auto reject_with_line = [](const std::string& body, const std::string& fragment) {
        std::istringstream in("region_id,municipality_id,population,predictor_pct,outcome_pct\n" +
                              body);
        try {
            load_regions(in);
            FAIL("expected InputError for: " << body);
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    reject_with_line("R1,M1,100,101,\n", "line 2");
    reject_with_line("R1,M1,100,65\n", "line 2");           // missing field
    reject_with_line("R1,M1,-3,65,\n", "line 2");           // bad population
    reject_with_line("R1,M1,100,65,\nR1,M2,5,10,\n", "duplicate region_id");
    reject_with_line("R1,M1,100,65,,\n", "line 2");         // too many fields

    std::istringstream wrong_header("region,municipality\nR1,M1\n");
    CHECK_THROWS_AS(load_regions(wrong_header), InputError);
    std::istringstream zero_pop(
        "region_id,municipality_id,population,predictor_pct,outcome_pct\nR1,M1,0,65,\n");
    CHECK_THROWS_AS(load_regions(zero_pop), InputError);
}

TEST_CASE("region table save/load round trip is the identity") {
    const auto table = table_from({
        record("R1", "M1", 1234, 650000),
        record("R2", "M1", 10, 1),
        record("R3", "M2", 99999, 999999),
    });
    std::stringstream buffer;
    save_regions(table, buffer);
    const auto reloaded = load_regions(buffer);
    REQUIRE(reloaded.records.size() == table.records.size());
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        CHECK(reloaded.records[i].region_id == table.records[i].region_id);
        CHECK(reloaded.records[i].municipality_id == table.records[i].municipality_id);
        CHECK(reloaded.records[i].population == table.records[i].population);
        CHECK(reloaded.records[i].predictor == table.records[i].predictor);
        CHECK(reloaded.records[i].outcome == table.records[i].outcome);
    }
}

TEST_CASE("allocate_agents apportionment examples") {
    const auto even = allocate_agents(
        table_from({record("R1", "M1", 100, 0), record("R2", "M1", 100, 0)}), 10);
    CHECK(lengths_of(even) == std::vector<std::uint64_t>{5, 5});

    // Equal remainders: table order breaks the tie.
    const auto tie = allocate_agents(
        table_from({record("R1", "M1", 1, 0), record("R2", "M1", 1, 0),
                    record("R3", "M1", 1, 0)}),
        10);
    CHECK(lengths_of(tie) == std::vector<std::uint64_t>{4, 3, 3});

    const auto empty = allocate_agents(
        table_from({record("R1", "M1", 0, 0), record("R2", "M1", 50, 0)}), 7);
    CHECK(lengths_of(empty) == std::vector<std::uint64_t>{0, 7});
    CHECK(empty.ranges[1].begin == 0);
    CHECK(empty.ranges[1].end == 7);
}

TEST_CASE("allocation always partitions the agent range") {
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RegionRecord> records;
        const auto n_regions = 1 + rng.next_below(40);
        for (std::uint64_t r = 0; r < n_regions; ++r)
            records.push_back(record("R" + std::to_string(r), "M" + std::to_string(r / 5),
                                     rng.next_below(100000), 0));
        auto table = table_from(records);
        if (table.total_population() == 0) continue;
        const std::uint64_t n_total = records.size() + rng.next_below(200000);

        const auto alloc = allocate_agents(table, n_total);
        std::uint64_t cursor = 0;
        for (const auto& range : alloc.ranges) {
            CHECK(range.begin == cursor);
            cursor = range.end;
        }
        CHECK(cursor == n_total);

        std::vector<std::uint64_t> pops;
        for (const auto& rec : table.records) pops.push_back(rec.population);
        CHECK(lengths_of(alloc) == apportion_reference(pops, n_total));
    }
}

TEST_CASE("allocate_agents input guards") {
    CHECK_THROWS_AS(allocate_agents(table_from({record("R1", "M1", 5, 0),
                                                record("R2", "M1", 5, 0)}),
                                    1),
                    InputError); // fewer agents than populated regions
}

TEST_CASE("assign_biases rounds per-region pro counts half-up") {
    const auto table = table_from({record("R1", "M1", 10, 650000)});
    const auto alloc = allocate_agents(table, 10);

    const auto assign = assign_biases(alloc, table, 0.05);
    CHECK(assign.count_group_a() == 7); // 6.5 rounds up
    for (std::uint64_t i = 0; i < 7; ++i) CHECK(assign.group[i] == Group::a);
    for (std::uint64_t i = 7; i < 10; ++i) CHECK(assign.group[i] == Group::b);

    // 64.5% of 100 agents -> 64.5 -> 65, exactly (binary doubles would say 64).
    const auto table2 = table_from({record("R1", "M1", 100, 645000)});
    const auto assign2 = assign_biases(allocate_agents(table2, 100), table2, 0.05);
    CHECK(assign2.count_group_a() == 65);

    const auto unanimous = table_from({record("R1", "M1", 10, 1000000)});
    CHECK(assign_biases(allocate_agents(unanimous, 10), unanimous, 0.05).count_group_a() == 10);

    CHECK_THROWS_AS(assign_biases(alloc, table, 0.0), InputError);
    CHECK_THROWS_AS(assign_biases(alloc, table, 0.5), InputError);
    CHECK_THROWS_AS(assign_biases(alloc, table, -0.1), InputError);
}

TEST_CASE("global group-a share tracks the population-weighted predictor mean") {
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<RegionRecord> records;
        const auto n_regions = 2 + rng.next_below(30);
        for (std::uint64_t r = 0; r < n_regions; ++r)
            records.push_back(record("R" + std::to_string(r), "M0", 1 + rng.next_below(5000),
                                     static_cast<std::uint32_t>(rng.next_below(1000001))));
        const auto table = table_from(records);
        const std::uint64_t n_total = 1000 + rng.next_below(50000);
        const auto alloc = allocate_agents(table, n_total);
        const auto assign = assign_biases(alloc, table, 0.05);

        long double weighted = 0;
        for (const auto& rec : table.records)
            weighted += static_cast<long double>(rec.population) * rec.predictor.fraction();
        weighted /= table.total_population();

        const double share =
            static_cast<double>(assign.count_group_a()) / static_cast<double>(n_total);
        CHECK(std::abs(share - static_cast<double>(weighted)) <=
              static_cast<double>(table.records.size()) / static_cast<double>(n_total));
    }
}

TEST_CASE("shuffle_biases permutes labels without changing counts") {
    const auto table = table_from({record("R1", "M1", 10, 700000),
                                   record("R2", "M1", 10, 200000)});
    const auto alloc = allocate_agents(table, 200);
    const auto assign = assign_biases(alloc, table, 0.05);

    const auto shuffled = shuffle_biases(assign, 99);
    CHECK(shuffled.epsilon == assign.epsilon);
    CHECK(shuffled.group.size() == assign.group.size());
    CHECK(shuffled.count_group_a() == assign.count_group_a());
    CHECK(shuffled.group != assign.group); // astronomically unlikely to coincide

    const auto again = shuffle_biases(assign, 99);
    CHECK(again.group == shuffled.group);

    BiasAssignment all_a;
    all_a.epsilon = 0.05;
    all_a.group.assign(50, Group::a);
    CHECK(shuffle_biases(all_a, 1234).group == all_a.group);
}

TEST_CASE("random_permutation is a bijection") {
    for (const std::uint64_t seed : {0ull, 1ull, 77ull}) {
        const auto perm = random_permutation(257, seed);
        std::set<std::uint64_t> seen(perm.begin(), perm.end());
        CHECK(seen.size() == 257);
        CHECK(*seen.rbegin() == 256);
    }
}

TEST_CASE("synthesize_regions with zero noise is collinear") {
    SyntheticDataParams params;
    params.n_regions = 200;
    params.n_municipalities = 10;
    params.noise_scale = 0.0;
    params.seed = 7;
    const auto table = synthesize_regions(params);
    REQUIRE(table.records.size() == 200);
    for (const auto& rec : table.records) {
        REQUIRE(rec.outcome.has_value());
        double line = params.intercept + params.slope * rec.predictor.fraction();
        line = std::min(1.0, std::max(0.0, line));
        // outcomes are quantized to ppm
        CHECK(std::abs(rec.outcome->fraction() - line) <= 5.1e-7);
    }
}

TEST_CASE("synthetic residual spread grows away from the center") {
    SyntheticDataParams params;
    params.n_regions = 3000;
    params.n_municipalities = 100;
    params.noise_scale = 0.02;
    params.seed = 2;
    const auto table = synthesize_regions(params);

    // Bin |predictor - center| into near/far halves and compare residual RMS.
    double near_sq = 0, far_sq = 0;
    std::size_t near_n = 0, far_n = 0;
    for (const auto& rec : table.records) {
        const double resid = rec.outcome->fraction() -
                             (params.intercept + params.slope * rec.predictor.fraction());
        const double dist = std::abs(rec.predictor.fraction() - params.heteroscedastic_center);
        if (dist < 0.15) {
            near_sq += resid * resid;
            ++near_n;
        } else if (dist > 0.25) {
            far_sq += resid * resid;
            ++far_n;
        }
    }
    REQUIRE(near_n > 100);
    REQUIRE(far_n > 100);
    CHECK(std::sqrt(far_sq / far_n) > 1.4 * std::sqrt(near_sq / near_n));
}

TEST_CASE("synthesize_regions is deterministic and respects its defaults") {
    SyntheticDataParams params; // defaults mirror the real partition counts
    CHECK(params.n_regions == 3363);
    CHECK(params.n_municipalities == 290);
    params.n_regions = 120;
    params.n_municipalities = 7;
    params.seed = 31;
    const auto a = synthesize_regions(params);
    const auto b = synthesize_regions(params);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].region_id == b.records[i].region_id);
        CHECK(a.records[i].population == b.records[i].population);
        CHECK(a.records[i].predictor == b.records[i].predictor);
        CHECK(a.records[i].outcome == b.records[i].outcome);
    }
    std::set<std::string> municipalities;
    for (const auto& rec : a.records) municipalities.insert(rec.municipality_id);
    CHECK(municipalities.size() == 7);
    CHECK(std::is_sorted(a.records.begin(), a.records.end(),
                         [](const RegionRecord& x, const RegionRecord& y) {
                             return std::tie(x.municipality_id, x.region_id) <
                                    std::tie(y.municipality_id, y.region_id);
                         }));
}

TEST_CASE("synthesize_regions parameter guards") {
    SyntheticDataParams params;
    params.n_municipalities = params.n_regions + 1;
    CHECK_THROWS_AS(synthesize_regions(params), InputError);
    params = SyntheticDataParams{};
    params.noise_scale = -0.1;
    CHECK_THROWS_AS(synthesize_regions(params), InputError);
    params = SyntheticDataParams{};
    params.predictor_lo = 0.9;
    params.predictor_hi = 0.1;
    CHECK_THROWS_AS(synthesize_regions(params), InputError);
}

TEST_CASE("assignment export lists every agent with region and group") {
    const auto table = table_from({record("A1", "M1", 10, 1000000),
                                   record("B1", "M2", 10, 0)});
    const auto alloc = allocate_agents(table, 4);
    const auto assign = assign_biases(alloc, table, 0.05);
    std::ostringstream out;
    save_assignment(alloc, table, assign, out);
    CHECK(out.str() ==
          "agent_id,region_id,group\n"
          "0,A1,a\n"
          "1,A1,a\n"
          "2,B1,b\n"
          "3,B1,b\n");
}
