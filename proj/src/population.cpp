#include "opdyn/population.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "opdyn/errors.hpp"
#include "opdyn/rng.hpp"

namespace opdyn::population {

namespace {

constexpr std::uint64_t kPpmPerUnit = 1'000'000; // fraction -> ppm
constexpr std::uint64_t kPpmPerPercent = 10'000;

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw InputError("regions csv, line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void sort_and_check(RegionTable& table) {
    std::stable_sort(table.records.begin(), table.records.end(),
                     [](const RegionRecord& x, const RegionRecord& y) {
                         if (x.municipality_id != y.municipality_id)
                             return x.municipality_id < y.municipality_id;
                         return x.region_id < y.region_id;
                     });
    if (table.total_population() == 0)
        throw InputError("region table has zero total population");
}

} // namespace

Rate Rate::from_fraction(double f) {
    if (f < 0.0) f = 0.0;
    if (f > 1.0) f = 1.0;
    return Rate{static_cast<std::uint32_t>(std::llround(f * static_cast<double>(kPpmPerUnit)))};
}

Rate Rate::parse_percent(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw InputError("empty rate field");
    const std::size_t dot = s.find('.');
    const std::string int_part = dot == std::string::npos ? s : s.substr(0, dot);
    const std::string frac_part = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) throw InputError("malformed rate '" + s + "'");
    std::uint64_t ppm = 0;
    for (char c : int_part) {
        if (c < '0' || c > '9') throw InputError("malformed rate '" + s + "'");
        ppm = ppm * 10 + static_cast<std::uint64_t>(c - '0');
        if (ppm > 1000) throw InputError("rate '" + s + "' outside [0, 100]");
    }
    ppm *= kPpmPerPercent;
    // Up to four percent decimals are exact; a fifth digit rounds half-up.
    std::uint64_t scale = kPpmPerPercent;
    for (std::size_t t = 0; t < frac_part.size(); ++t) {
        const char c = frac_part[t];
        if (c < '0' || c > '9') throw InputError("malformed rate '" + s + "'");
        const auto digit = static_cast<std::uint64_t>(c - '0');
        if (t < 4) {
            scale /= 10;
            ppm += digit * scale;
        } else if (t == 4 && digit >= 5) {
            ppm += 1;
        }
    }
    if (ppm > 100 * kPpmPerPercent) throw InputError("rate '" + s + "' outside [0, 100]");
    return Rate{static_cast<std::uint32_t>(ppm)};
}

std::string Rate::to_percent_string() const {
    const std::uint32_t whole = ppm / kPpmPerPercent;
    std::uint32_t frac = ppm % kPpmPerPercent;
    std::string out = std::to_string(whole);
    if (frac != 0) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%04u", frac);
        std::string digits(buf);
        while (digits.back() == '0') digits.pop_back();
        out += '.';
        out += digits;
    }
    return out;
}

std::uint64_t RegionTable::total_population() const {
    std::uint64_t total = 0;
    for (const auto& r : records) total += r.population;
    return total;
}

std::size_t RegionTable::n_with_outcome() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.outcome.has_value() ? 1 : 0;
    return n;
}

std::uint64_t BiasAssignment::count_group_a() const {
    std::uint64_t n = 0;
    for (Group g : group) n += g == Group::a ? 1 : 0;
    return n;
}

RegionTable load_regions(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("regions csv: empty input");
    if (trim(line) != "region_id,municipality_id,population,predictor_pct,outcome_pct")
        throw InputError("regions csv: unexpected header '" + trim(line) + "'");

    RegionTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) parse_fail(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
        RegionRecord rec;
        rec.region_id = trim(fields[0]);
        rec.municipality_id = trim(fields[1]);
        if (rec.region_id.empty()) parse_fail(line_no, "empty region_id");
        try {
            const std::string pop = trim(fields[2]);
            if (pop.empty() || pop.find_first_not_of("0123456789") != std::string::npos)
                throw InputError("malformed population '" + pop + "'");
            rec.population = std::stoull(pop);
            rec.predictor = Rate::parse_percent(fields[3]);
            if (!trim(fields[4]).empty()) rec.outcome = Rate::parse_percent(fields[4]);
        } catch (const InputError& e) {
            parse_fail(line_no, e.what());
        }
        table.records.push_back(std::move(rec));
    }
    if (table.records.empty()) throw InputError("regions csv: no data rows");

    std::vector<std::string> ids;
    ids.reserve(table.records.size());
    for (const auto& r : table.records) ids.push_back(r.region_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw InputError("regions csv: duplicate region_id '" +
                         *std::adjacent_find(ids.begin(), ids.end()) + "'");

    sort_and_check(table);
    return table;
}

void save_regions(const RegionTable& table, std::ostream& out) {
    out << "region_id,municipality_id,population,predictor_pct,outcome_pct\n";
    for (const auto& r : table.records) {
        out << r.region_id << ',' << r.municipality_id << ',' << r.population << ','
            << r.predictor.to_percent_string() << ',';
        if (r.outcome) out << r.outcome->to_percent_string();
        out << '\n';
    }
}

AgentAllocation allocate_agents(const RegionTable& table, std::uint64_t n_total) {
    const std::uint64_t total_pop = table.total_population();
    if (total_pop == 0) throw InputError("allocate_agents: zero total population");
    std::uint64_t n_positive = 0;
    for (const auto& r : table.records) n_positive += r.population > 0 ? 1 : 0;
    if (n_total < n_positive)
        throw InputError("allocate_agents: n_total smaller than the number of populated regions");

    const std::size_t n_regions = table.records.size();
    std::vector<std::uint64_t> length(n_regions);
    std::vector<unsigned __int128> remainder(n_regions);
    std::uint64_t assigned = 0;
    for (std::size_t r = 0; r < n_regions; ++r) {
        const unsigned __int128 product =
            static_cast<unsigned __int128>(n_total) * table.records[r].population;
        length[r] = static_cast<std::uint64_t>(product / total_pop);
        remainder[r] = product % total_pop;
        assigned += length[r];
    }

    std::vector<std::size_t> order(n_regions);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return remainder[x] > remainder[y];
    });
    for (std::size_t t = 0; assigned < n_total; ++t, ++assigned) ++length[order[t]];

    AgentAllocation alloc;
    alloc.n_total = n_total;
    alloc.ranges.resize(n_regions);
    std::uint64_t cursor = 0;
    for (std::size_t r = 0; r < n_regions; ++r) {
        alloc.ranges[r] = {cursor, cursor + length[r]};
        cursor += length[r];
    }
    return alloc;
}

BiasAssignment assign_biases(const AgentAllocation& alloc, const RegionTable& table,
                             double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw InputError("assign_biases: epsilon must lie in (0, 0.5)");
    if (alloc.ranges.size() != table.records.size())
        throw InputError("assign_biases: allocation and table sizes differ");

    BiasAssignment assign;
    assign.epsilon = epsilon;
    assign.group.assign(alloc.n_total, Group::b);
    for (std::size_t r = 0; r < alloc.ranges.size(); ++r) {
        const auto& range = alloc.ranges[r];
        // round-half-up(length * predictor) in exact ppm arithmetic
        const std::uint64_t n_pro = (range.length() * table.records[r].predictor.ppm +
                                     kPpmPerUnit / 2) / kPpmPerUnit;
        for (std::uint64_t i = range.begin; i < range.begin + n_pro; ++i)
            assign.group[i] = Group::a;
    }
    return assign;
}

BiasAssignment shuffle_biases(const BiasAssignment& assign, std::uint64_t seed) {
    const auto perm = random_permutation(assign.group.size(), seed);
    BiasAssignment out;
    out.epsilon = assign.epsilon;
    out.group.resize(assign.group.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out.group[perm[i]] = assign.group[i];
    return out;
}

RegionTable synthesize_regions(const SyntheticDataParams& params) {
    if (params.n_regions == 0) throw InputError("synthesize_regions: n_regions must be positive");
    if (params.n_municipalities == 0 || params.n_municipalities > params.n_regions)
        throw InputError("synthesize_regions: need 1 <= n_municipalities <= n_regions");
    if (params.noise_scale < 0) throw InputError("synthesize_regions: noise_scale must be >= 0");
    if (!(params.predictor_lo >= 0 && params.predictor_lo <= params.predictor_hi &&
          params.predictor_hi <= 1))
        throw InputError("synthesize_regions: predictor interval must satisfy 0 <= lo <= hi <= 1");
    if (params.population_lo == 0 || params.population_lo > params.population_hi)
        throw InputError("synthesize_regions: need 1 <= population_lo <= population_hi");

    const int id_width = static_cast<int>(std::to_string(params.n_regions).size());
    const int mun_width = static_cast<int>(std::to_string(params.n_municipalities).size());

    Rng rng(params.seed);
    RegionTable table;
    table.records.reserve(params.n_regions);
    const double log_lo = std::log(static_cast<double>(params.population_lo));
    const double log_hi = std::log(static_cast<double>(params.population_hi));
    for (std::uint32_t r = 0; r < params.n_regions; ++r) {
        const std::uint64_t mun =
            static_cast<std::uint64_t>(r) * params.n_municipalities / params.n_regions;

        char region_id[32], mun_id[32];
        std::snprintf(region_id, sizeof(region_id), "R%0*u", id_width, r);
        std::snprintf(mun_id, sizeof(mun_id), "M%0*llu", mun_width,
                      static_cast<unsigned long long>(mun));

        RegionRecord rec;
        rec.region_id = region_id;
        rec.municipality_id = mun_id;
        rec.population = static_cast<std::uint64_t>(
            std::llround(std::exp(log_lo + (log_hi - log_lo) * rng.next_double())));
        const double predictor =
            params.predictor_lo + (params.predictor_hi - params.predictor_lo) * rng.next_double();
        rec.predictor = Rate::from_fraction(predictor);
        const double spread =
            params.noise_scale *
            (1.0 + params.heteroscedastic_gain *
                       std::abs(rec.predictor.fraction() - params.heteroscedastic_center));
        const double outcome =
            params.intercept + params.slope * rec.predictor.fraction() + spread * rng.next_normal();
        rec.outcome = Rate::from_fraction(outcome);
        table.records.push_back(std::move(rec));
    }
    sort_and_check(table);
    return table;
}

void save_assignment(const AgentAllocation& alloc, const RegionTable& table,
                     const BiasAssignment& assign, std::ostream& out) {
    if (alloc.ranges.size() != table.records.size() || alloc.n_total != assign.group.size())
        throw InputError("save_assignment: mismatched inputs");
    out << "agent_id,region_id,group\n";
    for (std::size_t r = 0; r < alloc.ranges.size(); ++r) {
        for (std::uint64_t i = alloc.ranges[r].begin; i < alloc.ranges[r].end; ++i)
            out << i << ',' << table.records[r].region_id << ','
                << (assign.group[i] == Group::a ? 'a' : 'b') << '\n';
    }
}

} // namespace opdyn::population
