#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace opdyn {

/// Seedable PRNG with a version-pinned algorithm.
///
/// The engine is std::mt19937_64, whose state transition and seeding are fully
/// specified by the C++ standard, so identical seeds give identical streams on
/// every platform. The standard *distributions* are implementation-defined, so
/// all draws (bounded integers, unit doubles, normals, shuffles) are derived
/// here from raw 64-bit words with fixed arithmetic. Do not change any of
/// these mappings without bumping the artifact version: serialized graphs and
/// synthetic datasets are reproduced bit-for-bit from seeds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, n). Unbiased via rejection of the top partial range.
    std::uint64_t next_below(std::uint64_t n) {
        if (n < 2) return 0;
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n + 1) % n;
        std::uint64_t x = engine_();
        while (x > limit) x = engine_();
        return x % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    /// Standard normal via Box-Muller (cosine branch only, one draw per call).
    /// The only draw that goes through libm transcendentals; exact bits are
    /// reproducible per math-library build, unlike the rest of the class.
    double next_normal() {
        const double u1 = 1.0 - next_double(); // (0, 1]
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::uint64_t> random_permutation(std::uint64_t n, std::uint64_t seed) {
    std::vector<std::uint64_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::uint64_t{0});
    Rng rng(seed);
    for (std::uint64_t i = n; i > 1; --i) {
        const std::uint64_t j = rng.next_below(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

/// First n_take entries of a random permutation of 0..n-1 (partial Fisher-Yates).
inline std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t n_take,
                                                  std::uint64_t seed) {
    std::vector<std::uint64_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    Rng rng(seed);
    for (std::uint64_t i = 0; i < n_take && i < n; ++i) {
        const std::uint64_t j = i + rng.next_below(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n_take < n ? n_take : n);
    return pool;
}

/// Decorrelated sub-seed for an internal random stream (splitmix64 of
/// master + stream id). Pipelines derive one stream per stochastic stage so
/// that changing e.g. the shuffle does not perturb graph generation.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + stream * 0x9e3779b97f4a7c15ull + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace opdyn
