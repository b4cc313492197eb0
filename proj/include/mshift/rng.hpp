#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mshift {

// mt19937_64 output is pinned by the standard, but the std distributions are
// implementation-defined, so reruns would not be byte-identical across
// toolchains. These helpers keep every sampled stream reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, n), n >= 1. Rejection sampling, no modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

    // Uniform int in [lo, hi] inclusive.
    int next_int(int lo, int hi) {
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Uniform in [0, 1).
    double next_real() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_real(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// Stable seed derivation for (master seed, stream family, index) triples so
// scenario i never shares a stream with scenario j or with the solver.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t family, std::uint64_t index) {
    // splitmix64 finalizer over the mixed triple
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (family + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace mshift
