#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "scin/tensor.hpp"

namespace scin {

/// Deterministic random source.
///
/// Algorithm: xoshiro256** (Blackman & Vigna) with its 256-bit state seeded by
/// four successive outputs of SplitMix64 applied to the 64-bit seed. Derived
/// draws are defined on top of next_u64() only, never on <random>
/// distributions, so sequences are identical across platforms and standard
/// libraries:
///   - uniform():  (next_u64() >> 11) * 2^-53, in [0, 1)
///   - below(n):   rejection sampling on next_u64() to remove modulo bias
///   - gaussian(): Box-Muller on two uniforms u1, u2 with u1 mapped to (0, 1];
///                 the sine branch is cached and returned on the next call
///
/// State layout: s[0..3] (xoshiro state), has_spare, spare.
///
/// Parallel workers never share an Rng; they fork one with
/// Rng::fork(master_seed, worker_index), i.e. seed = master_seed + worker_index.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    static Rng fork(std::uint64_t master_seed, std::uint64_t worker_index) {
        return Rng(master_seed + worker_index);
    }

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) noexcept;
    double gaussian() noexcept;

    template <typename Index>
    void shuffle(std::span<Index> items) noexcept {
        // Fisher-Yates, last to first.
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    bool operator==(const Rng&) const = default;

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

template <typename T>
BasicTensor<T> rng_uniform(Rng& rng, const Shape& shape, double lo, double hi) {
    if (!(lo < hi)) fail(ErrorKind::invalid_range, "uniform range requires lo < hi");
    BasicTensor<T> t(shape);
    for (auto& v : t.data()) {
        // Rounding to float can land exactly on hi; resample in that case.
        do {
            v = static_cast<T>(rng.uniform(lo, hi));
        } while (!(v < static_cast<T>(hi)));
    }
    return t;
}

template <typename T>
BasicTensor<T> rng_gaussian(Rng& rng, const Shape& shape, double mean, double stddev) {
    if (!(stddev >= 0.0)) fail(ErrorKind::invalid_range, "gaussian stddev must be >= 0");
    BasicTensor<T> t(shape);
    for (auto& v : t.data()) v = static_cast<T>(mean + stddev * rng.gaussian());
    return t;
}

}  // namespace scin
