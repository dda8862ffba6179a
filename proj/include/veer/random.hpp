#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace veer {

/// Seeded random source with platform-independent draws.
///
/// The standard distributions are implementation-defined, so bounded integers,
/// uniform reals and gaussians are derived here from the raw mt19937_64 stream.
/// Two Rng objects built from the same (seed, stream) produce identical
/// sequences on every conforming toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double gaussian();

    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

    /// k distinct elements of `from`, in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample(std::span<const std::size_t> from, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace veer
