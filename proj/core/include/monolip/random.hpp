#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace monolip {

/// Deterministic random source. All draws are derived from raw mt19937_64
/// output with fixed arithmetic, so the stream is reproducible bit for bit
/// across standard-library implementations (the <random> distribution
/// classes do not make that guarantee).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; one spare value is cached.
    double normal();

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Mean-parameterized exponential.
    double exponential(double mean);

    /// exp(N(log_mean, log_sigma)); the median is exp(log_mean).
    double lognormal(double log_mean, double log_sigma) {
        return std::exp(normal(log_mean, log_sigma));
    }

    /// Marsaglia-Tsang; shape > 0, scale > 0.
    double gamma(double shape, double scale);

    double pareto(double minimum, double alpha);

    /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t uniform_below(std::uint64_t n);

    /// Fisher-Yates with explicit draws (std::shuffle is not pinned by the
    /// standard).
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i + 1));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Splitmix64-style mixing for deriving independent substream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace monolip
