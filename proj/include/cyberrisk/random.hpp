#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cyberrisk {

/// 64-bit FNV-1a, used for substream labels and settings hashes.
std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Derive an independent seed from a parent seed and a label/index.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label, std::uint64_t index = 0);

/// Pseudo-random stream with the handful of exact samplers the toolkit needs.
///
/// All samplers are implemented here rather than through <random> distributions
/// so that draws are identical across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    /// Child stream keyed by name (and optional index); the parent is not advanced.
    RandomStream substream(std::string_view label, std::uint64_t index = 0) const
    {
        return RandomStream(derive_seed(seed_, label, index));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform();
    double normal();
    /// Poisson count: inversion for small means, PTRS (Hormann 1993) otherwise.
    std::uint64_t poisson(double mean);
    /// Pareto by inverse transform: x_min * U^(-1/alpha).
    double pareto(double alpha, double x_min);
    double lognormal(double mu, double sigma);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace cyberrisk
