#pragma once

#include <cstdint>
#include <random>

namespace opium {

/// Reproducible random stream: std::mt19937_64 bits (algorithm fixed by the
/// C++ standard) converted with hand-rolled transforms so the values do not
/// depend on the standard library's distribution implementations.
///
///   uniform01: (u >> 11) * 2^-53, in [0, 1)
///   normal:    Box-Muller on two uniforms, first output only
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64/bm53";
    static constexpr int kVersion = 1;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform01();
    double uniform(double lo, double hi);
    double normal(double mean, double sd);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

} // namespace opium
