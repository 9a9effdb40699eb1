#pragma once

#include <cstdint>
#include <random>

namespace slfv {

/// Per-replicate random stream keyed by (seed, stream index).
/// Draws are built from raw engine output so sequences do not depend on
/// the standard library's distribution implementations.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on the open interval (0,1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double exponential(double rate);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace slfv
