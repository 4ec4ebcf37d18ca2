#ifndef HDBO_RNG_HPP
#define HDBO_RNG_HPP

#include <cstdint>
#include <random>

namespace hdbo {

/// Identifies one reproducible random stream: the same (seed, stream) pair
/// always yields the same sequence.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// Child stream derived from this one; distinct labels give
    /// statistically independent streams.
    [[nodiscard]] RngState derive(std::uint64_t label) const;

    friend bool operator==(const RngState&, const RngState&) = default;
};

/// Random engine bound to an RngState.
///
/// The variate conversions (uniform, normal, bounded integers) are written
/// out here instead of using the <random> distributions, whose output is
/// implementation-defined; traces must be identical across standard
/// libraries.
class Rng {
public:
    explicit Rng(RngState state);

    [[nodiscard]] const RngState& state() const { return state_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Standard normal variate (Marsaglia polar method).
    double normal();

private:
    RngState state_;
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hdbo

#endif  // HDBO_RNG_HPP
