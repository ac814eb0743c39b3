#ifndef COHLAB_RNG_HPP
#define COHLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cohlab {

/// splitmix64 finalizer, used to decorrelate (seed, stream, index) triples
/// before seeding an engine.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic random stream. Draws are reproducible bit-for-bit across
/// platforms for a given (seed, stream, index): the engine is the fully
/// specified std::mt19937_64 and the transforms below avoid the
/// implementation-defined standard distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0)
        : engine_(mix64(mix64(seed ^ mix64(stream)) + index)) {}

    std::uint64_t raw() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Box-Muller normal draw; the second value of each pair is cached.
    double normal(double mean, double stddev) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return mean + stddev * r * std::cos(t);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cohlab

#endif  // COHLAB_RNG_HPP
