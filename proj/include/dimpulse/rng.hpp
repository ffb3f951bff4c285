#ifndef DIMPULSE_RNG_HPP
#define DIMPULSE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace dimpulse {

/// SplitMix64 mix; the documented seed-splitting rule is
/// path_seed(seed, i) = splitmix64(seed ^ splitmix64(i + 1)).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 1));
}

/// Deterministic standard-normal stream (SplitMix64 counter + Box-Muller),
/// identical across platforms and thread layouts.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : state_(seed) {}

    double uniform() {  // in (0, 1)
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= (z >> 31);
        return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
    }

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace dimpulse

#endif // DIMPULSE_RNG_HPP
