#ifndef STCCPM_RNG_HPP
#define STCCPM_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace stccpm {

// splitmix64, used to derive well-separated stream seeds from a master
// seed plus tags (trial index, purpose, ...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag0, std::uint64_t tag1 = 0) {
    return splitmix64(splitmix64(master ^ splitmix64(tag0)) ^ splitmix64(tag1 * 0x9e3779b97f4a7c15ULL + 1));
}

// Deterministic random stream. Gaussian variates use an explicit
// Box-Muller transform so the byte-for-byte output of a seeded run is
// pinned by this file alone, not by the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    std::uint32_t uniform_int(std::uint32_t n) { // [0, n)
        return static_cast<std::uint32_t>(eng_() % n);
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

    // Circularly symmetric complex Gaussian with E[|z|^2] = 1.
    std::complex<double> cn01() {
        const double re = gaussian();
        const double im = gaussian();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace stccpm

#endif
