#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "doim/common.hpp"

namespace doim {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives one child seed from a master seed and up to three counters.
/// Every Monte Carlo trial owns its own stream, so results do not depend
/// on the parallel schedule.
inline uint64_t derive_seed(uint64_t master, uint64_t purpose, uint64_t a = 0,
                            uint64_t b = 0) {
    uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ purpose);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    return s;
}

/// mt19937_64 with hand-rolled uniform/Gaussian draws. The engine is
/// bit-exact per the standard and the transforms below avoid the
/// implementation-defined std distributions, so identical seeds give
/// identical streams on any platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    uint64_t bits() { return eng_(); }

    int bit() { return static_cast<int>(eng_() >> 63); }

    /// Standard normal via Box-Muller (one value per call, pair cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    cplx cgaussian(double variance) {
        double s = std::sqrt(variance * 0.5);
        double re = gaussian();
        double im = gaussian();
        return {s * re, s * im};
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace doim
