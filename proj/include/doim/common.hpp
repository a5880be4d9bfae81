#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace doim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Speed of light used for Doppler arithmetic (m/s).
inline constexpr double kSpeedOfLight = 2.998e8;

/// Non-negative remainder, also for negative a.
inline int mod(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}

using BitVec = std::vector<uint8_t>;

/// Raised on invalid dimensions, bit-length mismatches and bad configs.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on malformed activation patterns / out-of-range codebook ranks.
struct CodebookError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace doim
