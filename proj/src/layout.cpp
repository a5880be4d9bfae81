#include "doim/layout.hpp"

#include <string>

namespace doim {

uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
    }
    return r;
}

void FrameLayout::validate() const {
    if (M <= 0 || N <= 0 || M_hat <= 0 || N_hat <= 0)
        throw ConfigError("FrameLayout: dimensions must be positive");
    if (M % M_hat != 0)
        throw ConfigError("FrameLayout: M_hat must divide M");
    if (N % N_hat != 0)
        throw ConfigError("FrameLayout: N_hat must divide N");
    if (k_hat < 1 || k_hat > N_hat)
        throw ConfigError("FrameLayout: need 1 <= k_hat <= N_hat");
    if (Mc < 2 || (Mc & (Mc - 1)) != 0)
        throw ConfigError("FrameLayout: Mc must be a power of two >= 2");
    if (N_hat > 62)
        throw ConfigError("FrameLayout: N_hat too large for 64-bit ranks");
}

int FrameLayout::bits_per_constellation_symbol() const {
    int b = 0;
    while ((1 << b) < Mc) ++b;
    return b;
}

int FrameLayout::index_bits() const {
    const uint64_t combos = binomial(N_hat, k_hat);
    int p1 = 0;
    while ((uint64_t{1} << (p1 + 1)) <= combos) ++p1;
    return p1;
}

int FrameLayout::symbol_bits() const {
    return k_hat * M_hat * bits_per_constellation_symbol();
}

double spectral_efficiency(const FrameLayout& layout) {
    return static_cast<double>(layout.subframe_bits()) /
           (static_cast<double>(layout.M_hat) * layout.N_hat);
}

}  // namespace doim
