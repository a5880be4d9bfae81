#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "doim/common.hpp"

namespace doim {

uint64_t binomial(int n, int k);

/// Frame dimensioning for block-wise index modulation. The frame is an
/// M x N delay-Doppler grid partitioned into g subframes of M_hat delay
/// rows by N_hat Doppler columns; a block is one Doppler column of a
/// subframe (M_hat delay units), and k_hat blocks per subframe are active.
struct FrameLayout {
    int M = 64;       // delay bins per frame
    int N = 32;       // Doppler bins per frame
    int M_hat = 4;    // delay units per block
    int N_hat = 4;    // blocks per subframe
    int k_hat = 1;    // active blocks per subframe
    int Mc = 4;       // constellation order

    void validate() const;

    int tiles_delay() const { return M / M_hat; }
    int tiles_doppler() const { return N / N_hat; }
    int subframes() const { return tiles_delay() * tiles_doppler(); }

    int index_bits() const;  // p1 = floor(log2 C(N_hat, k_hat))
    int symbol_bits() const;  // p2 = k_hat * M_hat * log2(Mc)
    int subframe_bits() const { return index_bits() + symbol_bits(); }
    int frame_bits() const { return subframe_bits() * subframes(); }
    uint64_t legal_patterns() const { return uint64_t{1} << index_bits(); }

    int bits_per_constellation_symbol() const;

    // Subframes tile the frame delay-major: subframe s sits at delay tile
    // s % tiles_delay and Doppler tile s / tiles_delay.
    int unit_delay(int s, int r) const { return (s % tiles_delay()) * M_hat + r; }
    int unit_doppler(int s, int b) const { return (s / tiles_delay()) * N_hat + b; }

    /// Flat grid index of unit r of block b in subframe s (the detector's
    /// vectorization k*M + l).
    int unit_index(int s, int b, int r) const {
        return unit_doppler(s, b) * M + unit_delay(s, r);
    }
};

/// bits per resource unit, CP overhead excluded
double spectral_efficiency(const FrameLayout& layout);

/// Per-subframe sets of k_hat active block indices, stored subframe-major.
struct ActivationPattern {
    int n_hat = 0;
    int k_hat = 0;
    std::vector<int> blocks;  // size subframes * k_hat, ascending per subframe

    int subframes() const {
        return k_hat == 0 ? 0 : static_cast<int>(blocks.size()) / k_hat;
    }
    std::span<const int> subframe(int s) const {
        return {blocks.data() + static_cast<size_t>(s) * k_hat,
                static_cast<size_t>(k_hat)};
    }
    std::span<int> subframe(int s) {
        return {blocks.data() + static_cast<size_t>(s) * k_hat,
                static_cast<size_t>(k_hat)};
    }
};

}  // namespace doim
