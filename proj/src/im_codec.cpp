#include "doim/im_codec.hpp"

#include <algorithm>
#include <string>

namespace doim {

namespace {

uint64_t bits_to_value(std::span<const uint8_t> bits) {
    uint64_t v = 0;
    for (uint8_t b : bits) v = (v << 1) | (b & 1u);
    return v;
}

void value_to_bits(uint64_t v, std::span<uint8_t> bits) {
    for (size_t i = 0; i < bits.size(); ++i)
        bits[i] = static_cast<uint8_t>((v >> (bits.size() - 1 - i)) & 1u);
}

}  // namespace

std::pair<BitVec, BitVec> bit_split(const BitVec& bits, const FrameLayout& layout) {
    const size_t p = static_cast<size_t>(layout.subframe_bits());
    if (bits.size() != p)
        throw ConfigError("bit_split: expected " + std::to_string(p) + " bits, got " +
                          std::to_string(bits.size()));
    const size_t p1 = static_cast<size_t>(layout.index_bits());
    return {BitVec(bits.begin(), bits.begin() + static_cast<long>(p1)),
            BitVec(bits.begin() + static_cast<long>(p1), bits.end())};
}

std::vector<int> combo_encode(uint64_t rank, int n_hat, int k_hat) {
    if (k_hat < 1 || k_hat > n_hat)
        throw CodebookError("combo_encode: need 1 <= k_hat <= n_hat");
    if (rank >= binomial(n_hat, k_hat))
        throw CodebookError("combo_encode: rank out of range");
    std::vector<int> out;
    out.reserve(static_cast<size_t>(k_hat));
    int v = 0;
    for (int slot = 0; slot < k_hat; ++slot) {
        // Count how many combinations start below each candidate value.
        while (true) {
            const uint64_t below = binomial(n_hat - 1 - v, k_hat - 1 - slot);
            if (rank < below) break;
            rank -= below;
            ++v;
        }
        out.push_back(v);
        ++v;
    }
    return out;
}

uint64_t combo_decode(std::span<const int> pattern, int n_hat, int k_hat) {
    if (static_cast<int>(pattern.size()) != k_hat)
        throw CodebookError("combo_decode: pattern size != k_hat");
    std::vector<int> sorted(pattern.begin(), pattern.end());
    std::sort(sorted.begin(), sorted.end());
    int prev = -1;
    for (int v : sorted) {
        if (v <= prev || v < 0 || v >= n_hat)
            throw CodebookError("combo_decode: indices must be distinct and in [0, n_hat)");
        prev = v;
    }
    uint64_t rank = 0;
    int next = 0;
    for (int slot = 0; slot < k_hat; ++slot) {
        for (int v = next; v < sorted[static_cast<size_t>(slot)]; ++v)
            rank += binomial(n_hat - 1 - v, k_hat - 1 - slot);
        next = sorted[static_cast<size_t>(slot)] + 1;
    }
    return rank;
}

MappedFrame map_frame(const BitVec& bits, const FrameLayout& layout,
                      const Constellation& constellation) {
    layout.validate();
    if (constellation.order() != layout.Mc)
        throw ConfigError("map_frame: constellation order does not match layout");
    const int g = layout.subframes();
    const size_t want = static_cast<size_t>(layout.frame_bits());
    if (bits.size() != want)
        throw ConfigError("map_frame: expected " + std::to_string(want) + " bits, got " +
                          std::to_string(bits.size()));

    const int p = layout.subframe_bits();
    const int p1 = layout.index_bits();
    const int bps = layout.bits_per_constellation_symbol();

    MappedFrame out;
    out.grid = DDGrid(layout.M, layout.N);
    out.pattern.n_hat = layout.N_hat;
    out.pattern.k_hat = layout.k_hat;
    out.pattern.blocks.resize(static_cast<size_t>(g) * layout.k_hat);

    for (int s = 0; s < g; ++s) {
        std::span<const uint8_t> sub{bits.data() + static_cast<size_t>(s) * p,
                                     static_cast<size_t>(p)};
        const uint64_t rank = bits_to_value(sub.subspan(0, static_cast<size_t>(p1)));
        const auto active = combo_encode(rank, layout.N_hat, layout.k_hat);
        std::copy(active.begin(), active.end(), out.pattern.subframe(s).begin());

        size_t pos = static_cast<size_t>(p1);
        for (int b : active) {
            for (int r = 0; r < layout.M_hat; ++r) {
                const uint64_t label =
                    bits_to_value(sub.subspan(pos, static_cast<size_t>(bps)));
                pos += static_cast<size_t>(bps);
                out.grid.data[static_cast<size_t>(layout.unit_index(s, b, r))] =
                    constellation.point(static_cast<int>(label));
            }
        }
    }
    return out;
}

BitVec demap_frame(const std::vector<int>& symbol_labels,
                   const ActivationPattern& pattern, const FrameLayout& layout,
                   const Constellation& constellation) {
    layout.validate();
    if (constellation.order() != layout.Mc)
        throw ConfigError("demap_frame: constellation order does not match layout");
    const int g = layout.subframes();
    if (pattern.subframes() != g || pattern.k_hat != layout.k_hat ||
        pattern.n_hat != layout.N_hat)
        throw CodebookError("demap_frame: pattern does not match layout");
    if (static_cast<int>(symbol_labels.size()) != layout.M * layout.N)
        throw ConfigError("demap_frame: need one decision slot per resource unit");

    const int p = layout.subframe_bits();
    const int p1 = layout.index_bits();
    const int bps = layout.bits_per_constellation_symbol();

    BitVec bits(static_cast<size_t>(layout.frame_bits()));
    for (int s = 0; s < g; ++s) {
        auto active = pattern.subframe(s);
        const uint64_t rank = combo_decode(active, layout.N_hat, layout.k_hat);
        if (rank >= layout.legal_patterns())
            throw CodebookError("demap_frame: pattern rank outside the legal codebook");
        std::span<uint8_t> sub{bits.data() + static_cast<size_t>(s) * p,
                               static_cast<size_t>(p)};
        value_to_bits(rank, sub.subspan(0, static_cast<size_t>(p1)));

        size_t pos = static_cast<size_t>(p1);
        for (int b : active) {
            for (int r = 0; r < layout.M_hat; ++r) {
                const int label =
                    symbol_labels[static_cast<size_t>(layout.unit_index(s, b, r))];
                if (label < 0 || label >= layout.Mc)
                    throw ConfigError("demap_frame: missing decision on an active unit");
                value_to_bits(static_cast<uint64_t>(label),
                              sub.subspan(pos, static_cast<size_t>(bps)));
                pos += static_cast<size_t>(bps);
            }
        }
    }
    return bits;
}

}  // namespace doim
