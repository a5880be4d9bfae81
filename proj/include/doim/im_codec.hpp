#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "doim/constellation.hpp"
#include "doim/grid.hpp"
#include "doim/layout.hpp"

namespace doim {

/// Splits a subframe's worth of bits into index and symbol parts.
std::pair<BitVec, BitVec> bit_split(const BitVec& bits, const FrameLayout& layout);

/// rank-th k_hat-subset of [0, n_hat) in lexicographic order.
std::vector<int> combo_encode(uint64_t rank, int n_hat, int k_hat);

/// Lexicographic rank of a sorted k_hat-subset. Returns the rank even for
/// patterns outside the legal codebook; legality is the caller's check.
uint64_t combo_decode(std::span<const int> pattern, int n_hat, int k_hat);

struct MappedFrame {
    DDGrid grid;
    ActivationPattern pattern;
};

/// Maps frame_bits() information bits onto the delay-Doppler grid: per
/// subframe, the first p1 bits select the active blocks and the remaining
/// p2 bits fill them with constellation symbols in delay-major order.
/// Inactive units are exact zeros.
MappedFrame map_frame(const BitVec& bits, const FrameLayout& layout,
                      const Constellation& constellation);

/// Inverse of map_frame given per-unit symbol labels (indexed k*M + l;
/// only active units are read) and a legal activation pattern.
BitVec demap_frame(const std::vector<int>& symbol_labels,
                   const ActivationPattern& pattern, const FrameLayout& layout,
                   const Constellation& constellation);

}  // namespace doim
