#pragma once

// Shared helpers for the unit and acceptance suites: dense-to-sparse
// adapters, random bits, and the exhaustive ML frame oracle used to
// validate the CMP detector at small scale.

#include <cmath>
#include <limits>
#include <vector>

#include "doim/cmp_detector.hpp"
#include "doim/im_codec.hpp"
#include "doim/rng.hpp"

namespace testsupport {

inline doim::SparseChannelMatrix sparse_from_dense(const std::vector<doim::cplx>& dense,
                                                   int dim, double drop_tol = 0.0) {
    doim::SparseChannelMatrix H;
    H.dim = dim;
    H.row_ptr.resize(static_cast<size_t>(dim) + 1, 0);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            const doim::cplx v = dense[static_cast<size_t>(r) * dim + c];
            if (std::abs(v) > drop_tol) {
                H.col_idx.push_back(c);
                H.val.push_back(v);
            }
        }
        H.row_ptr[static_cast<size_t>(r) + 1] = static_cast<int>(H.col_idx.size());
    }
    H.build_column_index();
    return H;
}

inline doim::BitVec random_bits(doim::Rng& rng, size_t n) {
    doim::BitVec b(n);
    for (auto& v : b) v = static_cast<uint8_t>(rng.bit());
    return b;
}

/// Exhaustive maximum-likelihood decision over every legal single-subframe
/// frame: all codebook ranks times all symbol labelings. Returns the bit
/// string of the arg-min ||y - Hx||^2 candidate.
inline doim::BitVec ml_decode_frame(const std::vector<doim::cplx>& y,
                                    const std::vector<doim::cplx>& dense_h,
                                    const doim::FrameLayout& layout,
                                    const doim::Constellation& constellation) {
    const int dim = layout.M * layout.N;
    const int p1 = layout.index_bits();
    const int bps = layout.bits_per_constellation_symbol();
    const int nsym = layout.k_hat * layout.M_hat;
    const uint64_t sym_space = uint64_t{1} << (bps * nsym);

    double best_cost = std::numeric_limits<double>::max();
    doim::BitVec best_bits;
    doim::BitVec bits(static_cast<size_t>(layout.frame_bits()));
    std::vector<doim::cplx> hx(static_cast<size_t>(dim));
    for (uint64_t rank = 0; rank < layout.legal_patterns(); ++rank) {
        for (uint64_t sym = 0; sym < sym_space; ++sym) {
            for (int i = 0; i < p1; ++i)
                bits[static_cast<size_t>(i)] =
                    static_cast<uint8_t>((rank >> (p1 - 1 - i)) & 1u);
            for (int i = 0; i < bps * nsym; ++i)
                bits[static_cast<size_t>(p1 + i)] =
                    static_cast<uint8_t>((sym >> (bps * nsym - 1 - i)) & 1u);
            const auto mapped = doim::map_frame(bits, layout, constellation);
            for (int r = 0; r < dim; ++r) {
                doim::cplx acc{0.0, 0.0};
                for (int c = 0; c < dim; ++c)
                    acc += dense_h[static_cast<size_t>(r) * dim + c] *
                           mapped.grid.data[static_cast<size_t>(c)];
                hx[static_cast<size_t>(r)] = acc;
            }
            double cost = 0.0;
            for (int r = 0; r < dim; ++r)
                cost += std::norm(y[static_cast<size_t>(r)] - hx[static_cast<size_t>(r)]);
            if (cost < best_cost) {
                best_cost = cost;
                best_bits = bits;
            }
        }
    }
    return best_bits;
}

}  // namespace testsupport
