#pragma once

#include <iosfwd>
#include <vector>

#include "doim/channel.hpp"
#include "doim/otfs_modem.hpp"

namespace doim {

/// Doppler-leakage kernel: the closed form of the geometric sum
/// sum_{n=0}^{N-1} e^{j (2 pi / N)(q + beta) n}. Returns N by limit when
/// q + beta is a multiple of N; exact 0 for integer q != 0 when beta = 0.
cplx theta_kernel(int q, double beta, int N);

/// Phase-and-leakage factor of the delay-Doppler input-output relation.
/// Lower branch (l < p, the delay wrap across the frame edge) carries the
/// extra phi phase.
cplx gamma_factor(int k, int l, int p, int q, int k_nu, double beta_nu, int M, int N);

/// MN x MN effective channel in row/column-indexed sparse form. Row r of
/// the vectorized relation y = Hx + v corresponds to receive unit
/// (l, k) = (r % M, r / M); columns index transmit units the same way.
struct SparseChannelMatrix {
    int dim = 0;
    std::vector<int> row_ptr;    // size dim+1
    std::vector<int> col_idx;    // per entry, ascending within a row
    std::vector<cplx> val;       // per entry
    std::vector<int> col_ptr;    // size dim+1
    std::vector<int> col_entry;  // entry ids grouped by column
    std::vector<int> entry_row;  // row of each entry

    int row_nnz(int r) const { return row_ptr[r + 1] - row_ptr[r]; }
    int max_row_nnz() const;
    int max_col_nnz() const;

    /// Rebuilds the column adjacency from the row-major entries.
    void build_column_index();

    std::vector<cplx> to_dense() const;  // row-major dim x dim
};

/// Builds H per the delay-Doppler input-output relation, accumulating
/// h_i * P_rc(p Ts - tau_i) * gamma over paths, taps and Doppler images.
/// Rows are independent, so construction is OpenMP-parallel across rows;
/// entries below 1e-14 magnitude are dropped as floating-point dust.
SparseChannelMatrix build_channel_matrix(const ChannelRealization& ch, int M, int N,
                                         double delta_f, double rolloff, int P);

/// Serial reference builder: evaluates gamma_factor term by term with no
/// precomputed tables. Kept for testing the parallel builder against.
SparseChannelMatrix build_channel_matrix_reference(const ChannelRealization& ch,
                                                   int M, int N, double delta_f,
                                                   double rolloff, int P);

/// Keeps, per row, the smallest set of largest-magnitude entries whose
/// energy reaches energy_keep times the row energy, then rebuilds the
/// column adjacency. energy_keep = 1 is the identity.
SparseChannelMatrix prune(const SparseChannelMatrix& H, double energy_keep);

/// Dense end-to-end map of the simulated chain, probed column by column:
/// column c = demodulate(apply_channel(modulate(e_c))) with zero noise.
/// Row-major MN x MN; intended for desk-scale validation (MN <= 4096).
std::vector<cplx> impulse_oracle(const ChannelRealization& ch, const OtfsModem& modem,
                                 double delta_f, double rolloff, int P);

/// Text dump, one "row col re im" line per stored entry.
void dump_triplets(const SparseChannelMatrix& H, std::ostream& os);

}  // namespace doim
