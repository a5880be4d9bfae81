#pragma once

#include "doim/dft.hpp"
#include "doim/grid.hpp"

namespace doim {

/// Deterministic transforms between delay-Doppler, time-frequency and time
/// domains with rectangular pulses. Every stage is unitary: the per-symbol
/// (I)DFTs carry 1/sqrt(M) scaling and the ISFFT/SFFT use normalized DFT
/// matrices, so energy is preserved end to end. Stateless after
/// construction; safe to share across threads.
class OtfsModem {
  public:
    OtfsModem(int M, int N, int cp_len);

    int M() const { return m_; }
    int N() const { return n_; }
    int cp_len() const { return cp_; }

    TFGrid isfft(const DDGrid& X) const;
    DDGrid sfft(const TFGrid& Ybar) const;

    /// Rectangular-pulse Heisenberg transform: per OFDM symbol n, the time
    /// block is the unitary inverse DFT of Xbar[., n].
    TimeSignal heisenberg(const TFGrid& Xbar) const;

    /// Matched rectangular Wigner transform, exact inverse of heisenberg on
    /// length-MN signals.
    TFGrid wigner(const TimeSignal& r) const;

    static TimeSignal add_cp(const TimeSignal& s, int cp_len);
    static TimeSignal remove_cp(const TimeSignal& r, int cp_len);

    /// isfft -> heisenberg -> add_cp; output length MN + cp_len.
    TimeSignal modulate(const DDGrid& X) const;

    /// remove_cp -> wigner -> sfft. Accepts either an MN + cp_len signal
    /// (strips the prefix) or an already-circular MN signal such as the
    /// channel output.
    DDGrid demodulate(const TimeSignal& r) const;

  private:
    int m_, n_, cp_;
    Dft dft_m_, dft_n_;
};

}  // namespace doim
