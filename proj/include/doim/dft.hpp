#pragma once

#include <span>
#include <vector>

#include "doim/common.hpp"

namespace doim {

/// Unitary DFT of a fixed size. Radix-2 FFT when the size is a power of
/// two, precomputed-matrix DFT otherwise (frames are desk-scale, so the
/// O(n^2) fallback stays cheap). Plans are immutable after construction
/// and safe to share across threads.
class Dft {
  public:
    explicit Dft(int n);

    int size() const { return n_; }

    /// In-place forward transform, scaled by 1/sqrt(n).
    void forward(std::span<cplx> x) const;

    /// In-place inverse transform, scaled by 1/sqrt(n).
    void inverse(std::span<cplx> x) const;

  private:
    void fft(std::span<cplx> x, bool invert) const;
    void naive(std::span<cplx> x, bool invert) const;

    int n_ = 0;
    bool pow2_ = false;
    std::vector<cplx> twiddle_;  // e^{-j 2 pi k / n}, k in [0, n/2) for FFT
    std::vector<cplx> mat_;      // full forward matrix for the fallback
    std::vector<int> bitrev_;
};

}  // namespace doim
