#pragma once

#include <vector>

#include "doim/common.hpp"

namespace doim {

/// Gray-labelled constellation with unit average power. Supported orders:
/// 2 (BPSK) and square QAM 4/16/64. Labels are bit patterns, MSB first;
/// points() is indexed by label.
class Constellation {
  public:
    explicit Constellation(int order);

    int order() const { return static_cast<int>(pts_.size()); }
    int bits_per_symbol() const { return bits_; }

    cplx point(int label) const { return pts_[static_cast<size_t>(label)]; }
    const std::vector<cplx>& points() const { return pts_; }

    /// Hard nearest-point decision, returns the label.
    int demap(cplx z) const;

  private:
    int bits_ = 0;
    std::vector<cplx> pts_;
};

}  // namespace doim
