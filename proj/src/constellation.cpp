#include "doim/constellation.hpp"

#include <cmath>
#include <limits>

namespace doim {

namespace {

int gray_decode(int g) {
    int b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

}  // namespace

Constellation::Constellation(int order) {
    if (order == 2) {
        bits_ = 1;
        pts_ = {cplx{1.0, 0.0}, cplx{-1.0, 0.0}};
        return;
    }
    if (order != 4 && order != 16 && order != 64)
        throw ConfigError("Constellation: order must be 2, 4, 16 or 64");
    bits_ = 0;
    while ((1 << bits_) < order) ++bits_;
    const int axis_bits = bits_ / 2;
    const int levels = 1 << axis_bits;
    // Per-axis PAM levels {..,-3,-1,1,3,..} with Gray labels; total power
    // 2*(levels^2-1)/3 before normalization.
    const double norm = std::sqrt(2.0 * (levels * levels - 1) / 3.0);
    pts_.resize(static_cast<size_t>(order));
    for (int label = 0; label < order; ++label) {
        const int gi = label >> axis_bits;
        const int gq = label & (levels - 1);
        const double i_amp = 2.0 * gray_decode(gi) - (levels - 1);
        const double q_amp = 2.0 * gray_decode(gq) - (levels - 1);
        pts_[static_cast<size_t>(label)] = cplx{i_amp / norm, q_amp / norm};
    }
}

int Constellation::demap(cplx z) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (int i = 0; i < order(); ++i) {
        const double d = std::norm(z - pts_[static_cast<size_t>(i)]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace doim
