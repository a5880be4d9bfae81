#pragma once

#include <vector>

#include "doim/common.hpp"

namespace doim {

/// M x N delay-Doppler grid. Entry (l, k) lives at data[k*M + l], which is
/// exactly the vectorization the effective channel and detector use.
struct DDGrid {
    int M = 0;
    int N = 0;
    std::vector<cplx> data;

    DDGrid() = default;
    DDGrid(int m, int n) : M(m), N(n), data(static_cast<size_t>(m) * n) {}

    cplx& at(int l, int k) { return data[static_cast<size_t>(k) * M + l]; }
    cplx at(int l, int k) const { return data[static_cast<size_t>(k) * M + l]; }
    int size() const { return M * N; }
};

/// M x N time-frequency grid, entry (m, n) at data[n*M + m].
struct TFGrid {
    int M = 0;
    int N = 0;
    std::vector<cplx> data;

    TFGrid() = default;
    TFGrid(int m, int n) : M(m), N(n), data(static_cast<size_t>(m) * n) {}

    cplx& at(int m, int n) { return data[static_cast<size_t>(n) * M + m]; }
    cplx at(int m, int n) const { return data[static_cast<size_t>(n) * M + m]; }
};

using TimeSignal = std::vector<cplx>;

inline double energy(const std::vector<cplx>& v) {
    double e = 0.0;
    for (const auto& z : v) e += std::norm(z);
    return e;
}

}  // namespace doim
