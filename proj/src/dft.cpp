#include "doim/dft.hpp"

#include <cmath>

namespace doim {

namespace {
bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Dft::Dft(int n) : n_(n), pow2_(is_pow2(n)) {
    if (n <= 0) throw ConfigError("Dft: size must be positive");
    if (pow2_) {
        twiddle_.resize(static_cast<size_t>(n) / 2);
        for (int k = 0; k < n / 2; ++k)
            twiddle_[static_cast<size_t>(k)] = std::polar(1.0, -2.0 * kPi * k / n);
        bitrev_.resize(static_cast<size_t>(n));
        int log2n = 0;
        while ((1 << log2n) < n) ++log2n;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1) << (log2n - 1 - b);
            bitrev_[static_cast<size_t>(i)] = r;
        }
    } else {
        mat_.resize(static_cast<size_t>(n) * n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                mat_[static_cast<size_t>(r) * n + c] =
                    std::polar(1.0, -2.0 * kPi * r * c / n);
    }
}

void Dft::fft(std::span<cplx> x, bool invert) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) {
        int r = bitrev_[static_cast<size_t>(i)];
        if (i < r) std::swap(x[static_cast<size_t>(i)], x[static_cast<size_t>(r)]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len / 2;
        const int step = n / len;
        for (int start = 0; start < n; start += len) {
            for (int k = 0; k < half; ++k) {
                cplx w = twiddle_[static_cast<size_t>(k) * step];
                if (invert) w = std::conj(w);
                cplx& a = x[static_cast<size_t>(start + k)];
                cplx& b = x[static_cast<size_t>(start + k + half)];
                cplx t = b * w;
                b = a - t;
                a += t;
            }
        }
    }
}

void Dft::naive(std::span<cplx> x, bool invert) const {
    const int n = n_;
    std::vector<cplx> out(static_cast<size_t>(n), cplx{0.0, 0.0});
    for (int r = 0; r < n; ++r) {
        cplx acc{0.0, 0.0};
        for (int c = 0; c < n; ++c) {
            cplx w = mat_[static_cast<size_t>(r) * n + c];
            if (invert) w = std::conj(w);
            acc += w * x[static_cast<size_t>(c)];
        }
        out[static_cast<size_t>(r)] = acc;
    }
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = out[static_cast<size_t>(i)];
}

void Dft::forward(std::span<cplx> x) const {
    if (static_cast<int>(x.size()) != n_) throw ConfigError("Dft::forward: size mismatch");
    pow2_ ? fft(x, false) : naive(x, false);
    const double s = 1.0 / std::sqrt(static_cast<double>(n_));
    for (auto& v : x) v *= s;
}

void Dft::inverse(std::span<cplx> x) const {
    if (static_cast<int>(x.size()) != n_) throw ConfigError("Dft::inverse: size mismatch");
    pow2_ ? fft(x, true) : naive(x, true);
    const double s = 1.0 / std::sqrt(static_cast<double>(n_));
    for (auto& v : x) v *= s;
}

}  // namespace doim
