#include "doim/otfs_modem.hpp"

#include <string>

namespace doim {

OtfsModem::OtfsModem(int M, int N, int cp_len)
    : m_(M), n_(N), cp_(cp_len), dft_m_(M), dft_n_(N) {
    if (M <= 0 || N <= 0) throw ConfigError("OtfsModem: M, N must be positive");
    if (cp_len < 0 || cp_len >= M * N)
        throw ConfigError("OtfsModem: need 0 <= cp_len < M*N");
}

TFGrid OtfsModem::isfft(const DDGrid& X) const {
    if (X.M != m_ || X.N != n_) throw ConfigError("isfft: grid dimension mismatch");
    TFGrid out(m_, n_);
    out.data = X.data;
    // F_M along the delay axis (columns of the M x N matrix)...
    for (int n = 0; n < n_; ++n)
        dft_m_.forward({out.data.data() + static_cast<size_t>(n) * m_,
                        static_cast<size_t>(m_)});
    // ...then F_N^H along the Doppler axis.
    std::vector<cplx> row(static_cast<size_t>(n_));
    for (int m = 0; m < m_; ++m) {
        for (int n = 0; n < n_; ++n) row[static_cast<size_t>(n)] = out.at(m, n);
        dft_n_.inverse(row);
        for (int n = 0; n < n_; ++n) out.at(m, n) = row[static_cast<size_t>(n)];
    }
    return out;
}

DDGrid OtfsModem::sfft(const TFGrid& Ybar) const {
    if (Ybar.M != m_ || Ybar.N != n_) throw ConfigError("sfft: grid dimension mismatch");
    DDGrid out(m_, n_);
    out.data = Ybar.data;
    for (int n = 0; n < n_; ++n)
        dft_m_.inverse({out.data.data() + static_cast<size_t>(n) * m_,
                        static_cast<size_t>(m_)});
    std::vector<cplx> row(static_cast<size_t>(n_));
    for (int m = 0; m < m_; ++m) {
        for (int n = 0; n < n_; ++n) row[static_cast<size_t>(n)] = out.at(m, n);
        dft_n_.forward(row);
        for (int n = 0; n < n_; ++n) out.at(m, n) = row[static_cast<size_t>(n)];
    }
    return out;
}

TimeSignal OtfsModem::heisenberg(const TFGrid& Xbar) const {
    if (Xbar.M != m_ || Xbar.N != n_)
        throw ConfigError("heisenberg: grid dimension mismatch");
    TimeSignal s(static_cast<size_t>(m_) * n_);
    for (int n = 0; n < n_; ++n) {
        auto block = std::span<cplx>{s.data() + static_cast<size_t>(n) * m_,
                                     static_cast<size_t>(m_)};
        for (int m = 0; m < m_; ++m) block[static_cast<size_t>(m)] = Xbar.at(m, n);
        dft_m_.inverse(block);
    }
    return s;
}

TFGrid OtfsModem::wigner(const TimeSignal& r) const {
    if (static_cast<int>(r.size()) != m_ * n_)
        throw ConfigError("wigner: signal length must be M*N");
    TFGrid out(m_, n_);
    std::vector<cplx> block(static_cast<size_t>(m_));
    for (int n = 0; n < n_; ++n) {
        for (int m = 0; m < m_; ++m)
            block[static_cast<size_t>(m)] = r[static_cast<size_t>(n) * m_ + m];
        dft_m_.forward(block);
        for (int m = 0; m < m_; ++m) out.at(m, n) = block[static_cast<size_t>(m)];
    }
    return out;
}

TimeSignal OtfsModem::add_cp(const TimeSignal& s, int cp_len) {
    if (cp_len < 0 || cp_len >= static_cast<int>(s.size()))
        throw ConfigError("add_cp: need 0 <= cp_len < signal length");
    TimeSignal out;
    out.reserve(s.size() + static_cast<size_t>(cp_len));
    out.insert(out.end(), s.end() - cp_len, s.end());
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

TimeSignal OtfsModem::remove_cp(const TimeSignal& r, int cp_len) {
    if (cp_len < 0 || cp_len > static_cast<int>(r.size()))
        throw ConfigError("remove_cp: cp_len exceeds signal length");
    return TimeSignal(r.begin() + cp_len, r.end());
}

TimeSignal OtfsModem::modulate(const DDGrid& X) const {
    return add_cp(heisenberg(isfft(X)), cp_);
}

DDGrid OtfsModem::demodulate(const TimeSignal& r) const {
    const int mn = m_ * n_;
    if (static_cast<int>(r.size()) == mn + cp_) return sfft(wigner(remove_cp(r, cp_)));
    if (static_cast<int>(r.size()) == mn) return sfft(wigner(r));
    throw ConfigError("demodulate: signal length must be M*N or M*N + cp_len");
}

}  // namespace doim
