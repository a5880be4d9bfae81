#include "doim/effective_channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace doim {

namespace {
constexpr double kDustTol = 1e-14;     // build-time magnitude cutoff
constexpr double kSingularTol = 1e-12;  // theta denominator limit rule
}  // namespace

cplx theta_kernel(int q, double beta, int N) {
    // Numerator e^{-j 2 pi (-q - beta)} - 1 reduced by the integer q, so
    // beta = 0 yields an exact zero instead of sin(2 pi q) dust.
    const cplx num = std::polar(1.0, 2.0 * kPi * beta) - 1.0;
    const cplx den = std::polar(1.0, 2.0 * kPi * (q + beta) / N) - 1.0;
    if (std::abs(den) < kSingularTol) return {static_cast<double>(N), 0.0};
    return num / den;
}

cplx gamma_factor(int k, int l, int p, int q, int k_nu, double beta_nu, int M, int N) {
    const cplx xi = std::polar(
        1.0, 2.0 * kPi * (static_cast<double>(l - p) / M) * ((k_nu + beta_nu) / N));
    cplx g = xi * theta_kernel(q, beta_nu, N) / static_cast<double>(N);
    if (l < p) {
        const int res = mod(k - k_nu + q, N);
        g *= std::polar(1.0, -2.0 * kPi * static_cast<double>(res) / N);
    }
    return g;
}

int SparseChannelMatrix::max_row_nnz() const {
    int z = 0;
    for (int r = 0; r < dim; ++r) z = std::max(z, row_nnz(r));
    return z;
}

int SparseChannelMatrix::max_col_nnz() const {
    int z = 0;
    for (int c = 0; c < dim; ++c) z = std::max(z, col_ptr[c + 1] - col_ptr[c]);
    return z;
}

void SparseChannelMatrix::build_column_index() {
    const int nnz = static_cast<int>(col_idx.size());
    entry_row.assign(static_cast<size_t>(nnz), 0);
    std::vector<int> count(static_cast<size_t>(dim) + 1, 0);
    for (int r = 0; r < dim; ++r)
        for (int e = row_ptr[r]; e < row_ptr[r + 1]; ++e) {
            entry_row[static_cast<size_t>(e)] = r;
            ++count[static_cast<size_t>(col_idx[static_cast<size_t>(e)]) + 1];
        }
    col_ptr.assign(static_cast<size_t>(dim) + 1, 0);
    for (int c = 0; c < dim; ++c) col_ptr[c + 1] = col_ptr[c] + count[c + 1];
    col_entry.assign(static_cast<size_t>(nnz), 0);
    std::vector<int> cursor(col_ptr.begin(), col_ptr.end() - 1);
    // Row-major entry order makes each column's list row-sorted.
    for (int e = 0; e < nnz; ++e) {
        const int c = col_idx[static_cast<size_t>(e)];
        col_entry[static_cast<size_t>(cursor[static_cast<size_t>(c)]++)] = e;
    }
}

std::vector<cplx> SparseChannelMatrix::to_dense() const {
    std::vector<cplx> d(static_cast<size_t>(dim) * dim, cplx{0.0, 0.0});
    for (int r = 0; r < dim; ++r)
        for (int e = row_ptr[r]; e < row_ptr[r + 1]; ++e)
            d[static_cast<size_t>(r) * dim + col_idx[static_cast<size_t>(e)]] =
                val[static_cast<size_t>(e)];
    return d;
}

namespace {

struct PathTables {
    cplx gain;
    int k_nu;
    double beta_nu;
    std::vector<double> prc;    // P_rc(p Ts - tau), p in [0, P)
    std::vector<cplx> theta;    // theta(q, beta) / N, q in [0, N)
    std::vector<cplx> xi;       // xi(l - p) indexed by (l - p) + (P - 1)
};

std::vector<PathTables> make_tables(const ChannelRealization& ch, int M, int N,
                                    double delta_f, double rolloff, int P) {
    // The two-branch gamma rule models one delay wrap across the frame
    // edge, which requires the tap span to fit inside the delay axis.
    if (P > M)
        throw ConfigError("build_channel_matrix: tap count P must not exceed M");
    const double Ts = 1.0 / (M * delta_f);
    const double T = M * Ts;
    std::vector<PathTables> tabs;
    tabs.reserve(ch.paths.size());
    for (const auto& path : ch.paths) {
        if (std::ceil(path.delay_s / Ts) > P - 1)
            throw ConfigError("build_channel_matrix: P too small for the path delays");
        PathTables t;
        t.gain = path.gain;
        auto [k_nu, beta_nu] = doppler_split(path.doppler_hz, N, T);
        t.k_nu = k_nu;
        t.beta_nu = beta_nu;
        t.prc.resize(static_cast<size_t>(P));
        for (int p = 0; p < P; ++p)
            t.prc[static_cast<size_t>(p)] = raised_cosine(p - path.delay_s / Ts, rolloff);
        t.theta.resize(static_cast<size_t>(N));
        for (int q = 0; q < N; ++q)
            t.theta[static_cast<size_t>(q)] =
                theta_kernel(q, beta_nu, N) / static_cast<double>(N);
        t.xi.resize(static_cast<size_t>(M + P - 1));
        for (int d = -(P - 1); d < M; ++d)
            t.xi[static_cast<size_t>(d + P - 1)] = std::polar(
                1.0, 2.0 * kPi * (static_cast<double>(d) / M) * ((k_nu + beta_nu) / N));
        tabs.push_back(std::move(t));
    }
    return tabs;
}

SparseChannelMatrix assemble(int MN, std::vector<std::vector<int>>&& cols,
                             std::vector<std::vector<cplx>>&& vals) {
    SparseChannelMatrix H;
    H.dim = MN;
    H.row_ptr.resize(static_cast<size_t>(MN) + 1, 0);
    size_t nnz = 0;
    for (int r = 0; r < MN; ++r) {
        nnz += cols[static_cast<size_t>(r)].size();
        H.row_ptr[static_cast<size_t>(r) + 1] = static_cast<int>(nnz);
    }
    H.col_idx.reserve(nnz);
    H.val.reserve(nnz);
    for (int r = 0; r < MN; ++r) {
        auto& rc = cols[static_cast<size_t>(r)];
        auto& rv = vals[static_cast<size_t>(r)];
        H.col_idx.insert(H.col_idx.end(), rc.begin(), rc.end());
        H.val.insert(H.val.end(), rv.begin(), rv.end());
    }
    H.build_column_index();
    return H;
}

}  // namespace

SparseChannelMatrix build_channel_matrix(const ChannelRealization& ch, int M, int N,
                                         double delta_f, double rolloff, int P) {
    const int MN = M * N;
    const auto tabs = make_tables(ch, M, N, delta_f, rolloff, P);
    std::vector<cplx> phi(static_cast<size_t>(N));
    for (int res = 0; res < N; ++res)
        phi[static_cast<size_t>(res)] =
            std::polar(1.0, -2.0 * kPi * static_cast<double>(res) / N);
    std::vector<std::vector<int>> cols(static_cast<size_t>(MN));
    std::vector<std::vector<cplx>> vals(static_cast<size_t>(MN));

#pragma omp parallel
    {
        std::vector<cplx> scratch(static_cast<size_t>(MN), cplx{0.0, 0.0});
        std::vector<int> touched;
        touched.reserve(static_cast<size_t>(P) * N * tabs.size());
#pragma omp for schedule(static)
        for (int row = 0; row < MN; ++row) {
            const int l = row % M;
            const int k = row / M;
            touched.clear();
            for (const auto& t : tabs) {
                for (int p = 0; p < P; ++p) {
                    const double amp = t.prc[static_cast<size_t>(p)];
                    if (amp == 0.0) continue;
                    const cplx base =
                        t.gain * amp * t.xi[static_cast<size_t>(l - p + P - 1)];
                    const int lp = mod(l - p, M);
                    const bool wrap = l < p;
                    for (int q = 0; q < N; ++q) {
                        cplx c = base * t.theta[static_cast<size_t>(q)];
                        const int kq = mod(k - t.k_nu + q, N);
                        if (wrap) c *= phi[static_cast<size_t>(kq)];
                        const int col = kq * M + lp;
                        if (scratch[static_cast<size_t>(col)] == cplx{0.0, 0.0} &&
                            c != cplx{0.0, 0.0})
                            touched.push_back(col);
                        scratch[static_cast<size_t>(col)] += c;
                    }
                }
            }
            std::sort(touched.begin(), touched.end());
            auto& rc = cols[static_cast<size_t>(row)];
            auto& rv = vals[static_cast<size_t>(row)];
            for (int col : touched) {
                const cplx v = scratch[static_cast<size_t>(col)];
                scratch[static_cast<size_t>(col)] = cplx{0.0, 0.0};
                if (std::abs(v) >= kDustTol) {
                    rc.push_back(col);
                    rv.push_back(v);
                }
            }
        }
    }
    return assemble(MN, std::move(cols), std::move(vals));
}

SparseChannelMatrix build_channel_matrix_reference(const ChannelRealization& ch,
                                                   int M, int N, double delta_f,
                                                   double rolloff, int P) {
    const int MN = M * N;
    if (P > M)
        throw ConfigError("build_channel_matrix_reference: tap count P must not exceed M");
    const double Ts = 1.0 / (M * delta_f);
    const double T = M * Ts;
    for (const auto& path : ch.paths)
        if (std::ceil(path.delay_s / Ts) > P - 1)
            throw ConfigError("build_channel_matrix_reference: P too small");

    std::vector<std::vector<int>> cols(static_cast<size_t>(MN));
    std::vector<std::vector<cplx>> vals(static_cast<size_t>(MN));
    std::vector<cplx> scratch(static_cast<size_t>(MN), cplx{0.0, 0.0});
    std::vector<int> touched;

    for (int row = 0; row < MN; ++row) {
        const int l = row % M;
        const int k = row / M;
        touched.clear();
        for (const auto& path : ch.paths) {
            const auto [k_nu, beta_nu] = doppler_split(path.doppler_hz, N, T);
            for (int p = 0; p < P; ++p) {
                const double amp = raised_cosine(p - path.delay_s / Ts, rolloff);
                if (amp == 0.0) continue;
                for (int q = 0; q < N; ++q) {
                    const cplx c = path.gain * amp *
                                   gamma_factor(k, l, p, q, k_nu, beta_nu, M, N);
                    if (c == cplx{0.0, 0.0}) continue;
                    const int col = mod(k - k_nu + q, N) * M + mod(l - p, M);
                    if (scratch[static_cast<size_t>(col)] == cplx{0.0, 0.0})
                        touched.push_back(col);
                    scratch[static_cast<size_t>(col)] += c;
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int col : touched) {
            const cplx v = scratch[static_cast<size_t>(col)];
            scratch[static_cast<size_t>(col)] = cplx{0.0, 0.0};
            if (std::abs(v) >= kDustTol) {
                cols[static_cast<size_t>(row)].push_back(col);
                vals[static_cast<size_t>(row)].push_back(v);
            }
        }
    }
    return assemble(MN, std::move(cols), std::move(vals));
}

SparseChannelMatrix prune(const SparseChannelMatrix& H, double energy_keep) {
    if (energy_keep <= 0.0 || energy_keep > 1.0)
        throw ConfigError("prune: energy_keep must be in (0, 1]");
    if (energy_keep >= 1.0) {
        SparseChannelMatrix out = H;
        out.build_column_index();
        return out;
    }
    SparseChannelMatrix out;
    out.dim = H.dim;
    out.row_ptr.resize(static_cast<size_t>(H.dim) + 1, 0);
    out.col_idx.reserve(H.col_idx.size());
    out.val.reserve(H.val.size());
    std::vector<int> order;
    std::vector<double> mag2;
    for (int r = 0; r < H.dim; ++r) {
        const int begin = H.row_ptr[r];
        const int n = H.row_nnz(r);
        order.resize(static_cast<size_t>(n));
        std::iota(order.begin(), order.end(), begin);
        mag2.resize(static_cast<size_t>(n));
        double total = 0.0;
        for (int e = begin; e < begin + n; ++e) {
            mag2[static_cast<size_t>(e - begin)] = std::norm(H.val[static_cast<size_t>(e)]);
            total += mag2[static_cast<size_t>(e - begin)];
        }
        // Largest magnitude first; ties broken by column for determinism.
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double na = mag2[static_cast<size_t>(a - begin)];
            const double nb = mag2[static_cast<size_t>(b - begin)];
            if (na != nb) return na > nb;
            return H.col_idx[static_cast<size_t>(a)] < H.col_idx[static_cast<size_t>(b)];
        });
        double acc = 0.0;
        size_t kept = 0;
        while (kept < order.size() && acc < energy_keep * total) {
            acc += mag2[static_cast<size_t>(order[kept] - begin)];
            ++kept;
        }
        std::sort(order.begin(), order.begin() + static_cast<long>(kept),
                  [&](int a, int b) {
                      return H.col_idx[static_cast<size_t>(a)] <
                             H.col_idx[static_cast<size_t>(b)];
                  });
        for (size_t i = 0; i < kept; ++i) {
            out.col_idx.push_back(H.col_idx[static_cast<size_t>(order[i])]);
            out.val.push_back(H.val[static_cast<size_t>(order[i])]);
        }
        out.row_ptr[static_cast<size_t>(r) + 1] = static_cast<int>(out.col_idx.size());
    }
    out.build_column_index();
    return out;
}

std::vector<cplx> impulse_oracle(const ChannelRealization& ch, const OtfsModem& modem,
                                 double delta_f, double rolloff, int P) {
    const int M = modem.M();
    const int N = modem.N();
    const int MN = M * N;
    const TapSet taps = discretize(ch, M, N, delta_f, rolloff, P);
    const NoiseSpec no_noise{};
    std::vector<cplx> dense(static_cast<size_t>(MN) * MN);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < MN; ++c) {
        Rng rng(0);  // unused: zero noise
        DDGrid e(M, N);
        e.data[static_cast<size_t>(c)] = cplx{1.0, 0.0};
        const TimeSignal r = apply_channel(modem.modulate(e), taps, no_noise, rng);
        const DDGrid y = modem.demodulate(r);
        for (int row = 0; row < MN; ++row)
            dense[static_cast<size_t>(row) * MN + c] = y.data[static_cast<size_t>(row)];
    }
    return dense;
}

void dump_triplets(const SparseChannelMatrix& H, std::ostream& os) {
    for (int r = 0; r < H.dim; ++r)
        for (int e = H.row_ptr[r]; e < H.row_ptr[r + 1]; ++e)
            os << r << ' ' << H.col_idx[static_cast<size_t>(e)] << ' '
               << H.val[static_cast<size_t>(e)].real() << ' '
               << H.val[static_cast<size_t>(e)].imag() << '\n';
}

}  // namespace doim
