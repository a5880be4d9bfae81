#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "doim/channel.hpp"
#include "doim/otfs_modem.hpp"

using namespace doim;

namespace {
constexpr double kDeltaF = 15e3;
}

TEST_CASE("raised cosine: unit peak, exact Nyquist zeros, frozen off-grid value") {
    CHECK(raised_cosine(0.0, 0.4) == 1.0);
    for (int k = 1; k <= 12; ++k) {
        CHECK(raised_cosine(static_cast<double>(k), 0.4) == 0.0);
        CHECK(raised_cosine(static_cast<double>(-k), 0.4) == 0.0);
    }
    // High-precision closed-form evaluations (40-digit arithmetic).
    CHECK(raised_cosine(0.5, 0.4) ==
          doctest::Approx(0.6131383509529570).epsilon(1e-12));
    CHECK(raised_cosine(1.5, 0.4) ==
          doctest::Approx(-0.1490350974368888).epsilon(1e-12));
    // Removable singularity at t = 1/(2*rolloff) = 1.25 Ts.
    CHECK(raised_cosine(1.25, 0.4) ==
          doctest::Approx(-0.1414213562373095).epsilon(1e-12));
    CHECK_THROWS_AS(raised_cosine(0.0, 1.5), ConfigError);
}

TEST_CASE("rrc pulse peak, singularity and unit-energy sampling") {
    CHECK(rrc_pulse(0.0, 0.4) == doctest::Approx(1.1092958178940651).epsilon(1e-12));
    CHECK(rrc_pulse(1.0, 0.4) == doctest::Approx(-0.0931728388223771).epsilon(1e-12));
    // Removable singularity at t = 1/(4*rolloff) = 0.625 Ts.
    CHECK(rrc_pulse(0.625, 0.4) ==
          doctest::Approx(0.3883373640189970).epsilon(1e-12));
    const auto taps = sampled_rrc_taps(0.4, 8);
    CHECK(taps.size() == 17);
    double e = 0.0;
    for (double t : taps) e += t * t;
    CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("doppler split is exact and lands beta in (-0.5, 0.5]") {
    const int N = 32;
    const double T = 1.0 / kDeltaF;
    Rng rng(3);
    for (int t = 0; t < 20000; ++t) {
        const double nu = rng.uniform(-3000.0, 3000.0);
        const auto [k, beta] = doppler_split(nu, N, T);
        CHECK(beta > -0.5);
        CHECK(beta <= 0.5);
        CHECK((k + beta) / (N * T) == doctest::Approx(nu).epsilon(1e-12));
    }
    // Half-bin boundary goes to beta = +0.5, not -0.5.
    const double half = 0.5 / (N * T);
    const auto [k0, b0] = doppler_split(half, N, T);
    CHECK(k0 == 0);
    CHECK(b0 == doctest::Approx(0.5));
    const auto [kz, bz] = doppler_split(0.0, N, T);
    CHECK(kz == 0);
    CHECK(bz == 0.0);
}

TEST_CASE("max doppler landmark: 4 GHz at 300 km/h") {
    CHECK(max_doppler_hz(4e9, 300.0) == doctest::Approx(1111.852).epsilon(1e-4));
    // Doppler resolution 15000/32 = 468.75 Hz keeps |k| <= 3 at 300 km/h.
    const int N = 32;
    const double T = 1.0 / kDeltaF;
    const auto [k, beta] = doppler_split(max_doppler_hz(4e9, 300.0), N, T);
    CHECK(std::abs(k) <= 3);
    (void)beta;
}

TEST_CASE("sample_channel honors the delay profile and gain statistics") {
    const double Ts = 1.0 / (64 * kDeltaF);
    Rng rng(77);
    const DelayProfile profile{4.0, false};
    double power = 0.0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
        const auto ch = sample_channel(4, 1111.85, profile, Ts, rng);
        REQUIRE(ch.paths.size() == 4);
        CHECK(ch.paths[0].delay_s == 0.0);
        for (const auto& p : ch.paths) {
            CHECK(p.delay_s >= 0.0);
            CHECK(p.delay_s <= 4.0 * Ts);
            CHECK(std::abs(p.doppler_hz) <= 1111.85);
            power += std::norm(p.gain);
        }
    }
    CHECK(power / trials == doctest::Approx(1.0).epsilon(0.05));

    const auto still = sample_channel(3, 0.0, profile, Ts, rng);
    for (const auto& p : still.paths) CHECK(p.doppler_hz == 0.0);
}

TEST_CASE("discretize reproduces the tap formula") {
    const int M = 16, N = 8;
    const double Ts = 1.0 / (M * kDeltaF);

    SUBCASE("on-grid path is a single unit tap") {
        ChannelRealization ch;
        ch.paths = {{cplx{1.0, 0.0}, 0.0, 0.0}};
        const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 6);
        for (int u = 0; u < M * N; ++u)
            for (int p = 0; p < 6; ++p)
                CHECK(taps.at(u, p) == (p == 0 ? cplx{1.0, 0.0} : cplx{0.0, 0.0}));
    }

    SUBCASE("fractional delay spreads over the raised cosine") {
        ChannelRealization ch;
        ch.paths = {{cplx{1.0, 0.0}, 1.5 * Ts, 0.0}};
        const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 8);
        for (int p = 0; p < 8; ++p)
            CHECK(taps.at(5, p).real() ==
                  doctest::Approx(raised_cosine(p - 1.5, 0.4)).epsilon(1e-12));
    }

    SUBCASE("doppler rotates taps along u on the expected circle") {
        const double nu = 700.0;
        ChannelRealization ch;
        ch.paths = {{cplx{1.0, 0.0}, 0.0, nu}};
        const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 4);
        for (int u : {0, 1, 7, 100}) {
            const cplx want = std::polar(1.0, 2.0 * kPi * nu * u * Ts);
            CHECK(std::abs(taps.at(u, 0) - want) < 1e-12);
        }
    }

    SUBCASE("P too small for the delay spread") {
        ChannelRealization ch;
        ch.paths = {{cplx{1.0, 0.0}, 9.0 * Ts, 0.0}};
        CHECK_THROWS_AS(discretize(ch, M, N, kDeltaF, 0.4, 6), ConfigError);
    }
}

TEST_CASE("apply_channel: cyclic-shift identity and noise statistics") {
    const int M = 16, N = 8, MN = M * N;
    const double Ts = 1.0 / (M * kDeltaF);
    OtfsModem modem(M, N, 8);
    Rng sig_rng(5);

    TimeSignal s(static_cast<size_t>(MN));
    for (auto& z : s) z = sig_rng.cgaussian(1.0);
    const TimeSignal s_cp = OtfsModem::add_cp(s, 8);

    SUBCASE("integer-delay zero-doppler path is a pure cyclic shift") {
        for (int d : {0, 3}) {
            ChannelRealization ch;
            ch.paths = {{cplx{1.0, 0.0}, d * Ts, 0.0}};
            const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 8);
            Rng rng(1);
            const TimeSignal r = apply_channel(s_cp, taps, NoiseSpec{}, rng);
            REQUIRE(static_cast<int>(r.size()) == MN);
            for (int u = 0; u < MN; ++u)
                CHECK(std::abs(r[static_cast<size_t>(u)] -
                               s[static_cast<size_t>(mod(u - d, MN))]) < 1e-12);
        }
    }

    SUBCASE("zero input gives zero output") {
        ChannelRealization ch;
        ch.paths = {{cplx{0.6, 0.2}, 1.3 * Ts, 400.0}};
        const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 8);
        Rng rng(1);
        const TimeSignal r =
            apply_channel(TimeSignal(static_cast<size_t>(MN + 8)), taps, NoiseSpec{}, rng);
        CHECK(energy(r) == 0.0);
    }

    SUBCASE("CP shorter than channel memory is rejected") {
        ChannelRealization ch;
        ch.paths = {{cplx{1.0, 0.0}, 0.0, 0.0}};
        const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 8);
        const TimeSignal too_short = OtfsModem::add_cp(s, 4);
        Rng rng(1);
        CHECK_THROWS_AS(apply_channel(too_short, taps, NoiseSpec{}, rng), ConfigError);
    }

    SUBCASE("noise-only output matches sigma^2 and the filter autocorrelation") {
        ChannelRealization ch;
        ch.paths = {{cplx{0.0, 0.0}, 0.0, 0.0}};
        const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 2);
        NoiseSpec noise;
        noise.sigma_n2 = 0.25;
        Rng rng(99);
        double var = 0.0;
        cplx lag1{0.0, 0.0}, lag3{0.0, 0.0};
        long n = 0, pairs1 = 0, pairs3 = 0;
        const TimeSignal zero(static_cast<size_t>(MN + 8));
        for (int t = 0; t < 8000; ++t) {
            const TimeSignal r = apply_channel(zero, taps, noise, rng);
            for (int u = 0; u < MN; ++u) {
                var += std::norm(r[static_cast<size_t>(u)]);
                ++n;
                if (u + 1 < MN) {
                    lag1 += r[static_cast<size_t>(u + 1)] * std::conj(r[static_cast<size_t>(u)]);
                    ++pairs1;
                }
                if (u + 3 < MN) {
                    lag3 += r[static_cast<size_t>(u + 3)] * std::conj(r[static_cast<size_t>(u)]);
                    ++pairs3;
                }
            }
        }
        CHECK(var / n == doctest::Approx(0.25).epsilon(0.01));
        // Expected autocorrelation of the unit-energy filter at lags 1, 3.
        const auto g = sampled_rrc_taps(0.4, 8);
        double r1 = 0.0, r3 = 0.0;
        for (size_t j = 0; j + 1 < g.size(); ++j) r1 += g[j] * g[j + 1];
        for (size_t j = 0; j + 3 < g.size(); ++j) r3 += g[j] * g[j + 3];
        CHECK(lag1.real() / pairs1 == doctest::Approx(0.25 * r1).epsilon(0.05));
        CHECK(std::abs(lag3.real() / pairs3 - 0.25 * r3) < 0.003);
    }
}

TEST_CASE("energy conservation over on-grid random channels") {
    const int M = 16, N = 8, MN = M * N;
    const double Ts = 1.0 / (M * kDeltaF);
    OtfsModem modem(M, N, 8);
    Rng rng(123);
    TimeSignal s(static_cast<size_t>(MN));
    for (auto& z : s) z = rng.cgaussian(1.0);
    const TimeSignal s_cp = OtfsModem::add_cp(s, 8);
    const double es = energy(s);
    double ratio = 0.0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const auto ch = sample_channel_on_grid(3, 4, 2, Ts, kDeltaF / N, rng);
        const auto taps = discretize(ch, M, N, kDeltaF, 0.4, 8);
        Rng nrng(1);
        const TimeSignal r = apply_channel(s_cp, taps, NoiseSpec{}, nrng);
        ratio += energy(r) / es;
    }
    CHECK(ratio / trials == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("perturb_csi stays inside the per-parameter bounds") {
    const double Ts = 1.0 / (64 * kDeltaF);
    Rng rng(31);
    const DelayProfile profile{4.0, false};
    const auto ch = sample_channel(4, 1111.85, profile, Ts, rng);

    SUBCASE("eps = 0 is an exact copy") {
        const auto same = perturb_csi(ch, 0.0, rng);
        for (size_t i = 0; i < ch.paths.size(); ++i) {
            CHECK(same.paths[i].gain == ch.paths[i].gain);
            CHECK(same.paths[i].delay_s == ch.paths[i].delay_s);
            CHECK(same.paths[i].doppler_hz == ch.paths[i].doppler_hz);
        }
    }

    SUBCASE("eps = 0.05 bounds hold across 10^4 draws") {
        const double eps = 0.05;
        for (int t = 0; t < 10000; ++t) {
            const auto pert = perturb_csi(ch, eps, rng);
            for (size_t i = 0; i < ch.paths.size(); ++i) {
                CHECK(std::abs(pert.paths[i].gain - ch.paths[i].gain) <=
                      eps * std::abs(ch.paths[i].gain) + 1e-15);
                CHECK(std::abs(pert.paths[i].doppler_hz - ch.paths[i].doppler_hz) <=
                      eps * std::abs(ch.paths[i].doppler_hz) + 1e-15);
                CHECK(std::abs(pert.paths[i].delay_s - ch.paths[i].delay_s) <=
                      eps * std::abs(ch.paths[i].delay_s) + 1e-15);
                CHECK(pert.paths[i].delay_s >= 0.0);
            }
        }
    }
}
