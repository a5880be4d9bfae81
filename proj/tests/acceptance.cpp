// Acceptance suite: one pass/fail line per criterion. Each criterion runs
// at its stated tolerance; the binary exits nonzero if any fail.
// Usage: acceptance [criterion numbers...]  (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doim/cmp_detector.hpp"
#include "doim/im_codec.hpp"
#include "doim/sim/harness.hpp"
#include "support.hpp"

using namespace doim;
using namespace doim::sim;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] C%d %s — %s\n", pass ? "PASS" : "FAIL", num, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double frob(const std::vector<cplx>& a) {
    double e = 0.0;
    for (const auto& z : a) e += std::norm(z);
    return std::sqrt(e);
}

/// Log-linear interpolation of the SNR where the curve crosses target.
double crossing_snr(const std::vector<ResultRecord>& recs, double target) {
    for (size_t i = 1; i < recs.size(); ++i) {
        if (recs[i - 1].ber >= target && recs[i].ber < target && recs[i].ber > 0.0) {
            const double x0 = recs[i - 1].snr_db, x1 = recs[i].snr_db;
            const double y0 = std::log10(recs[i - 1].ber), y1 = std::log10(recs[i].ber);
            return x0 + (std::log10(target) - y0) * (x1 - x0) / (y1 - y0);
        }
    }
    return std::nan("");
}

// ---------------------------------------------------------------- C1
void criterion1() {
    const int M = 8, N = 8, P = 8;
    const double dF = 15e3, Ts = 1.0 / (M * dF);
    OtfsModem modem(M, N, P);
    Rng rng(20260809);
    double worst = 0.0;
    int count = 0;
    for (int L : {1, 2, 4})
        for (bool frac_delay : {false, true})
            for (bool frac_dopp : {false, true})
                for (int rep = 0; rep < 2; ++rep) {
                    ChannelRealization ch;
                    ch.paths.resize(static_cast<size_t>(L));
                    for (int i = 0; i < L; ++i) {
                        auto& p = ch.paths[static_cast<size_t>(i)];
                        p.gain = rng.cgaussian(1.0 / L);
                        p.delay_s =
                            (i == 0)
                                ? 0.0
                                : (frac_delay
                                       ? rng.uniform(0.0, 2.5) * Ts
                                       : (1 + static_cast<int>(rng.uniform() * 2)) * Ts);
                        const double res = dF / N;
                        p.doppler_hz =
                            frac_dopp ? rng.uniform(-2.5, 2.5) * res
                                      : (static_cast<int>(rng.uniform() * 5) - 2) * res;
                    }
                    const auto H = build_channel_matrix(ch, M, N, dF, 0.4, P);
                    const auto dense = H.to_dense();
                    const auto oracle = impulse_oracle(ch, modem, dF, 0.4, P);
                    std::vector<cplx> diff(dense.size());
                    for (size_t i = 0; i < dense.size(); ++i)
                        diff[i] = dense[i] - oracle[i];
                    worst = std::max(worst, frob(diff) / frob(oracle));
                    ++count;
                }
    char d[128];
    std::snprintf(d, sizeof d, "%d realizations, worst rel Frobenius %.2e (tol 1e-8)",
                  count, worst);
    report(1, "effective-channel oracle equivalence", worst <= 1e-8 && count >= 20, d);
}

// ---------------------------------------------------------------- C2
void criterion2() {
    const int M = 64, N = 32;
    OtfsModem modem(M, N, 13);
    Rng rng(7);
    DDGrid X(M, N);
    for (auto& z : X.data) z = rng.cgaussian(1.0);
    const double e0 = energy(X.data);
    const TFGrid Xbar = modem.isfft(X);
    const TimeSignal s = modem.heisenberg(Xbar);
    const TimeSignal s_cp = OtfsModem::add_cp(s, 13);
    const DDGrid back = modem.demodulate(s_cp);
    double max_err = 0.0;
    for (size_t i = 0; i < X.data.size(); ++i)
        max_err = std::max(max_err, std::abs(back.data[i] - X.data[i]));
    const double e_tf = std::abs(energy(Xbar.data) / e0 - 1.0);
    const double e_t = std::abs(energy(s) / e0 - 1.0);
    const bool pass = max_err < 1e-12 && e_tf < 1e-12 && e_t < 1e-12;
    char d[160];
    std::snprintf(d, sizeof d,
                  "round-trip max err %.2e, energy drift isfft %.2e, heisenberg %.2e "
                  "(tol 1e-12)",
                  max_err, e_tf, e_t);
    report(2, "modem unitarity and round trip", pass, d);
}

// ---------------------------------------------------------------- C3
void criterion3() {
    Rng rng(99);
    long ranks_checked = 0;
    bool ok = true;
    for (int n_hat = 1; n_hat <= 16 && ok; ++n_hat)
        for (int k_hat = 1; k_hat <= n_hat && ok; ++k_hat) {
            FrameLayout l;
            l.M = 4;
            l.N = n_hat;
            l.M_hat = 4;
            l.N_hat = n_hat;
            l.k_hat = k_hat;
            l.Mc = 4;
            Constellation c(4);
            for (uint64_t rank = 0; rank < l.legal_patterns(); ++rank) {
                const int p1 = l.index_bits();
                BitVec bits(static_cast<size_t>(l.frame_bits()));
                for (int i = 0; i < p1; ++i)
                    bits[static_cast<size_t>(i)] =
                        static_cast<uint8_t>((rank >> (p1 - 1 - i)) & 1u);
                for (size_t i = static_cast<size_t>(p1); i < bits.size(); ++i)
                    bits[i] = static_cast<uint8_t>(rng.bit());
                const auto mapped = map_frame(bits, l, c);
                std::vector<int> labels(static_cast<size_t>(l.M * l.N), -1);
                for (int b : mapped.pattern.subframe(0))
                    for (int r = 0; r < l.M_hat; ++r) {
                        const int u = l.unit_index(0, b, r);
                        labels[static_cast<size_t>(u)] =
                            c.demap(mapped.grid.data[static_cast<size_t>(u)]);
                    }
                if (demap_frame(labels, mapped.pattern, l, c) != bits) ok = false;
                ++ranks_checked;
            }
        }
    // 10^4 random frames at the reference layout.
    FrameLayout l;
    Constellation c(4);
    long frames_ok = 0;
    for (int t = 0; t < 10000; ++t) {
        const BitVec bits =
            testsupport::random_bits(rng, static_cast<size_t>(l.frame_bits()));
        const auto mapped = map_frame(bits, l, c);
        std::vector<int> labels(static_cast<size_t>(l.M * l.N), -1);
        for (int s = 0; s < l.subframes(); ++s)
            for (int b : mapped.pattern.subframe(s))
                for (int r = 0; r < l.M_hat; ++r) {
                    const int u = l.unit_index(s, b, r);
                    labels[static_cast<size_t>(u)] =
                        c.demap(mapped.grid.data[static_cast<size_t>(u)]);
                }
        if (demap_frame(labels, mapped.pattern, l, c) == bits) ++frames_ok;
    }
    char d[128];
    std::snprintf(d, sizeof d,
                  "%ld ranks exhaustive (N_hat<=16), %ld/10000 random frames",
                  ranks_checked, frames_ok);
    report(3, "index codec bijectivity", ok && frames_ok == 10000, d);
}

// ---------------------------------------------------------------- C4
void criterion4() {
    FrameLayout l;
    l.M = 4;
    l.N = 4;
    l.M_hat = 4;
    l.N_hat = 4;
    l.k_hat = 1;
    l.Mc = 4;
    Constellation qpsk(4);
    const Alphabet alpha = Alphabet::with_null(qpsk);
    const double dF = 15e3, Ts = 1.0 / (4 * dF);
    Rng rng(424242);
    const double sigma2 = std::pow(10.0, -20.0 / 10.0);
    int agree = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        // Unit-power realizations keep the oracle well-posed: a blackout
        // fade probes noise decoding, not detector agreement.
        auto ch = sample_channel_on_grid(2, 2, 1, Ts, dF / 4, rng);
        double chp = 0.0;
        for (const auto& p : ch.paths) chp += std::norm(p.gain);
        for (auto& p : ch.paths) p.gain /= std::sqrt(chp);
        const auto Hs = build_channel_matrix(ch, 4, 4, dF, 0.4, 3);
        const auto dense = Hs.to_dense();
        const BitVec bits =
            testsupport::random_bits(rng, static_cast<size_t>(l.frame_bits()));
        const auto mapped = map_frame(bits, l, qpsk);
        std::vector<cplx> y(16, cplx{0.0, 0.0});
        for (int r = 0; r < 16; ++r) {
            for (int c = 0; c < 16; ++c)
                y[static_cast<size_t>(r)] += dense[static_cast<size_t>(r) * 16 + c] *
                                             mapped.grid.data[static_cast<size_t>(c)];
            y[static_cast<size_t>(r)] += rng.cgaussian(sigma2);
        }
        DetectorConfig cfg;
        cfg.noise_var = sigma2;
        const auto res = detect(y, Hs, l, alpha, cfg);
        const BitVec cmp_bits = demap_frame(res.symbols, res.pattern, l, qpsk);
        if (cmp_bits == testsupport::ml_decode_frame(y, dense, l, qpsk)) ++agree;
    }
    char d[96];
    std::snprintf(d, sizeof d, "CMP = ML in %d/%d trials (need >= 990)", agree, trials);
    report(4, "ML-oracle equivalence at small scale", agree >= 990, d);
}

// ---------------------------------------------------------------- C5
void criterion5() {
    ExperimentConfig cfg;
    cfg.snr_db = {5.0, 10.0};
    cfg.velocities = {300.0, 1000.0};
    cfg.converge_frames = 200;
    cfg.converge_iterations = 30;
    const auto stats = run_convergence_stats(cfg);

    // mean iterations to eta = 1 (censored at 30) at 300 km/h
    double mean5 = 0.0, mean10 = 0.0;
    for (const auto& cs : stats) {
        if (cs.velocity_kmh != 300.0) continue;
        if (cs.snr_db == 5.0) mean5 = cs.record.mean_iterations;
        if (cs.snr_db == 10.0) mean10 = cs.record.mean_iterations;
    }
    const bool iters_ok = std::abs(mean5 - 8.0) <= 2.0 && std::abs(mean10 - 10.0) <= 2.0;

    // 300 vs 1000 km/h BER overlap within Monte Carlo error. Standard
    // error approximated frame-wise: errors cluster by frame, so the
    // effective sample count is the error count divided by the mean
    // errors-per-errored-frame.
    bool overlap = true;
    std::string overlap_detail;
    for (double snr : {5.0, 10.0}) {
        const ResultRecord *a = nullptr, *b = nullptr;
        for (const auto& cs : stats) {
            if (cs.snr_db != snr) continue;
            if (cs.velocity_kmh == 300.0) a = &cs.record;
            if (cs.velocity_kmh == 1000.0) b = &cs.record;
        }
        const double se_a =
            a->ber / std::sqrt(std::max(1.0, static_cast<double>(a->frames) / 4.0));
        const double se_b =
            b->ber / std::sqrt(std::max(1.0, static_cast<double>(b->frames) / 4.0));
        if (std::abs(a->ber - b->ber) > 2.0 * (se_a + se_b)) overlap = false;
        char piece[96];
        std::snprintf(piece, sizeof piece, " [%g dB: %.3g vs %.3g]", snr, a->ber, b->ber);
        overlap_detail += piece;
    }

    // Supplementary: where the BER-vs-iteration trace flattens (within 5%
    // of its final value) — the quantity the source figure actually shows.
    std::string flat_detail;
    for (const auto& cs : stats) {
        if (cs.velocity_kmh != 300.0) continue;
        int flat = static_cast<int>(cs.ber_if_stopped.size());
        const double final_ber = cs.ber_if_stopped.back();
        for (size_t j = 0; j < cs.ber_if_stopped.size(); ++j)
            if (cs.ber_if_stopped[j] <= final_ber * 1.05 + 1e-12) {
                flat = static_cast<int>(j + 1);
                break;
            }
        char piece[64];
        std::snprintf(piece, sizeof piece, " ber-flat@%gdB=iter%d", cs.snr_db, flat);
        flat_detail += piece;
    }

    char d[384];
    std::snprintf(d, sizeof d,
                  "mean iters to eta=1 (cap 30): %.1f @5dB (want 8+-2), %.1f @10dB "
                  "(want 10+-2); velocity overlap %s%s; supplementary:%s",
                  mean5, mean10, overlap ? "yes" : "no", overlap_detail.c_str(),
                  flat_detail.c_str());
    report(5, "convergence landmark", iters_ok && overlap, d);
}

// ---------------------------------------------------------------- C6
void criterion6() {
    ExperimentConfig cfg;
    cfg.snr_db = {12, 13, 14, 15, 16, 17, 18};
    cfg.min_frames = 160;  // >= 2e5 bits per point at 1280 bits/frame
    cfg.max_frames = 480;
    cfg.min_bit_errors = 200;
    cfg.batch_frames = 80;
    const auto doim = run_ber_sweep(cfg);
    ExperimentConfig pcfg = cfg;
    pcfg.mode = "plain-otfs";
    pcfg.min_frames = 49;  // >= 2e5 bits at 4096 bits/frame
    const auto plain = run_ber_sweep(pcfg);
    const double x_doim = crossing_snr(doim, 1e-3);
    const double x_plain = crossing_snr(plain, 1e-3);
    const double gain = x_plain - x_doim;
    const bool pass = !std::isnan(gain) && gain >= 0.5 && gain <= 1.5;
    char d[192];
    std::snprintf(d, sizeof d,
                  "1e-3 crossings: doim %.2f dB, plain %.2f dB, gain %.2f dB "
                  "(want 1.0 +- 0.5)",
                  x_doim, x_plain, gain);
    report(6, "IM gain landmark vs plain OTFS", pass, d);
}

// ---------------------------------------------------------------- C7
void criterion7() {
    auto run_one = [](int n_hat, int k_hat, int L) {
        ExperimentConfig cfg;
        cfg.n_hat = n_hat;
        cfg.k_hat = k_hat;
        cfg.paths = L;
        cfg.snr_db = {16.0};
        cfg.min_frames = 240;
        cfg.max_frames = 720;
        cfg.min_bit_errors = 300;
        cfg.batch_frames = 80;
        return run_ber_sweep(cfg)[0];
    };
    const auto a42_l2 = run_one(4, 2, 2);
    const auto a42_l5 = run_one(4, 2, 5);
    const auto a84_l5 = run_one(8, 4, 5);

    auto ci = [](const ResultRecord& r) {
        // Frame-clustered errors: effective sample count ~ frames / 4.
        const double se =
            r.ber / std::sqrt(std::max(1.0, static_cast<double>(r.frames) / 4.0));
        return std::pair<double, double>{r.ber - 1.96 * se, r.ber + 1.96 * se};
    };
    const auto [lo_l2, hi_l2] = ci(a42_l2);
    const auto [lo_l5, hi_l5] = ci(a42_l5);
    const auto [lo_84, hi_84] = ci(a84_l5);
    const bool paths_ok = a42_l5.ber < a42_l2.ber && hi_l5 < lo_l2;
    const bool layout_ok = a84_l5.ber < a42_l5.ber && hi_84 < lo_l5;
    char d[224];
    std::snprintf(d, sizeof d,
                  "@16 dB: (4,2) L=2 ber %.3g, (4,2) L=5 ber %.3g, (8,4) L=5 ber %.3g; "
                  "L-order %s, layout-order %s (95%% CIs disjoint)",
                  a42_l2.ber, a42_l5.ber, a84_l5.ber, paths_ok ? "ok" : "VIOLATED",
                  layout_ok ? "ok" : "VIOLATED");
    report(7, "multipath and layout ordering", paths_ok && layout_ok, d);
}

// ---------------------------------------------------------------- C8
void criterion8() {
    // Crossing comparison for eps in {0, 0.025}.
    ExperimentConfig cfg;
    cfg.snr_db = {12, 13, 14, 15, 16, 17, 18};
    cfg.epsilon = {0.0, 0.025};
    cfg.min_frames = 160;
    cfg.max_frames = 480;
    cfg.min_bit_errors = 200;
    cfg.batch_frames = 80;
    const auto recs = run_csi_sweep(cfg);
    std::vector<ResultRecord> e0, e25;
    for (const auto& r : recs) (r.epsilon == 0.0 ? e0 : e25).push_back(r);
    const double x0 = crossing_snr(e0, 1e-3);
    const double x25 = crossing_snr(e25, 1e-3);
    const bool close = !std::isnan(x0) && !std::isnan(x25) && (x25 - x0) <= 1.0;

    // Monotonicity in eps at a fixed SNR near the crossing (within the
    // Monte Carlo band: a small negative step is indistinguishable from
    // noise, so each step may undershoot by at most 2 frame-level SEs).
    ExperimentConfig mcfg = cfg;
    mcfg.snr_db = {16.0};
    mcfg.epsilon = {0.0, 0.025, 0.05};
    mcfg.min_frames = 240;
    mcfg.max_frames = 720;
    mcfg.min_bit_errors = 300;
    const auto mono = run_csi_sweep(mcfg);
    auto se_of = [](const ResultRecord& r) {
        return r.ber / std::sqrt(std::max(1.0, static_cast<double>(r.frames) / 4.0));
    };
    const bool monotone =
        mono[1].ber >= mono[0].ber - 2.0 * (se_of(mono[0]) + se_of(mono[1])) &&
        mono[2].ber >= mono[1].ber - 2.0 * (se_of(mono[1]) + se_of(mono[2]));
    char d[224];
    std::snprintf(d, sizeof d,
                  "1e-3 crossings: eps=0 %.2f dB, eps=0.025 %.2f dB (delta %.2f, "
                  "want <= 1); ber@16dB: %.3g / %.3g / %.3g for eps 0/0.025/0.05",
                  x0, x25, x25 - x0, mono[0].ber, mono[1].ber, mono[2].ber);
    report(8, "imperfect-CSI robustness", close && monotone, d);
}

// ---------------------------------------------------------------- C9
void criterion9() {
    Rng rng(5150);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int N = 2 + static_cast<int>(rng.uniform() * 63);
        const int q = static_cast<int>(rng.uniform() * N);
        const double beta = rng.uniform(-0.5, 0.5);
        cplx sum{0.0, 0.0};
        for (int n = 0; n < N; ++n)
            sum += std::polar(1.0, 2.0 * kPi * (q + beta) * n / N);
        const double err =
            std::abs(theta_kernel(q, beta, N) - sum) / std::max(1.0, std::abs(sum));
        worst = std::max(worst, err);
    }
    bool exact = true;
    for (int N : {2, 7, 32, 64}) {
        if (theta_kernel(0, 0.0, N) != cplx{static_cast<double>(N), 0.0}) exact = false;
        for (int q = 1; q < N; ++q)
            if (theta_kernel(q, 0.0, N) != cplx{0.0, 0.0}) exact = false;
    }
    char d[128];
    std::snprintf(d, sizeof d,
                  "worst closed-form-vs-sum error %.2e (tol 1e-12); theta(q,0) exact: %s",
                  worst, exact ? "yes" : "NO");
    report(9, "theta kernel identity", worst <= 1e-12 && exact, d);
}

// ---------------------------------------------------------------- C10
void criterion10() {
#ifndef DOIM_SIM_PATH
    report(10, "determinism across parallelism", false, "CLI path not configured");
#else
    const std::string tool = DOIM_SIM_PATH;
    const std::string cfg_path = "/tmp/doim_acc_c10.cfg";
    {
        std::ofstream f(cfg_path);
        f << "m = 16\nn = 8\nsnr_db = 4,8\nmin_frames = 48\nmax_frames = 96\n"
             "min_bit_errors = 20\nbatch_frames = 16\nseed = 777\n";
    }
    auto run = [&](int threads, const std::string& out) {
        const std::string cmd = tool + " ber --config " + cfg_path + " --threads " +
                                std::to_string(threads) + " --out " + out +
                                " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    auto slurp = [](const std::string& p) {
        std::ifstream f(p);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    bool pass = true;
    std::string why = "byte-identical CSV at threads 1/4/16 and on a repeated run";
    if (run(1, "/tmp/doim_acc_t1.csv") != 0 || run(4, "/tmp/doim_acc_t4.csv") != 0 ||
        run(16, "/tmp/doim_acc_t16.csv") != 0) {
        pass = false;
        why = "subcommand exited nonzero";
    } else {
        const std::string c1 = slurp("/tmp/doim_acc_t1.csv");
        const std::string c4 = slurp("/tmp/doim_acc_t4.csv");
        const std::string c16 = slurp("/tmp/doim_acc_t16.csv");
        if (c1.empty() || c1 != c4 || c1 != c16) {
            pass = false;
            why = "CSV outputs differ across thread counts";
        }
        if (pass && (run(4, "/tmp/doim_acc_t4b.csv") != 0 ||
                     slurp("/tmp/doim_acc_t4b.csv") != c4)) {
            pass = false;
            why = "repeated run differs";
        }
    }
    report(10, "determinism across parallelism", pass, why);
#endif
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> want;
    for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
    auto enabled = [&](int n) { return want.empty() || want.count(n) > 0; };
    const auto t0 = std::chrono::steady_clock::now();
    if (enabled(1)) criterion1();
    if (enabled(2)) criterion2();
    if (enabled(3)) criterion3();
    if (enabled(4)) criterion4();
    if (enabled(9)) criterion9();
    if (enabled(10)) criterion10();
    if (enabled(5)) criterion5();
    if (enabled(6)) criterion6();
    if (enabled(7)) criterion7();
    if (enabled(8)) criterion8();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance finished in %.1f s, %d criterion(s) failed\n", secs,
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
