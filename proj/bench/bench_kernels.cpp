// Serial-vs-parallel timing for the two data-parallel kernels: effective
// channel construction (row-parallel) and the Monte Carlo trial loop.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "doim/effective_channel.hpp"
#include "doim/sim/harness.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int reps = 5;
    if (argc > 1) reps = std::atoi(argv[1]);
    const int max_threads = omp_get_max_threads();

    doim::sim::ExperimentConfig cfg;  // reference setup 64x32, L=4
    doim::Rng rng(42);
    const doim::DelayProfile profile{cfg.tau_max_samples, false};
    const auto ch = doim::sample_channel(cfg.paths, cfg.v_max_hz(), profile, cfg.Ts(), rng);

    std::printf("== effective channel build, M=%d N=%d L=%d P=%d, %d reps ==\n", cfg.m,
                cfg.n, cfg.paths, cfg.tap_count(), reps);
    doim::SparseChannelMatrix ref;
    {
        const auto t0 = std::chrono::steady_clock::now();
        for (int i = 0; i < reps; ++i)
            ref = doim::build_channel_matrix_reference(ch, cfg.m, cfg.n, cfg.delta_f_hz,
                                                       cfg.rolloff, cfg.tap_count());
        std::printf("%-28s %8.3f ms/build\n", "reference (serial)",
                    1e3 * seconds_since(t0) / reps);
    }
    for (int threads : {1, max_threads}) {
        omp_set_num_threads(threads);
        doim::SparseChannelMatrix H;
        const auto t0 = std::chrono::steady_clock::now();
        for (int i = 0; i < reps; ++i)
            H = doim::build_channel_matrix(ch, cfg.m, cfg.n, cfg.delta_f_hz, cfg.rolloff,
                                           cfg.tap_count());
        std::printf("parallel, %2d thread(s)        %8.3f ms/build  (nnz %zu, Z_row %d)\n",
                    threads, 1e3 * seconds_since(t0) / reps, H.val.size(),
                    H.max_row_nnz());
    }

    std::printf("\n== Monte Carlo trials, one SNR point at 10 dB ==\n");
    cfg.snr_db = {10.0};
    cfg.min_frames = 24;
    cfg.max_frames = 24;
    cfg.min_bit_errors = 0;
    cfg.batch_frames = 24;
    for (int threads : {1, max_threads}) {
        cfg.threads = threads;
        const auto t0 = std::chrono::steady_clock::now();
        const auto recs = doim::sim::run_ber_sweep(cfg);
        const double dt = seconds_since(t0);
        std::printf("%2d thread(s): %6.2f s for %ld frames -> %6.2f frames/s (ber %.3g)\n",
                    threads, dt, recs[0].frames, recs[0].frames / dt, recs[0].ber);
    }
    return 0;
}
