#include "doim/sim/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doim/cmp_detector.hpp"
#include "doim/im_codec.hpp"
#include "doim/otfs_modem.hpp"
#include "doim/rng.hpp"

namespace doim::sim {

namespace {

enum StreamPurpose : uint64_t {
    kBits = 0x01,
    kChannel = 0x02,
    kNoise = 0x03,
    kCsi = 0x04,
};

// Streams are keyed by the physical point (SNR, L, velocity), never by
// epsilon or mode, so CSI sweeps at eps = 0 and baseline comparisons see
// the exact same channels and noise.
uint64_t point_key(double snr_db, int paths, double velocity_kmh) {
    uint64_t k = std::bit_cast<uint64_t>(snr_db);
    k = splitmix64(k ^ static_cast<uint64_t>(paths));
    k = splitmix64(k ^ std::bit_cast<uint64_t>(velocity_kmh));
    return k;
}

BitVec random_bits(Rng& rng, size_t count) {
    BitVec bits(count);
    for (auto& b : bits) b = static_cast<uint8_t>(rng.bit());
    return bits;
}

uint64_t take_bits(std::span<const uint8_t> bits) {
    uint64_t v = 0;
    for (uint8_t b : bits) v = (v << 1) | (b & 1u);
    return v;
}

void put_bits(uint64_t v, std::span<uint8_t> bits) {
    for (size_t i = 0; i < bits.size(); ++i)
        bits[i] = static_cast<uint8_t>((v >> (bits.size() - 1 - i)) & 1u);
}

/// Baseline mapping without index modulation: every resource unit carries
/// one constellation symbol; bits fill units in vectorization order.
DDGrid map_plain(const BitVec& bits, const FrameLayout& layout,
                 const Constellation& constellation) {
    const int bps = layout.bits_per_constellation_symbol();
    DDGrid grid(layout.M, layout.N);
    for (int c = 0; c < grid.size(); ++c) {
        const uint64_t label = take_bits(
            {bits.data() + static_cast<size_t>(c) * bps, static_cast<size_t>(bps)});
        grid.data[static_cast<size_t>(c)] = constellation.point(static_cast<int>(label));
    }
    return grid;
}

BitVec demap_plain(const std::vector<int>& labels, const FrameLayout& layout) {
    const int bps = layout.bits_per_constellation_symbol();
    BitVec bits(labels.size() * static_cast<size_t>(bps));
    for (size_t c = 0; c < labels.size(); ++c)
        put_bits(static_cast<uint64_t>(labels[c]),
                 {bits.data() + c * static_cast<size_t>(bps), static_cast<size_t>(bps)});
    return bits;
}

struct TrialCounts {
    long bit_errors = 0;
    long index_bit_errors = 0;
    long symbol_bit_errors = 0;
    int frame_error = 0;
    int iterations = 0;
};

struct PointSums {
    long frames = 0;
    long bit_errors = 0;
    long index_bit_errors = 0;
    long symbol_bit_errors = 0;
    long frame_errors = 0;
    long iterations = 0;

    void add(const TrialCounts& t) {
        ++frames;
        bit_errors += t.bit_errors;
        index_bit_errors += t.index_bit_errors;
        symbol_bit_errors += t.symbol_bit_errors;
        frame_errors += t.frame_error;
        iterations += t.iterations;
    }
};

/// Immutable per-sweep assets shared by all trials.
struct Assets {
    FrameLayout layout;
    Constellation constellation;
    OtfsModem modem;
    Alphabet alphabet;
    int P;
    DelayProfile profile;
    bool plain;
    double boost;  // amplitude scale on active symbols

    explicit Assets(const ExperimentConfig& cfg)
        : layout(cfg.layout()),
          constellation(cfg.mc),
          modem(cfg.m, cfg.n, cfg.cp_len()),
          alphabet(cfg.mode == "plain-otfs"
                       ? Alphabet::constellation_only(constellation)
                       : Alphabet::with_null(constellation)),
          P(cfg.tap_count()),
          profile{cfg.tau_max_samples, cfg.on_grid_delays},
          plain(cfg.mode == "plain-otfs"),
          boost(!plain && cfg.power_reallocation
                    ? std::sqrt(static_cast<double>(cfg.n_hat) / cfg.k_hat)
                    : 1.0) {
        for (auto& p : alphabet.points) p *= boost;
    }
};

struct PointSpec {
    double snr_db = 0.0;
    double epsilon = 0.0;
    int paths = 1;
    double velocity_kmh = 0.0;
};

struct TrialError {
    long total = 0, index = 0, symbol = 0;
};

TrialError count_errors(const BitVec& sent, const BitVec& got, const FrameLayout& layout,
                        bool plain) {
    TrialError e;
    const int p = layout.subframe_bits();
    const int p1 = layout.index_bits();
    for (size_t i = 0; i < sent.size(); ++i) {
        if (sent[i] == got[i]) continue;
        ++e.total;
        if (!plain && static_cast<int>(i % static_cast<size_t>(p)) < p1)
            ++e.index;
        else
            ++e.symbol;
    }
    return e;
}

BitVec decode_current(std::span<const double> posteriors, const Assets& assets) {
    const auto labels = decide_symbols(posteriors, assets.alphabet);
    if (assets.plain) return demap_plain(labels, assets.layout);
    const auto llr = unit_llrs(posteriors, assets.alphabet);
    const auto bl = block_llrs(llr, assets.layout);
    const auto pattern = select_active(bl, assets.layout);
    return demap_frame(labels, pattern, assets.layout, assets.constellation);
}

/// Per-iteration capture for the convergence experiment.
struct TraceSlot {
    std::vector<double> eta;     // per iteration
    std::vector<long> errors;    // decode-now bit errors per iteration
};

TrialCounts run_trial(const ExperimentConfig& cfg, const Assets& assets,
                      const PointSpec& pt, long trial, int max_iterations,
                      TraceSlot* trace) {
    const uint64_t key = point_key(pt.snr_db, pt.paths, pt.velocity_kmh);
    Rng rng_bits(derive_seed(cfg.seed, kBits, key, static_cast<uint64_t>(trial)));
    Rng rng_chan(derive_seed(cfg.seed, kChannel, key, static_cast<uint64_t>(trial)));
    Rng rng_noise(derive_seed(cfg.seed, kNoise, key, static_cast<uint64_t>(trial)));
    Rng rng_csi(derive_seed(cfg.seed, kCsi, key, static_cast<uint64_t>(trial)));

    const FrameLayout& layout = assets.layout;
    const size_t nbits = assets.plain
                             ? static_cast<size_t>(layout.M) * layout.N *
                                   layout.bits_per_constellation_symbol()
                             : static_cast<size_t>(layout.frame_bits());
    const BitVec sent = random_bits(rng_bits, nbits);

    DDGrid tx = assets.plain
                    ? map_plain(sent, layout, assets.constellation)
                    : map_frame(sent, layout, assets.constellation).grid;
    if (assets.boost != 1.0)
        for (auto& z : tx.data) z *= assets.boost;
    const TimeSignal s_cp = assets.modem.modulate(tx);

    const double v_max = max_doppler_hz(cfg.carrier_hz, pt.velocity_kmh);
    const ChannelRealization ch =
        sample_channel(pt.paths, v_max, assets.profile, cfg.Ts(), rng_chan);
    const TapSet taps = discretize(ch, cfg.m, cfg.n, cfg.delta_f_hz, cfg.rolloff, assets.P);

    const double sigma_n2 = std::pow(10.0, -pt.snr_db / 10.0);
    NoiseSpec noise;
    noise.sigma_n2 = sigma_n2;
    noise.rolloff = cfg.rolloff;
    const TimeSignal r = apply_channel(s_cp, taps, noise, rng_noise);
    const DDGrid y = assets.modem.demodulate(r);

    const ChannelRealization ch_det =
        pt.epsilon > 0.0 ? perturb_csi(ch, pt.epsilon, rng_csi) : ch;
    const SparseChannelMatrix H =
        prune(build_channel_matrix(ch_det, cfg.m, cfg.n, cfg.delta_f_hz, cfg.rolloff,
                                   assets.P),
              cfg.energy_keep);

    DetectorConfig det;
    det.damping = cfg.damping;
    det.rho = cfg.rho;
    det.max_iterations = max_iterations;
    det.noise_var = noise.sigma2();

    std::function<void(int, const CmpEngine&)> hook;
    if (trace) {
        trace->eta.assign(static_cast<size_t>(max_iterations), 0.0);
        trace->errors.assign(static_cast<size_t>(max_iterations), 0);
        hook = [&](int iter, const CmpEngine& engine) {
            const BitVec now = decode_current(engine.best_posteriors(), assets);
            const TrialError e = count_errors(sent, now, layout, assets.plain);
            trace->eta[static_cast<size_t>(iter - 1)] = engine.eta();
            trace->errors[static_cast<size_t>(iter - 1)] = e.total;
        };
    }

    const DetectionResult res =
        detect(y.data, H, layout, assets.alphabet, det, hook);

    BitVec got = assets.plain
                     ? demap_plain(res.symbols, layout)
                     : demap_frame(res.symbols, res.pattern, layout, assets.constellation);
    const TrialError e = count_errors(sent, got, layout, assets.plain);

    if (trace) {
        // Frames that stopped early keep their final state for the rest
        // of the iteration axis.
        for (int j = res.iterations; j < max_iterations; ++j) {
            trace->eta[static_cast<size_t>(j)] = res.final_eta;
            trace->errors[static_cast<size_t>(j)] = e.total;
        }
    }

    TrialCounts out;
    out.bit_errors = e.total;
    out.index_bit_errors = e.index;
    out.symbol_bit_errors = e.symbol;
    out.frame_error = e.total > 0 ? 1 : 0;
    out.iterations = res.iterations;
    return out;
}

long frame_bit_count(const Assets& assets) {
    return assets.plain ? static_cast<long>(assets.layout.M) * assets.layout.N *
                              assets.layout.bits_per_constellation_symbol()
                        : assets.layout.frame_bits();
}

ResultRecord make_record(const ExperimentConfig& cfg, const Assets& assets,
                         const PointSpec& pt, const PointSums& sums,
                         double wall_seconds) {
    const long nbits = frame_bit_count(assets);
    const long total_bits = sums.frames * nbits;
    const int p1 = assets.layout.index_bits();
    const long index_bits =
        assets.plain ? 0
                     : sums.frames * static_cast<long>(p1) * assets.layout.subframes();
    const long symbol_bits = total_bits - index_bits;
    ResultRecord rec;
    rec.mode = cfg.mode;
    rec.snr_db = pt.snr_db;
    rec.epsilon = pt.epsilon;
    rec.paths = pt.paths;
    rec.velocity_kmh = pt.velocity_kmh;
    rec.frames = sums.frames;
    rec.bit_errors = sums.bit_errors;
    rec.index_bit_errors = sums.index_bit_errors;
    rec.symbol_bit_errors = sums.symbol_bit_errors;
    rec.ber = total_bits > 0 ? static_cast<double>(sums.bit_errors) / total_bits : 0.0;
    rec.index_ber =
        index_bits > 0 ? static_cast<double>(sums.index_bit_errors) / index_bits : 0.0;
    rec.symbol_ber =
        symbol_bits > 0 ? static_cast<double>(sums.symbol_bit_errors) / symbol_bits : 0.0;
    rec.fer = sums.frames > 0 ? static_cast<double>(sums.frame_errors) / sums.frames : 0.0;
    rec.mean_iterations =
        sums.frames > 0 ? static_cast<double>(sums.iterations) / sums.frames : 0.0;
    rec.wall_time_s = wall_seconds;
    rec.config_digest = cfg.digest();
    rec.seed = cfg.seed;
    return rec;
}

ResultRecord run_point(const ExperimentConfig& cfg, const Assets& assets,
                       const PointSpec& pt) {
    const auto t0 = std::chrono::steady_clock::now();
    PointSums sums;
    long next_trial = 0;
    std::vector<TrialCounts> slots;
    while (true) {
        const long batch =
            std::min(cfg.batch_frames, cfg.max_frames - next_trial);
        if (batch <= 0) break;
        slots.assign(static_cast<size_t>(batch), TrialCounts{});
#pragma omp parallel for schedule(dynamic)
        for (long t = 0; t < batch; ++t)
            slots[static_cast<size_t>(t)] = run_trial(cfg, assets, pt, next_trial + t,
                                                      cfg.max_iterations, nullptr);
        for (const auto& s : slots) sums.add(s);
        next_trial += batch;
        const bool floors_met = sums.frames >= cfg.min_frames &&
                                (sums.bit_errors >= cfg.min_bit_errors ||
                                 sums.frames >= cfg.max_frames);
        if (floors_met) break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    return make_record(cfg, assets, pt, sums, secs);
}

void set_threads(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<ResultRecord> run_ber_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    set_threads(cfg);
    const Assets assets(cfg);
    std::vector<ResultRecord> out;
    for (double snr : cfg.snr_db) {
        PointSpec pt{snr, 0.0, cfg.paths, cfg.velocity_kmh};
        out.push_back(run_point(cfg, assets, pt));
    }
    return out;
}

std::vector<ResultRecord> run_csi_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    set_threads(cfg);
    const Assets assets(cfg);
    std::vector<ResultRecord> out;
    for (double eps : cfg.epsilon)
        for (double snr : cfg.snr_db) {
            PointSpec pt{snr, eps, cfg.paths, cfg.velocity_kmh};
            out.push_back(run_point(cfg, assets, pt));
        }
    return out;
}

std::vector<ResultRecord> run_paths_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    set_threads(cfg);
    const Assets assets(cfg);
    std::vector<ResultRecord> out;
    for (int L : cfg.path_sweep)
        for (double snr : cfg.snr_db) {
            PointSpec pt{snr, 0.0, L, cfg.velocity_kmh};
            out.push_back(run_point(cfg, assets, pt));
        }
    return out;
}

std::vector<ConvergenceStats> run_convergence_stats(const ExperimentConfig& cfg) {
    cfg.validate();
    set_threads(cfg);
    const Assets assets(cfg);
    const int iters = cfg.converge_iterations;
    const long frames = cfg.converge_frames;
    std::vector<ConvergenceStats> out;
    for (double vel : cfg.velocities) {
        for (double snr : cfg.snr_db) {
            PointSpec pt{snr, 0.0, cfg.paths, vel};
            const auto t0 = std::chrono::steady_clock::now();
            std::vector<TrialCounts> slots(static_cast<size_t>(frames));
            std::vector<TraceSlot> traces(static_cast<size_t>(frames));
#pragma omp parallel for schedule(dynamic)
            for (long t = 0; t < frames; ++t)
                slots[static_cast<size_t>(t)] =
                    run_trial(cfg, assets, pt, t, iters, &traces[static_cast<size_t>(t)]);
            PointSums sums;
            for (const auto& s : slots) sums.add(s);

            ConvergenceStats cs;
            cs.snr_db = snr;
            cs.velocity_kmh = vel;
            cs.mean_eta.assign(static_cast<size_t>(iters), 0.0);
            cs.ber_if_stopped.assign(static_cast<size_t>(iters), 0.0);
            cs.iteration_histogram.assign(static_cast<size_t>(iters) + 1, 0);
            const double total_bits =
                static_cast<double>(frames) * frame_bit_count(assets);
            for (int j = 0; j < iters; ++j) {
                double eta_sum = 0.0;
                long err_sum = 0;
                for (const auto& tr : traces) {
                    eta_sum += tr.eta[static_cast<size_t>(j)];
                    err_sum += tr.errors[static_cast<size_t>(j)];
                }
                cs.mean_eta[static_cast<size_t>(j)] = eta_sum / static_cast<double>(frames);
                cs.ber_if_stopped[static_cast<size_t>(j)] = err_sum / total_bits;
            }
            for (const auto& s : slots)
                ++cs.iteration_histogram[static_cast<size_t>(s.iterations)];
            const auto t1 = std::chrono::steady_clock::now();
            cs.record = make_record(cfg, assets, pt, sums,
                                    std::chrono::duration<double>(t1 - t0).count());
            out.push_back(std::move(cs));
        }
    }
    return out;
}

std::string results_csv(const std::vector<ResultRecord>& records) {
    std::string csv =
        "mode,snr_db,epsilon,paths,velocity_kmh,ber,index_ber,symbol_ber,fer,"
        "mean_iterations,frames,bit_errors,index_bit_errors,symbol_bit_errors,"
        "config_digest,seed\n";
    for (const auto& r : records) {
        csv += csv_field(r.mode) + ',' + fmt(r.snr_db) + ',' + fmt(r.epsilon) + ',' +
               std::to_string(r.paths) + ',' + fmt(r.velocity_kmh) + ',' + fmt(r.ber) +
               ',' + fmt(r.index_ber) + ',' + fmt(r.symbol_ber) + ',' + fmt(r.fer) +
               ',' + fmt(r.mean_iterations) + ',' + std::to_string(r.frames) + ',' +
               std::to_string(r.bit_errors) + ',' + std::to_string(r.index_bit_errors) +
               ',' + std::to_string(r.symbol_bit_errors) + ',' +
               csv_field(r.config_digest) + ',' + std::to_string(r.seed) + '\n';
    }
    return csv;
}

void emit_results(const std::vector<ResultRecord>& records,
                  const ExperimentConfig& cfg, const std::string& csv_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot open output file: " + csv_path);
    csv << results_csv(records);
    if (!csv) throw IoError("failed writing: " + csv_path);

    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["seed"] = cfg.seed;
    j["config_digest"] = cfg.digest();
    const FrameLayout layout = cfg.layout();
    j["spectral_efficiency_doim"] = spectral_efficiency(layout);
    j["spectral_efficiency_plain"] =
        static_cast<double>(layout.bits_per_constellation_symbol());
    j["snr_definition"] = "unit active-symbol energy over pre-filter noise variance";
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json e;
        e["mode"] = r.mode;
        e["snr_db"] = r.snr_db;
        e["epsilon"] = r.epsilon;
        e["paths"] = r.paths;
        e["velocity_kmh"] = r.velocity_kmh;
        e["ber"] = r.ber;
        e["index_ber"] = r.index_ber;
        e["symbol_ber"] = r.symbol_ber;
        e["fer"] = r.fer;
        e["mean_iterations"] = r.mean_iterations;
        e["frames"] = r.frames;
        e["bit_errors"] = r.bit_errors;
        e["index_bit_errors"] = r.index_bit_errors;
        e["symbol_bit_errors"] = r.symbol_bit_errors;
        e["wall_time_s"] = r.wall_time_s;
        recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    std::ofstream side(csv_path + ".json");
    if (!side) throw IoError("cannot open sidecar file: " + csv_path + ".json");
    side << j.dump(2) << '\n';
    if (!side) throw IoError("failed writing sidecar: " + csv_path + ".json");
}

void emit_convergence_traces(const std::vector<ConvergenceStats>& stats,
                             const std::string& out_stem) {
    for (const auto& cs : stats) {
        char suffix[96];
        std::snprintf(suffix, sizeof suffix, "_snr%g_v%g", cs.snr_db, cs.velocity_kmh);
        {
            std::ofstream f(out_stem + "_trace" + suffix + ".tsv");
            if (!f) throw IoError("cannot open trace file");
            f << "iteration\tmean_eta\tber_if_stopped\n";
            for (size_t j = 0; j < cs.mean_eta.size(); ++j)
                f << (j + 1) << '\t' << fmt(cs.mean_eta[j]) << '\t'
                  << fmt(cs.ber_if_stopped[j]) << '\n';
        }
        {
            std::ofstream f(out_stem + "_hist" + suffix + ".tsv");
            if (!f) throw IoError("cannot open histogram file");
            f << "iterations\tframes\n";
            for (size_t j = 1; j < cs.iteration_histogram.size(); ++j)
                f << j << '\t' << cs.iteration_histogram[j] << '\n';
        }
    }
}

}  // namespace doim::sim
