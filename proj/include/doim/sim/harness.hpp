#pragma once

#include <string>
#include <vector>

#include "doim/sim/config.hpp"

namespace doim::sim {

/// One Monte Carlo measurement point. Every count is an exact integer
/// tally; rates are their ratios. wall_time_s goes to the JSON sidecar
/// only, keeping the CSV byte-identical across parallelism degrees.
struct ResultRecord {
    std::string mode;
    double snr_db = 0.0;
    double epsilon = 0.0;
    int paths = 0;
    double velocity_kmh = 0.0;
    double ber = 0.0;
    double index_ber = 0.0;
    double symbol_ber = 0.0;
    double fer = 0.0;
    double mean_iterations = 0.0;
    long frames = 0;
    long bit_errors = 0;
    long index_bit_errors = 0;
    long symbol_bit_errors = 0;
    double wall_time_s = 0.0;
    std::string config_digest;
    uint64_t seed = 0;
};

/// Per-iteration aggregates of the convergence experiment at one
/// (SNR, velocity) point.
struct ConvergenceStats {
    double snr_db = 0.0;
    double velocity_kmh = 0.0;
    std::vector<double> mean_eta;          // index = iteration - 1
    std::vector<double> ber_if_stopped;    // BER when decoding at that iteration
    std::vector<long> iteration_histogram; // index = iterations used (1-based)
    ResultRecord record;
};

/// BER vs SNR in the configured mode. Per point, frames run in batches
/// until the error and frame floors are met (or max_frames); each trial
/// owns a counter-derived RNG stream, so the records are identical for
/// any thread count.
std::vector<ResultRecord> run_ber_sweep(const ExperimentConfig& cfg);

/// Fixed-budget runs tracking eta and decode-now BER per iteration, for
/// every configured (SNR, velocity) pair.
std::vector<ConvergenceStats> run_convergence_stats(const ExperimentConfig& cfg);

/// BER sweep where the detector sees a perturbed copy of the channel
/// (per-parameter errors bounded by eps); the true channel still applies
/// the signal. eps = 0 reproduces the plain BER sweep records exactly.
std::vector<ResultRecord> run_csi_sweep(const ExperimentConfig& cfg);

/// BER sweep across path counts with matched seeds.
std::vector<ResultRecord> run_paths_sweep(const ExperimentConfig& cfg);

/// RFC-4180 CSV, one row per record (wall time excluded).
std::string results_csv(const std::vector<ResultRecord>& records);

/// Writes the CSV plus a JSON sidecar (resolved config, seed, digest,
/// spectral efficiencies, per-record wall times) at csv_path + ".json".
void emit_results(const std::vector<ResultRecord>& records,
                  const ExperimentConfig& cfg, const std::string& csv_path);

/// Tab-separated per-iteration traces and iteration histograms, one file
/// pair per (SNR, velocity) point, named after the output stem.
void emit_convergence_traces(const std::vector<ConvergenceStats>& stats,
                             const std::string& out_stem);

}  // namespace doim::sim
