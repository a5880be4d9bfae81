#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "doim/layout.hpp"

#include "json.hpp"

namespace doim::sim {

/// Resolved experiment configuration. File keys are exactly the field
/// names below; defaults reproduce the reference setup (4 GHz carrier,
/// 15 kHz spacing, 64x32 frame, rolloff 0.4, L = 4 paths at 300 km/h,
/// damping 0.4, rho 0.1, (N_hat, k_hat) = (4, 1) QPSK).
struct ExperimentConfig {
    // frame layout
    int m = 64;
    int n = 32;
    int m_hat = 4;
    int n_hat = 4;
    int k_hat = 1;
    int mc = 4;
    // physics
    double carrier_hz = 4e9;
    double delta_f_hz = 15e3;
    double rolloff = 0.4;
    int paths = 4;
    double velocity_kmh = 300.0;
    double tau_max_samples = 4.0;
    bool on_grid_delays = false;
    // detector
    double damping = 0.4;
    double rho = 0.1;
    int max_iterations = 10;
    double energy_keep = 0.9999;
    // optional power policy: scale active symbols by sqrt(N_hat/k_hat) so
    // the average transmit power per resource unit matches the no-IM
    // baseline; off by default (active symbols keep unit average power)
    bool power_reallocation = false;
    // experiment grids
    std::vector<double> snr_db = {0, 2, 4, 6, 8, 10, 12, 14};
    std::vector<double> epsilon = {0.0, 0.025, 0.05};
    std::vector<int> path_sweep = {2, 5};
    std::vector<double> velocities = {300.0, 1000.0};
    // trial budget
    long min_frames = 400;
    long min_bit_errors = 200;
    long max_frames = 20000;
    long batch_frames = 128;
    // convergence experiment
    int converge_iterations = 30;
    long converge_frames = 200;
    // execution
    uint64_t seed = 1;
    int threads = 0;  // 0 = library default
    std::string mode = "doim";  // or "plain-otfs"

    FrameLayout layout() const;
    double Ts() const { return 1.0 / (m * delta_f_hz); }
    double v_max_hz() const;
    /// Tap count: delay span plus the composite-filter tail (8 Ts each side,
    /// right side only since taps start at p = 0).
    int tap_count() const { return static_cast<int>(tau_max_samples) + 9; }
    int cp_len() const { return tap_count(); }

    void validate() const;
    std::string digest() const;  // FNV-1a hash of the canonical form
    nlohmann::json to_json() const;
};

/// Reads `key = value` lines ('#' comments, blank lines allowed) or, when
/// the file starts with '{', the JSON sidecar written by emit_results.
/// Unknown keys raise ConfigError listing them.
ExperimentConfig parse_config_file(const std::string& path);

/// Applies one `key=value` override onto a parsed config.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

/// Parses an SNR grid given as `lo:step:hi` or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

}  // namespace doim::sim
