// Link-level simulator CLI for block-wise Doppler index modulation over
// OTFS. One subcommand per experiment: ber, converge, csi, paths.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "doim/sim/harness.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string snr;
    std::vector<std::string> sets;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
    bool trace = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_out) {
    cmd->add_option("--config", args.config_path, "key = value config file or JSON sidecar");
    cmd->add_option("--out", args.out_path, "output CSV path")->default_val(default_out);
    cmd->add_option("--snr", args.snr, "SNR grid override, lo:step:hi or comma list");
    cmd->add_option("--seed", args.seed, "master seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
    cmd->add_option("--set", args.sets, "extra key=value config override")
        ->take_all();
}

doim::sim::ExperimentConfig resolve(const CommonArgs& args) {
    doim::sim::ExperimentConfig cfg;
    if (!args.config_path.empty())
        cfg = doim::sim::parse_config_file(args.config_path);
    for (const auto& kv : args.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw doim::ConfigError("--set expects key=value, got '" + kv + "'");
        doim::sim::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!args.snr.empty()) doim::sim::apply_override(cfg, "snr_db", args.snr);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.threads >= 0) cfg.threads = args.threads;
    cfg.validate();
    return cfg;
}

std::string stem(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path;
    return path.substr(0, dot);
}

void print_summary(const std::vector<doim::sim::ResultRecord>& records) {
    std::printf("%-11s %8s %8s %6s %9s %12s %8s %10s\n", "mode", "snr_db", "eps", "L",
                "vel_kmh", "ber", "frames", "mean_iter");
    for (const auto& r : records)
        std::printf("%-11s %8.3g %8.3g %6d %9.4g %12.4g %8ld %10.2f\n", r.mode.c_str(),
                    r.snr_db, r.epsilon, r.paths, r.velocity_kmh, r.ber, r.frames,
                    r.mean_iterations);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DoIM-OTFS link-level simulator"};
    app.require_subcommand(1);

    CommonArgs ber_args, conv_args, csi_args, paths_args;
    auto* ber = app.add_subcommand("ber", "BER vs SNR sweep in the configured mode");
    add_common(ber, ber_args, "ber.csv");
    auto* conv = app.add_subcommand(
        "converge", "per-iteration convergence statistics across velocities");
    add_common(conv, conv_args, "converge.csv");
    conv->add_flag("--trace", conv_args.trace,
                   "write per-iteration trace and histogram TSV files");
    auto* csi = app.add_subcommand("csi", "BER sweep under bounded CSI errors");
    add_common(csi, csi_args, "csi.csv");
    auto* paths = app.add_subcommand("paths", "BER sweep across path counts");
    add_common(paths, paths_args, "paths.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ber->parsed()) {
            const auto cfg = resolve(ber_args);
            const auto records = doim::sim::run_ber_sweep(cfg);
            doim::sim::emit_results(records, cfg, ber_args.out_path);
            print_summary(records);
        } else if (conv->parsed()) {
            const auto cfg = resolve(conv_args);
            const auto stats = doim::sim::run_convergence_stats(cfg);
            std::vector<doim::sim::ResultRecord> records;
            for (const auto& s : stats) records.push_back(s.record);
            doim::sim::emit_results(records, cfg, conv_args.out_path);
            if (conv_args.trace)
                doim::sim::emit_convergence_traces(stats, stem(conv_args.out_path));
            print_summary(records);
        } else if (csi->parsed()) {
            const auto cfg = resolve(csi_args);
            const auto records = doim::sim::run_csi_sweep(cfg);
            doim::sim::emit_results(records, cfg, csi_args.out_path);
            print_summary(records);
        } else if (paths->parsed()) {
            const auto cfg = resolve(paths_args);
            const auto records = doim::sim::run_paths_sweep(cfg);
            doim::sim::emit_results(records, cfg, paths_args.out_path);
            print_summary(records);
        }
    } catch (const doim::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const doim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
