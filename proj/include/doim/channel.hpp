#pragma once

#include <utility>
#include <vector>

#include "doim/grid.hpp"
#include "doim/rng.hpp"

namespace doim {

/// Composite raised-cosine response of the transmit/receive RRC filter
/// pair, evaluated in closed form. t is in units of Ts; removable
/// singularities are evaluated by limit.
double raised_cosine(double t_over_ts, double rolloff);

/// Receive-side root raised-cosine impulse response (unnormalized
/// amplitude; the sampled-tap helper below normalizes to unit energy).
double rrc_pulse(double t_over_ts, double rolloff);

/// RRC taps sampled at Ts spacing on [-half_taps, half_taps], normalized
/// to unit energy so the post-filter noise variance equals sigma_n2.
std::vector<double> sampled_rrc_taps(double rolloff, int half_taps);

struct PathParams {
    cplx gain;
    double delay_s = 0.0;
    double doppler_hz = 0.0;
};

/// Doppler split nu = (k + beta)/(N T) with integer k and beta in (-0.5, 0.5].
std::pair<int, double> doppler_split(double doppler_hz, int N, double T);

struct ChannelRealization {
    std::vector<PathParams> paths;
};

struct DelayProfile {
    double tau_max_samples = 4.0;  // in units of Ts
    bool on_grid = false;          // integer-sample delays (testing aid)
};

double max_doppler_hz(double carrier_hz, double velocity_kmh);

/// Draws L paths: gains i.i.d. CN(0, 1/L), Doppler v_max*cos(theta) with
/// theta uniform on [-pi, pi], first delay pinned to 0 and the rest
/// uniform on (0, tau_max].
ChannelRealization sample_channel(int L, double v_max_hz, const DelayProfile& profile,
                                  double Ts, Rng& rng);

/// On-grid variant: delays are whole samples, Dopplers whole Doppler bins
/// (|k| <= max_doppler_idx). Used by oracle-driven tests.
ChannelRealization sample_channel_on_grid(int L, int max_delay_taps,
                                          int max_doppler_idx, double Ts,
                                          double doppler_res_hz, Rng& rng);

/// Time-varying taps h[u, p] = sum_i h_i e^{j2 pi nu_i (u-p) Ts} P_rc(p Ts - tau_i).
struct TapSet {
    int MN = 0;
    int P = 0;
    double Ts = 0.0;
    std::vector<cplx> h;  // h[u*P + p]

    cplx at(int u, int p) const { return h[static_cast<size_t>(u) * P + p]; }
};

TapSet discretize(const ChannelRealization& ch, int M, int N, double delta_f,
                  double rolloff, int P);

struct NoiseSpec {
    double sigma_n2 = 0.0;  // pre-filter white noise variance
    double rolloff = 0.4;
    int half_taps = 8;

    // Receive filter is normalized to unit energy, so the colored-noise
    // variance equals the white input variance.
    double sigma2() const { return sigma_n2; }
};

/// Passes a CP-extended frame through the taps and strips the prefix:
/// output r[u] = sum_p h[u,p] s[[u-p]_MN] + n[u] for u in [0, MN), with n
/// white Gaussian noise shaped by the unit-energy receive RRC filter.
/// The CP length is inferred from the input length and must cover P-1.
TimeSignal apply_channel(const TimeSignal& s_cp, const TapSet& taps,
                         const NoiseSpec& noise, Rng& rng);

/// Adds bounded errors to every path parameter: |delta| <= eps * |true value|,
/// uniform magnitude, uniform phase for gains and random sign for delay and
/// Doppler. eps = 0 returns an identical copy.
ChannelRealization perturb_csi(const ChannelRealization& ch, double eps, Rng& rng);

}  // namespace doim
