#include "doim/channel.hpp"

#include <cmath>
#include <string>

namespace doim {

namespace {
// Tolerance for hitting the removable singularities of the pulse formulas.
constexpr double kSingularTol = 1e-9;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}
}  // namespace

double raised_cosine(double t, double rolloff) {
    if (rolloff < 0.0 || rolloff > 1.0)
        throw ConfigError("raised_cosine: rolloff must be in [0, 1]");
    if (t == 0.0) return 1.0;
    // Exact Nyquist zero crossings at the other integer sample offsets.
    if (t == std::nearbyint(t)) return 0.0;
    if (rolloff == 0.0) return sinc(t);
    const double sing = 1.0 / (2.0 * rolloff);
    if (std::abs(std::abs(t) - sing) < kSingularTol)
        return (kPi / 4.0) * sinc(sing);
    const double denom = 1.0 - (2.0 * rolloff * t) * (2.0 * rolloff * t);
    return sinc(t) * std::cos(kPi * rolloff * t) / denom;
}

double rrc_pulse(double t, double rolloff) {
    if (rolloff < 0.0 || rolloff > 1.0)
        throw ConfigError("rrc_pulse: rolloff must be in [0, 1]");
    if (rolloff == 0.0) return sinc(t);
    if (std::abs(t) < 1e-12) return 1.0 - rolloff + 4.0 * rolloff / kPi;
    const double sing = 1.0 / (4.0 * rolloff);
    if (std::abs(std::abs(t) - sing) < kSingularTol) {
        const double a = kPi / (4.0 * rolloff);
        return (rolloff / std::sqrt(2.0)) *
               ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * t * (1.0 - rolloff)) +
                       4.0 * rolloff * t * std::cos(kPi * t * (1.0 + rolloff));
    const double den = kPi * t * (1.0 - 16.0 * rolloff * rolloff * t * t);
    return num / den;
}

std::vector<double> sampled_rrc_taps(double rolloff, int half_taps) {
    std::vector<double> taps(static_cast<size_t>(2 * half_taps + 1));
    double e = 0.0;
    for (int m = -half_taps; m <= half_taps; ++m) {
        const double v = rrc_pulse(static_cast<double>(m), rolloff);
        taps[static_cast<size_t>(m + half_taps)] = v;
        e += v * v;
    }
    const double s = 1.0 / std::sqrt(e);
    for (auto& v : taps) v *= s;
    return taps;
}

std::pair<int, double> doppler_split(double doppler_hz, int N, double T) {
    const double x = doppler_hz * N * T;
    // beta in (-0.5, 0.5]: k is the unique integer with x - k in that range.
    int k = static_cast<int>(std::ceil(x - 0.5));
    double beta = x - k;
    if (beta <= -0.5) {  // guard against ceil landing one below
        k -= 1;
        beta = x - k;
    }
    return {k, beta};
}

double max_doppler_hz(double carrier_hz, double velocity_kmh) {
    return carrier_hz * (velocity_kmh / 3.6) / kSpeedOfLight;
}

ChannelRealization sample_channel(int L, double v_max_hz, const DelayProfile& profile,
                                  double Ts, Rng& rng) {
    if (L < 1) throw ConfigError("sample_channel: L must be >= 1");
    ChannelRealization ch;
    ch.paths.resize(static_cast<size_t>(L));
    const double gain_var = 1.0 / static_cast<double>(L);
    for (int i = 0; i < L; ++i) {
        auto& p = ch.paths[static_cast<size_t>(i)];
        p.gain = rng.cgaussian(gain_var);
        const double theta = rng.uniform(-kPi, kPi);
        p.doppler_hz = v_max_hz * std::cos(theta);
        if (i == 0) {
            p.delay_s = 0.0;
        } else if (profile.on_grid) {
            const int taps = std::max(1, static_cast<int>(profile.tau_max_samples));
            p.delay_s = (1 + static_cast<int>(rng.uniform() * taps)) * Ts;
        } else {
            // uniform on (0, tau_max]
            p.delay_s = (1.0 - rng.uniform()) * profile.tau_max_samples * Ts;
        }
    }
    return ch;
}

ChannelRealization sample_channel_on_grid(int L, int max_delay_taps,
                                          int max_doppler_idx, double Ts,
                                          double doppler_res_hz, Rng& rng) {
    if (L < 1) throw ConfigError("sample_channel_on_grid: L must be >= 1");
    ChannelRealization ch;
    ch.paths.resize(static_cast<size_t>(L));
    const double gain_var = 1.0 / static_cast<double>(L);
    for (int i = 0; i < L; ++i) {
        auto& p = ch.paths[static_cast<size_t>(i)];
        p.gain = rng.cgaussian(gain_var);
        const int span = 2 * max_doppler_idx + 1;
        const int k = static_cast<int>(rng.uniform() * span) - max_doppler_idx;
        p.doppler_hz = k * doppler_res_hz;
        p.delay_s = (i == 0) ? 0.0
                             : (1 + static_cast<int>(rng.uniform() * max_delay_taps)) * Ts;
    }
    return ch;
}

TapSet discretize(const ChannelRealization& ch, int M, int N, double delta_f,
                  double rolloff, int P) {
    if (P < 1) throw ConfigError("discretize: P must be >= 1");
    const double Ts = 1.0 / (M * delta_f);
    const int MN = M * N;
    for (const auto& path : ch.paths) {
        if (path.delay_s < 0.0) throw ConfigError("discretize: negative path delay");
        if (std::ceil(path.delay_s / Ts) > P - 1)
            throw ConfigError("discretize: P too small for the maximum path delay");
    }
    TapSet taps;
    taps.MN = MN;
    taps.P = P;
    taps.Ts = Ts;
    taps.h.assign(static_cast<size_t>(MN) * P, cplx{0.0, 0.0});
    for (const auto& path : ch.paths) {
        std::vector<double> prc(static_cast<size_t>(P));
        for (int p = 0; p < P; ++p)
            prc[static_cast<size_t>(p)] = raised_cosine(p - path.delay_s / Ts, rolloff);
        const double w = 2.0 * kPi * path.doppler_hz * Ts;
        for (int u = 0; u < MN; ++u) {
            const cplx rot_u = path.gain * std::polar(1.0, w * u);
            for (int p = 0; p < P; ++p) {
                const double amp = prc[static_cast<size_t>(p)];
                if (amp == 0.0) continue;
                taps.h[static_cast<size_t>(u) * P + p] +=
                    rot_u * std::polar(amp, -w * p);
            }
        }
    }
    return taps;
}

TimeSignal apply_channel(const TimeSignal& s_cp, const TapSet& taps,
                         const NoiseSpec& noise, Rng& rng) {
    const int MN = taps.MN;
    const int cp = static_cast<int>(s_cp.size()) - MN;
    if (cp < 0) throw ConfigError("apply_channel: signal shorter than MN");
    if (cp < taps.P - 1)
        throw ConfigError("apply_channel: CP shorter than the channel memory P-1");
    TimeSignal r(static_cast<size_t>(MN), cplx{0.0, 0.0});
    for (int u = 0; u < MN; ++u) {
        cplx acc{0.0, 0.0};
        for (int p = 0; p < taps.P; ++p)
            acc += taps.at(u, p) * s_cp[static_cast<size_t>(u + cp - p)];
        r[static_cast<size_t>(u)] = acc;
    }
    if (noise.sigma_n2 > 0.0) {
        const auto g = sampled_rrc_taps(noise.rolloff, noise.half_taps);
        const int K = noise.half_taps;
        std::vector<cplx> w(static_cast<size_t>(MN + 2 * K));
        for (auto& v : w) v = rng.cgaussian(noise.sigma_n2);
        for (int u = 0; u < MN; ++u) {
            cplx acc{0.0, 0.0};
            for (int j = 0; j <= 2 * K; ++j)
                acc += g[static_cast<size_t>(j)] * w[static_cast<size_t>(u + j)];
            r[static_cast<size_t>(u)] += acc;
        }
    }
    return r;
}

ChannelRealization perturb_csi(const ChannelRealization& ch, double eps, Rng& rng) {
    if (eps < 0.0) throw ConfigError("perturb_csi: eps must be >= 0");
    if (eps == 0.0) return ch;
    ChannelRealization out = ch;
    for (auto& p : out.paths) {
        const double ug = rng.uniform();
        const double phig = rng.uniform(0.0, 2.0 * kPi);
        p.gain += std::polar(eps * std::abs(p.gain) * ug, phig);
        const double uv = rng.uniform();
        const double sv = rng.bit() ? 1.0 : -1.0;
        p.doppler_hz += eps * std::abs(p.doppler_hz) * uv * sv;
        const double ut = rng.uniform();
        const double st = rng.bit() ? 1.0 : -1.0;
        p.delay_s += eps * std::abs(p.delay_s) * ut * st;
    }
    return out;
}

}  // namespace doim
