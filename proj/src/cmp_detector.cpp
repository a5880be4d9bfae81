#include "doim/cmp_detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "doim/im_codec.hpp"

namespace doim {

namespace {
constexpr double kVarFloor = 1e-12;   // on per-edge interference variance
constexpr double kProbFloor = 1e-12;  // before logs in the LLR
}  // namespace

Alphabet Alphabet::with_null(const Constellation& c) {
    Alphabet a;
    a.points = c.points();
    a.points.push_back(cplx{0.0, 0.0});
    a.augmented = true;
    return a;
}

Alphabet Alphabet::constellation_only(const Constellation& c) {
    Alphabet a;
    a.points = c.points();
    a.augmented = false;
    return a;
}

CmpEngine::CmpEngine(const SparseChannelMatrix& H, const Alphabet& alphabet,
                     const DetectorConfig& cfg)
    : H_(&H), alpha_(alphabet), cfg_(cfg) {
    if (cfg.damping <= 0.0 || cfg.damping > 1.0)
        throw ConfigError("CmpEngine: damping must be in (0, 1]");
    if (cfg.rho <= 0.0 || cfg.rho >= 1.0)
        throw ConfigError("CmpEngine: rho must be in (0, 1)");
    if (cfg.max_iterations < 1)
        throw ConfigError("CmpEngine: max_iterations must be >= 1");
    dim_ = H.dim;
    A_ = alpha_.size();
    edges_ = static_cast<int>(H.col_idx.size());
    const size_t ea = static_cast<size_t>(edges_) * A_;
    hx_re_.resize(ea);
    hx_im_.resize(ea);
    habs2_.resize(static_cast<size_t>(edges_));
    for (int e = 0; e < edges_; ++e) {
        const cplx h = H.val[static_cast<size_t>(e)];
        habs2_[static_cast<size_t>(e)] = std::norm(h);
        for (int a = 0; a < A_; ++a) {
            const cplx hx = h * alpha_.points[static_cast<size_t>(a)];
            hx_re_[static_cast<size_t>(e) * A_ + a] = hx.real();
            hx_im_[static_cast<size_t>(e) * A_ + a] = hx.imag();
        }
    }
    pmf_.resize(ea);
    mean_.resize(static_cast<size_t>(edges_));
    e2_.resize(static_cast<size_t>(edges_));
    logv_.resize(ea);
    off_.resize(static_cast<size_t>(edges_));
    hmean_.resize(static_cast<size_t>(edges_));
    post_.resize(static_cast<size_t>(dim_) * A_);
    best_.resize(static_cast<size_t>(dim_) * A_);
    sc_.resize(static_cast<size_t>(dim_) * A_);
    lp_.resize(static_cast<size_t>(A_));
    init_messages();
}

void CmpEngine::init_messages() {
    const double u = 1.0 / static_cast<double>(A_);
    std::fill(pmf_.begin(), pmf_.end(), u);
    cplx msum{0.0, 0.0};
    double esum = 0.0;
    for (const auto& pt : alpha_.points) {
        msum += pt;
        esum += std::norm(pt);
    }
    std::fill(mean_.begin(), mean_.end(), msum * u);
    std::fill(e2_.begin(), e2_.end(), esum * u);
    std::fill(post_.begin(), post_.end(), u);
    std::fill(best_.begin(), best_.end(), u);
    eta_ = 0.0;
    best_eta_ = 0.0;
    mean_max_post_ = u;
    converged_count_ = 0;
}

void CmpEngine::observation_update(std::span<const cplx> y) {
    if (static_cast<int>(y.size()) != dim_)
        throw ConfigError("observation_update: y length mismatch");
    const auto& H = *H_;
    for (int d = 0; d < dim_; ++d) {
        const int begin = H.row_ptr[d];
        const int end = H.row_ptr[d + 1];
        cplx acc_mean{0.0, 0.0};
        double acc_var = 0.0;
        for (int e = begin; e < end; ++e) {
            const cplx hm = H.val[static_cast<size_t>(e)] * mean_[static_cast<size_t>(e)];
            hmean_[static_cast<size_t>(e)] = hm;
            acc_mean += hm;
            acc_var += e2_[static_cast<size_t>(e)] * habs2_[static_cast<size_t>(e)] -
                       std::norm(hm);
        }
        const double yr = y[static_cast<size_t>(d)].real();
        const double yi = y[static_cast<size_t>(d)].imag();
        for (int e = begin; e < end; ++e) {
            const cplx hm = hmean_[static_cast<size_t>(e)];
            const double own_var =
                e2_[static_cast<size_t>(e)] * habs2_[static_cast<size_t>(e)] -
                std::norm(hm);
            double var = acc_var - own_var + cfg_.noise_var;
            if (var < kVarFloor) var = kVarFloor;
            const double inv = 1.0 / var;
            const double zr = yr - (acc_mean.real() - hm.real());
            const double zi = yi - (acc_mean.imag() - hm.imag());
            const double* hxr = &hx_re_[static_cast<size_t>(e) * A_];
            const double* hxi = &hx_im_[static_cast<size_t>(e) * A_];
            double* lv = &logv_[static_cast<size_t>(e) * A_];
            double mx = -1e300;
            for (int a = 0; a < A_; ++a) {
                const double dr = zr - hxr[a];
                const double di = zi - hxi[a];
                lv[a] = -(dr * dr + di * di) * inv;
                if (lv[a] > mx) mx = lv[a];
            }
            // Log-domain offset for conditioning. Any per-edge constant
            // cancels in the softmaxes downstream, so the max stands in
            // for the logsumexp at no cost in the normalized messages.
            off_[static_cast<size_t>(e)] = mx;
        }
    }
}

void CmpEngine::variable_update() {
    const auto& H = *H_;
    const double delta = cfg_.damping;
    const double one_minus = 1.0 - delta;
    double max_post_sum = 0.0;
    int converged = 0;
    for (int c = 0; c < dim_; ++c) {
        const int begin = H.col_ptr[c];
        const int end = H.col_ptr[c + 1];
        double* sc = &sc_[static_cast<size_t>(c) * A_];
        std::fill(sc, sc + A_, 0.0);
        for (int t = begin; t < end; ++t) {
            const int e = H.col_entry[static_cast<size_t>(t)];
            const double* lv = &logv_[static_cast<size_t>(e) * A_];
            const double norm = off_[static_cast<size_t>(e)];
            for (int a = 0; a < A_; ++a) sc[a] += lv[a] - norm;
        }
        // Damped extrinsic messages back to each observation node.
        for (int t = begin; t < end; ++t) {
            const int e = H.col_entry[static_cast<size_t>(t)];
            const double* lv = &logv_[static_cast<size_t>(e) * A_];
            const double norm = off_[static_cast<size_t>(e)];
            double* lp = lp_.data();
            double mx = -1e300;
            for (int a = 0; a < A_; ++a) {
                lp[a] = sc[a] - (lv[a] - norm);
                if (lp[a] > mx) mx = lp[a];
            }
            double s = 0.0;
            for (int a = 0; a < A_; ++a) {
                lp[a] = std::exp(lp[a] - mx);
                s += lp[a];
            }
            double* p = &pmf_[static_cast<size_t>(e) * A_];
            if (s > 0.0) {
                const double inv = 1.0 / s;
                for (int a = 0; a < A_; ++a)
                    p[a] = delta * lp[a] * inv + one_minus * p[a];
            } else {
                const double u = 1.0 / static_cast<double>(A_);
                for (int a = 0; a < A_; ++a) p[a] = delta * u + one_minus * p[a];
            }
            refresh_edge_moments(e);
        }
        // Posterior over all connected observations.
        double* po = &post_[static_cast<size_t>(c) * A_];
        double mx = -1e300;
        for (int a = 0; a < A_; ++a)
            if (sc[a] > mx) mx = sc[a];
        double s = 0.0;
        for (int a = 0; a < A_; ++a) {
            po[a] = std::exp(sc[a] - mx);
            s += po[a];
        }
        double pmax = 0.0;
        if (s > 0.0) {
            const double inv = 1.0 / s;
            for (int a = 0; a < A_; ++a) {
                po[a] *= inv;
                if (po[a] > pmax) pmax = po[a];
            }
        } else {
            const double u = 1.0 / static_cast<double>(A_);
            for (int a = 0; a < A_; ++a) po[a] = u;
            pmax = u;
        }
        max_post_sum += pmax;
        if (pmax >= 1.0 - cfg_.rho) ++converged;
    }
    converged_count_ = converged;
    eta_ = static_cast<double>(converged) / static_cast<double>(dim_);
    mean_max_post_ = max_post_sum / static_cast<double>(dim_);
}

void CmpEngine::refresh_edge_moments(int e) {
    const double* p = &pmf_[static_cast<size_t>(e) * A_];
    cplx m{0.0, 0.0};
    double q = 0.0;
    for (int a = 0; a < A_; ++a) {
        m += p[a] * alpha_.points[static_cast<size_t>(a)];
        q += p[a] * std::norm(alpha_.points[static_cast<size_t>(a)]);
    }
    mean_[static_cast<size_t>(e)] = m;
    e2_[static_cast<size_t>(e)] = q;
}

bool CmpEngine::update_best() {
    if (eta_ > best_eta_) {
        best_ = post_;
        best_eta_ = eta_;
        return true;
    }
    return false;
}

int CmpEngine::find_edge(int d, int c) const {
    const auto& H = *H_;
    for (int e = H.row_ptr[d]; e < H.row_ptr[d + 1]; ++e)
        if (H.col_idx[static_cast<size_t>(e)] == c) return e;
    throw ConfigError("CmpEngine: no edge between observation " + std::to_string(d) +
                      " and variable " + std::to_string(c));
}

std::pair<cplx, double> CmpEngine::interference_moments(int d, int c) const {
    const auto& H = *H_;
    cplx mu{0.0, 0.0};
    double var = cfg_.noise_var;
    for (int e = H.row_ptr[d]; e < H.row_ptr[d + 1]; ++e) {
        if (H.col_idx[static_cast<size_t>(e)] == c) continue;
        const cplx h = H.val[static_cast<size_t>(e)];
        const double* p = &pmf_[static_cast<size_t>(e) * A_];
        cplx ex{0.0, 0.0};
        double ex2 = 0.0;
        for (int a = 0; a < A_; ++a) {
            ex += p[a] * alpha_.points[static_cast<size_t>(a)];
            ex2 += p[a] * std::norm(alpha_.points[static_cast<size_t>(a)]);
        }
        mu += h * ex;
        var += ex2 * std::norm(h) - std::norm(h * ex);
    }
    return {mu, var};
}

void CmpEngine::set_edge_pmf(int d, int c, std::span<const double> pmf) {
    if (static_cast<int>(pmf.size()) != A_)
        throw ConfigError("set_edge_pmf: pmf size mismatch");
    const int e = find_edge(d, c);
    std::copy(pmf.begin(), pmf.end(), pmf_.begin() + static_cast<size_t>(e) * A_);
    refresh_edge_moments(e);
}

std::span<const double> CmpEngine::edge_pmf(int d, int c) const {
    const int e = find_edge(d, c);
    return {&pmf_[static_cast<size_t>(e) * A_], static_cast<size_t>(A_)};
}

std::span<const double> CmpEngine::edge_loglik(int d, int c) const {
    const int e = find_edge(d, c);
    return {&logv_[static_cast<size_t>(e) * A_], static_cast<size_t>(A_)};
}

double convergence_indicator(std::span<const double> posteriors, int alphabet_size,
                             double rho) {
    const int dim = static_cast<int>(posteriors.size()) / alphabet_size;
    int count = 0;
    for (int c = 0; c < dim; ++c) {
        double mx = 0.0;
        for (int a = 0; a < alphabet_size; ++a)
            mx = std::max(mx, posteriors[static_cast<size_t>(c) * alphabet_size + a]);
        if (mx >= 1.0 - rho) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(dim);
}

std::vector<double> unit_llrs(std::span<const double> posteriors,
                              const Alphabet& alphabet) {
    if (!alphabet.augmented)
        throw ConfigError("unit_llrs: alphabet has no null symbol");
    const int A = alphabet.size();
    const int dim = static_cast<int>(posteriors.size()) / A;
    std::vector<double> llr(static_cast<size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        const double* p = &posteriors[static_cast<size_t>(c) * A];
        double active = 0.0;
        for (int a = 0; a < A - 1; ++a) active += p[a];
        const double null_mass = p[A - 1];
        llr[static_cast<size_t>(c)] = std::log(std::max(active, kProbFloor)) -
                                      std::log(std::max(null_mass, kProbFloor));
    }
    return llr;
}

std::vector<double> block_llrs(std::span<const double> unit_llr,
                               const FrameLayout& layout) {
    const int g = layout.subframes();
    std::vector<double> out(static_cast<size_t>(g) * layout.N_hat, 0.0);
    for (int s = 0; s < g; ++s)
        for (int b = 0; b < layout.N_hat; ++b) {
            double acc = 0.0;
            for (int r = 0; r < layout.M_hat; ++r)
                acc += unit_llr[static_cast<size_t>(layout.unit_index(s, b, r))];
            out[static_cast<size_t>(s) * layout.N_hat + b] =
                acc / static_cast<double>(layout.M_hat);
        }
    return out;
}

ActivationPattern select_active(std::span<const double> block_llr,
                                const FrameLayout& layout) {
    const int g = layout.subframes();
    const int nh = layout.N_hat;
    const int kh = layout.k_hat;
    ActivationPattern pat;
    pat.n_hat = nh;
    pat.k_hat = kh;
    pat.blocks.resize(static_cast<size_t>(g) * kh);
    std::vector<int> order(static_cast<size_t>(nh));
    for (int s = 0; s < g; ++s) {
        const double* llr = &block_llr[static_cast<size_t>(s) * nh];
        for (int b = 0; b < nh; ++b) order[static_cast<size_t>(b)] = b;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (llr[a] != llr[b]) return llr[a] > llr[b];
            return a < b;
        });
        std::vector<int> chosen(order.begin(), order.begin() + kh);
        std::sort(chosen.begin(), chosen.end());
        if (combo_decode(chosen, nh, kh) >= layout.legal_patterns()) {
            // Replace with the legal combination of largest LLR sum; the
            // scan order (ascending rank) makes ties fall to lower indices.
            double best_sum = -1e300;
            uint64_t best_rank = 0;
            for (uint64_t rank = 0; rank < layout.legal_patterns(); ++rank) {
                const auto cand = combo_encode(rank, nh, kh);
                double sum = 0.0;
                for (int b : cand) sum += llr[b];
                if (sum > best_sum) {
                    best_sum = sum;
                    best_rank = rank;
                }
            }
            chosen = combo_encode(best_rank, nh, kh);
        }
        std::copy(chosen.begin(), chosen.end(), pat.subframe(s).begin());
    }
    return pat;
}

std::vector<int> decide_symbols(std::span<const double> posteriors,
                                const Alphabet& alphabet) {
    const int A = alphabet.size();
    const int S = alphabet.constellation_size();
    const int dim = static_cast<int>(posteriors.size()) / A;
    std::vector<int> out(static_cast<size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        const double* p = &posteriors[static_cast<size_t>(c) * A];
        int best = 0;
        for (int a = 1; a < S; ++a)
            if (p[a] > p[best]) best = a;
        out[static_cast<size_t>(c)] = best;
    }
    return out;
}

DetectionResult detect(std::span<const cplx> y, const SparseChannelMatrix& H,
                       const FrameLayout& layout, const Alphabet& alphabet,
                       const DetectorConfig& cfg,
                       const std::function<void(int, const CmpEngine&)>& hook) {
    CmpEngine engine(H, alphabet, cfg);
    DetectionResult res;
    res.trace.reserve(static_cast<size_t>(cfg.max_iterations));
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        engine.observation_update(y);
        engine.variable_update();
        engine.update_best();
        res.trace.push_back({engine.eta(), engine.mean_max_posterior()});
        res.iterations = iter;
        if (hook) hook(iter, engine);
        if (engine.converged()) break;
    }
    res.final_eta = engine.eta();
    res.best_posteriors.assign(engine.best_posteriors().begin(),
                               engine.best_posteriors().end());
    res.symbols = decide_symbols(res.best_posteriors, alphabet);
    if (alphabet.augmented) {
        const auto llr = unit_llrs(res.best_posteriors, alphabet);
        res.block_llrs = block_llrs(llr, layout);
        res.pattern = select_active(res.block_llrs, layout);
    }
    return res;
}

}  // namespace doim
