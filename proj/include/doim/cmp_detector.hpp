#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "doim/constellation.hpp"
#include "doim/effective_channel.hpp"
#include "doim/layout.hpp"

namespace doim {

/// Detection alphabet: the constellation points in label order, plus the
/// null symbol (0) appended last when augmented. The null participates in
/// means and variances like any other point; the uniform prior covers all
/// Mc + 1 points.
struct Alphabet {
    std::vector<cplx> points;
    bool augmented = false;

    int size() const { return static_cast<int>(points.size()); }
    int constellation_size() const { return augmented ? size() - 1 : size(); }
    int null_index() const { return augmented ? size() - 1 : -1; }

    static Alphabet with_null(const Constellation& c);
    static Alphabet constellation_only(const Constellation& c);
};

struct DetectorConfig {
    double damping = 0.4;    // Delta
    double rho = 0.1;        // convergence slack
    int max_iterations = 10;
    double noise_var = 0.0;  // sigma^2 seen after the receive filter
};

struct IterationStats {
    double eta = 0.0;
    double mean_max_posterior = 0.0;
};

struct DetectionResult {
    std::vector<int> symbols;        // per-unit constellation label
    ActivationPattern pattern;       // empty when the alphabet has no null
    std::vector<double> block_llrs;  // subframe-major, size g * N_hat
    int iterations = 0;
    double final_eta = 0.0;
    std::vector<IterationStats> trace;
    std::vector<double> best_posteriors;  // dim * alphabet size
};

/// Message-passing state over the factor graph induced by the stored
/// entries of H. One engine instance serves one frame and is
/// single-threaded; distinct instances share the immutable H freely.
class CmpEngine {
  public:
    CmpEngine(const SparseChannelMatrix& H, const Alphabet& alphabet,
              const DetectorConfig& cfg);

    /// Uniform pmfs on every edge, eta history reset.
    void init_messages();

    /// Observation-to-variable messages: Gaussian interference moments per
    /// edge, then per-symbol log-likelihoods.
    void observation_update(std::span<const cplx> y);

    /// Variable-to-observation messages: damped extrinsic products in the
    /// log domain, plus fresh posteriors, eta and the mean max-posterior.
    void variable_update();

    double eta() const { return eta_; }
    bool converged() const { return converged_count_ == dim_; }
    double mean_max_posterior() const { return mean_max_post_; }

    /// Adopts the current posteriors as best-so-far iff eta strictly
    /// improved on the best recorded one. Returns whether it did.
    bool update_best();

    double best_eta() const { return best_eta_; }
    std::span<const double> posteriors() const { return post_; }
    std::span<const double> best_posteriors() const { return best_; }
    int dim() const { return dim_; }
    int alphabet_size() const { return A_; }

    // Test hooks.
    std::pair<cplx, double> interference_moments(int d, int c) const;
    void set_edge_pmf(int d, int c, std::span<const double> pmf);
    std::span<const double> edge_pmf(int d, int c) const;
    std::span<const double> edge_loglik(int d, int c) const;

  private:
    int find_edge(int d, int c) const;
    void refresh_edge_moments(int e);

    const SparseChannelMatrix* H_;
    Alphabet alpha_;
    DetectorConfig cfg_;
    int dim_ = 0;
    int A_ = 0;
    int edges_ = 0;

    std::vector<double> hx_re_, hx_im_;  // edges x A: H[d,c] * point
    std::vector<double> habs2_;          // |H[d,c]|^2 per edge
    std::vector<double> pmf_;            // edges x A
    std::vector<cplx> mean_;             // per edge, E[x] under pmf
    std::vector<double> e2_;             // per edge, E[|x|^2]
    std::vector<double> logv_;           // edges x A
    std::vector<double> off_;            // per-edge log-domain offset (max)
    std::vector<cplx> hmean_;            // per edge H * mean scratch
    std::vector<double> post_;           // dim x A
    std::vector<double> best_;           // dim x A
    std::vector<double> sc_;             // dim x A scratch (column sums)
    std::vector<double> lp_;             // length-A scratch
    double eta_ = 0.0;
    double best_eta_ = 0.0;
    double mean_max_post_ = 0.0;
    int converged_count_ = 0;
};

/// Fraction of variables whose max posterior clears 1 - rho.
double convergence_indicator(std::span<const double> posteriors, int alphabet_size,
                             double rho);

/// Active-vs-null log-likelihood ratio per resource unit:
/// log(sum of constellation mass) - log(null mass), floored at 1e-12.
std::vector<double> unit_llrs(std::span<const double> posteriors,
                              const Alphabet& alphabet);

/// Mean unit LLR per block, subframe-major (index s * N_hat + b).
std::vector<double> block_llrs(std::span<const double> unit_llr,
                               const FrameLayout& layout);

/// Picks the k_hat largest-LLR blocks per subframe; an illegal combination
/// (rank outside the codebook) is replaced by the legal combination with
/// the largest LLR sum. Ties break toward lower block indices.
ActivationPattern select_active(std::span<const double> block_llr,
                                const FrameLayout& layout);

/// Per-unit argmax over the constellation part of the alphabet.
std::vector<int> decide_symbols(std::span<const double> posteriors,
                                const Alphabet& alphabet);

/// Full loop: iterate message passing until eta = 1 or the iteration cap,
/// then derive block LLRs, the legalized activation pattern and symbol
/// decisions from the best-so-far posteriors. Deterministic given inputs.
/// The hook, when set, runs after every iteration (convergence tracing).
DetectionResult detect(std::span<const cplx> y, const SparseChannelMatrix& H,
                       const FrameLayout& layout, const Alphabet& alphabet,
                       const DetectorConfig& cfg,
                       const std::function<void(int, const CmpEngine&)>& hook = {});

}  // namespace doim
