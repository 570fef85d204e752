#pragma once

// Hierarchical Bayesian engine for the binomial random-effects model:
// conjugate draws for (d, tau2, m, sigma2), Metropolis moves for the
// per-study effects, and, in augmented mode, Metropolis-within-Gibbs moves
// for the latent true and KM-implied event counts with truncation-respecting
// reflective proposals.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metaor/pipeline.hpp"
#include "metaor/report.hpp"

namespace metaor {

// Variance priors are inverse-gamma with density ~ x^{-shape-1} exp(-scale/x),
// conjugate update (shape + k/2, scale + SS/2).
struct Priors {
    double d_mean = 0.0, d_sd = 2.35;
    double m_mean = 0.0, m_sd = 1.98;
    double tau2_shape = 3.0, tau2_scale = 0.5;
    double sigma2_shape = 3.0, sigma2_scale = 0.5;
};

struct ChainConfig {
    int chains = 3;
    int burn_in = 2000;
    int iterations = 100000;
    int thin = 10;
    std::uint64_t seed = 20090531;
    double initial_step = 0.5; // Metropolis step scale before tuning
    int tune_interval = 50;    // burn-in tuning window
    int threads = 1;
    bool prior_only = false;   // drop the data term (sampler smoke tests)
};

struct PosteriorDraws {
    std::vector<std::string> columns;
    // Chain-major storage, each chain flattened draw-major.
    std::vector<std::vector<double>> chains;
    int retained_per_chain = 0;
    std::map<std::string, double> acceptance; // post-burn-in rates per block

    std::size_t ncol() const { return columns.size(); }
    int column_index(const std::string& name) const;
    std::vector<double> chain_column(std::size_t chain, int col) const;
    std::vector<double> pooled_column(const std::string& name) const;
};

// Naive model: event counts taken as observed. s_star holds (treatment,
// control) inputs per study.
PosteriorDraws run_naive(const MetaDataset& dataset,
                         const std::vector<std::pair<double, double>>& s_star,
                         const Priors& priors, const ChainConfig& config);

// Augmented model: latent true and KM-implied counts per arm, driven by the
// per-arm reading and events densities.
PosteriorDraws run_uree(const ModelInputs& inputs, const Priors& priors,
                        const ChainConfig& config);

// Potential scale reduction factor. Throws Error(InsufficientChains) with
// fewer than two chains.
double gelman_rubin(const PosteriorDraws& draws, const std::string& parameter);

MetaResult summarize(const PosteriorDraws& draws, Method method);

void write_draws_csv(const PosteriorDraws& draws, const std::string& path);
PosteriorDraws read_draws_csv(const std::string& path);

} // namespace metaor
