#pragma once

// Synthetic censored-trial generation under the hierarchical binomial model,
// the product-limit estimator used as the variance oracle, the bundled
// ten-study simulated fixture with known truth, and Monte Carlo helpers that
// back density and estimator tests.

#include <cstdint>
#include <vector>

#include "metaor/stats.hpp"
#include "metaor/study.hpp"

namespace metaor {

struct SimConfig {
    int k = 10;
    double mean_arm_size = 100.0;
    double d = 0.0;     // population log-odds ratio (flag below for 1.0)
    double tau2 = 0.4;
    double m = -0.8;
    double sigma2 = 0.1;
    // Log follow-up time parameters per arm (log days by default).
    double psi_treatment = 5.89, phi_sd_treatment = 0.83;
    double psi_control = 7.05, phi_sd_control = 0.63;
    double horizon = 365.25; // days
    std::uint64_t seed = 1;
};

struct SimArm {
    double n = 0.0;
    double s = 0.0;     // true deaths by horizon
    double e = 0.0;     // observed deaths (death seen before censoring)
    double lost = 0.0;  // censored before horizon and before any death
    double kappa = 0.0; // product-limit survival estimate at horizon
};

struct SimStudy {
    SimArm treatment;
    SimArm control;
    double delta = 0.0;
    double u = 0.0;
};

SimStudy generate_study(const SimConfig& config, Rng& rng);
std::vector<SimStudy> generate_dataset(const SimConfig& config);

// Convert generated studies into the extraction schema (rounded KM reading,
// observed deaths, mean/variance follow-up implied by the config).
MetaDataset sim_to_dataset(const std::vector<SimStudy>& sims, const SimConfig& config,
                           int kappa_digits = 2);

struct KmEstimate {
    double kappa = 0.0;
    double greenwood_var = 0.0;
};

// Product-limit estimate at the horizon from observed death times and
// censoring times (every subject appears in exactly one of the two lists).
KmEstimate km_estimate(const std::vector<double>& death_times,
                       const std::vector<double>& censor_times, double horizon);

// The bundled ten-study simulated fixture: extraction-facing dataset plus
// the hidden truth per study.
struct FixtureTruth {
    double s_treatment = 0.0;
    double s_control = 0.0;
    double lost_treatment = 0.0;
    double lost_control = 0.0;
};

struct SimulatedFixture {
    MetaDataset dataset; // n, e, rounded kappa, follow-up summaries
    std::vector<FixtureTruth> truth;
};

SimulatedFixture load_simulated_fixture();

// Monte Carlo mean-squared-error comparison of the censoring-inflated death
// probability estimate against the raw observed fraction, at one
// (death probability, auc) grid point.
struct MseComparison {
    double mse_inflated = 0.0; // k* = (e/n)/(1-auc)
    double mse_raw = 0.0;      // e/n
};

MseComparison mc_mse_death_probability(double death_prob, double auc_target,
                                       int subjects_per_study, int replicates,
                                       Rng& rng);

// Solve for the lognormal log-mean giving a target expected person-time-lost
// fraction at horizon 1, holding the log-sd fixed.
double solve_psi_for_auc(double auc_target, double phi_sd);

} // namespace metaor
