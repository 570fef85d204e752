#pragma once

// Classical random-effects baselines: per-study log-odds ratios with their
// sampling variances, DerSimonian-Laird pooling, and the iterative
// maximum-likelihood fit.

#include <vector>

#include "metaor/study.hpp"

namespace metaor {

struct StudyEffect {
    double log_or = 0.0;     // observed log-odds ratio O_i
    double sigma2_hat = 0.0; // sampling variance of O_i
};

enum class PoolMethod { DSL, ML };

struct PooledEstimate {
    double d_hat = 0.0;     // pooled log-odds ratio
    double var_d = 0.0;     // variance of d_hat
    double tau2_hat = 0.0;  // between-study variance
    double q_stat = 0.0;    // Cochran heterogeneity statistic
    PoolMethod method = PoolMethod::DSL;
    bool converged = true;  // ML only
    int iterations = 0;     // ML only
    double ci_lo() const;   // d_hat -/+ 1.96 sqrt(var_d)
    double ci_hi() const;
};

// log[(s1/(n1-s1)) / (s0/(n0-s0))]; throws Error(DegenerateCell) when any
// cell is 0 or n. Real-valued s permitted.
double log_odds(double s1, double n1, double s0, double n0);

// 1/s1 + 1/(n1-s1) + 1/s0 + 1/(n0-s0), same degenerate-cell contract.
double sampling_variance(double s1, double n1, double s0, double n0);

// Builds a StudyEffect, applying the conventional 0.5 continuity correction
// to all four cells when any cell is degenerate. Sets *corrected when given.
StudyEffect study_effect(double s1, double n1, double s0, double n0,
                         bool* corrected = nullptr);

PooledEstimate dsl_fit(const std::vector<StudyEffect>& effects);

struct MlOptions {
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

PooledEstimate ml_fit(const std::vector<StudyEffect>& effects,
                      const MlOptions& options = {});

// Study effects from per-study event-count inputs (treatment, control),
// continuity-correcting degenerate cells; corrections are reported through
// the optional warning sink.
std::vector<StudyEffect> classical_effects(
    const MetaDataset& dataset, const std::vector<std::pair<double, double>>& s_star,
    std::vector<std::string>* warnings = nullptr);

} // namespace metaor
