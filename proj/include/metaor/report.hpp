#pragma once

// Cross-model comparison and artifact emission: result summaries, L1 density
// distances, effective sample size, kernel density estimates for posterior
// draws, forest plots (SVG plus aligned text), and the result table Naive
// vs augmented models are compared through.

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace metaor {

enum class Method { DSL, ML, NaiveBayes, UREE };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct StudyOrEffect {
    std::string id;
    double log_or = 0.0;
    double lo = 0.0, hi = 0.0; // 95% interval, log-odds scale
};

struct MetaResult {
    Method method = Method::DSL;
    double d_mean = 0.0, d_sd = 0.0;
    double d_lo = 0.0, d_hi = 0.0;   // 95% interval, log-odds scale
    double or_mean = 0.0, or_lo = 0.0, or_hi = 0.0;
    // Bayesian runs carry posterior summaries of the remaining parameters.
    double tau2_mean = 0.0, tau2_sd = 0.0;
    double sigma2_mean = 0.0, sigma2_sd = 0.0;
    double m_mean = 0.0, m_sd = 0.0;
    std::vector<StudyOrEffect> study_effects;
    std::map<std::string, double> diagnostics; // rhat_*, accept_*, ...
};

// ---------------------------------------------------------------------------
// Density distance and effective sample size
// ---------------------------------------------------------------------------

// (1/2) * int |fa - fb| over [lo, hi], trapezoid grid with refinement until
// the value is stable to 1e-4; throws Error(GridTooCoarse) if it never is.
double l1_distance(const std::function<double(double)>& fa,
                   const std::function<double(double)>& fb, double lo, double hi);

// Same statistic on pre-tabulated values over a shared grid.
double l1_distance_grid(const std::vector<double>& grid, const std::vector<double>& fa,
                        const std::vector<double>& fb);

double effective_sample_size(double var_naive, double var_uree, double n_total);

// ---------------------------------------------------------------------------
// Kernel density estimate for posterior draws (Gaussian kernel, Silverman
// plug-in bandwidth).
// ---------------------------------------------------------------------------

struct Kde {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
};

double silverman_bandwidth(const std::vector<double>& draws);
Kde kde_density(const std::vector<double>& draws, int grid_points, double lo, double hi,
                double bandwidth = 0.0); // 0 = plug-in

// L1 between two draw sets via common-bandwidth KDEs on a shared grid.
double l1_between_draws(const std::vector<double>& a, const std::vector<double>& b,
                        double* bandwidth_out = nullptr);

// ---------------------------------------------------------------------------
// Forest plot
// ---------------------------------------------------------------------------

struct PlotDocument {
    std::string svg;
    std::string text;
};

// One row per study effect (if any), then one summary row per method.
// Log-scaled odds-ratio axis with an OR = 1 reference line. Byte-
// deterministic for identical inputs.
PlotDocument forest_plot(const std::vector<MetaResult>& results,
                         const std::vector<StudyOrEffect>& study_effects);

// ---------------------------------------------------------------------------
// Result table: parameters d, sigma2, m, tau2 as rows, Mean/SD for each of
// two Bayesian fits as columns.
// ---------------------------------------------------------------------------

std::string comparison_table_csv(const MetaResult& naive, const MetaResult& uree);

// Simple vector helpers shared by summaries and tests.
double mean_of(const std::vector<double>& xs);
double sd_of(const std::vector<double>& xs);
double quantile_of(std::vector<double> xs, double p);

} // namespace metaor
