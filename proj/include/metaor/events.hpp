#pragma once

// Estimated-events densities: the distribution of the true death count s
// given the KM-implied count s+. Built from lognormal follow-up models,
// censoring summaries, truncation bounds, and a censoring-regime-dependent
// KM variance, all feeding the symmetric truncated normal. Also houses the
// observed-deaths inflation estimator used when no survival plot exists.

#include <optional>
#include <utility>
#include <vector>

#include "metaor/stats.hpp"
#include "metaor/study.hpp"

namespace metaor {

// Lognormal model of follow-up times: log T ~ N(psi, phi_sd^2).
struct FollowUpModel {
    double psi = 0.0;    // mean of log follow-up time
    double phi_sd = 0.0; // SD of log follow-up time
    FollowUpCase source_case = FollowUpCase::Absent;
};

struct CensoringSummary {
    double lambda = 0.0;       // P(censored before horizon)
    double c = 0.0;            // expected censored count, n * lambda
    double auc_fraction = 0.0; // expected fraction of person-time lost
};

struct EeDensity {
    double center = 0.0;           // s+
    double variance = 0.0;         // B = n^2 b
    double lb_raw = 0.0, ub_raw = 0.0;
    double lb_sym = 0.0, ub_sym = 0.0;
    bool clamped = false;          // s+ fell outside [lb_raw, ub_raw]

    bool point_mass() const { return !(lb_sym < ub_sym) || variance <= 0.0; }
    TruncNormal trunc_normal() const;
    double logpdf(double s) const;
    double sample(double u01) const;
};

FollowUpModel followup_from_mean_var(double mean, double variance);
FollowUpModel followup_from_quartiles(double q1, double q2, double q3);

// Mean of the SDs extracted in the *other* studies; donor variances come
// from mean/variance summaries (a pooled summary donates once, per-arm
// summaries once per arm). Throws Error(NoDonorStudies) when none exist.
double donor_sd_mean(const MetaDataset& dataset, std::size_t exclude_index);

// Dispatch on summary kind; MeanOnly requires donor_variance.
FollowUpModel followup_model(const FollowUpSummary& summary,
                             std::optional<double> donor_variance = std::nullopt);

CensoringSummary censoring_summary(const FollowUpModel& fm, double n, double horizon);

// Truncation bounds for the true death count. Throws InconsistentBounds
// when the case formula yields LB > UB.
std::pair<double, double> event_bounds(BoundCase bound_case, double n,
                                       std::optional<double> e,
                                       std::optional<double> r, double c);

enum class KmVarianceRegime {
    Greenwood,              // censor fraction below 0.25
    GreenwoodCensoringAvg,  // [0.25, 0.35)
    CensoringProportional,  // [0.35, 0.50)
    CensoringAucAvg,        // [0.50, 0.70)
    AucProportional,        // 0.70 and above
};

struct KmVariance {
    double b = 0.0;
    KmVarianceRegime regime = KmVarianceRegime::Greenwood;
    bool e_substituted = false; // Greenwood needed e; round(n(1-kappa)) used
};

// Variance of the KM survival probability, regime chosen by the censored
// fraction c/n.
KmVariance km_variance(double kappa, double n, std::optional<double> e, double c,
                       double auc_fraction);

// Reported-CI override: b from the half-width of a 95% interval.
double km_variance_from_ci(double ci_lo, double ci_hi);

// Symmetric truncated normal around s_plus with variance n^2 b; s_plus
// outside [lb, ub] is clamped to the nearest bound (point mass).
EeDensity ee_density(double s_plus, double b, double n, double lb, double ub);

// Recompute the symmetric truncation for a new center, keeping B and the
// raw bounds.
EeDensity ee_recenter(const EeDensity& base, double new_center);

// Death-probability estimate from observed deaths under censoring:
// k* = (e/n) / (1 - auc). Outside the stated domain the raw e/n is used and
// flagged.
struct NoKmEstimate {
    double k_star = 0.0;  // estimated death probability
    double s_plus = 0.0;  // n * k_star
    bool domain_ok = true;
};

NoKmEstimate no_km_death_estimate(double e, double n, double auc_fraction);

} // namespace metaor
