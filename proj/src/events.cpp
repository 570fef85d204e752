#include "metaor/events.hpp"

#include <algorithm>
#include <cmath>

namespace metaor {

TruncNormal EeDensity::trunc_normal() const {
    return {center, std::sqrt(variance), lb_sym, ub_sym};
}

double EeDensity::logpdf(double s) const {
    if (point_mass())
        return s == center ? 0.0 : -std::numeric_limits<double>::infinity();
    return trunc_normal().logpdf(s);
}

double EeDensity::sample(double u01) const {
    if (point_mass()) return center;
    return trunc_normal().sample(u01);
}

FollowUpModel followup_from_mean_var(double mean, double variance) {
    if (!(mean > 0.0) || variance < 0.0)
        throw Error(ErrorKind::InvalidSummary,
                    "followup_from_mean_var: need mean > 0 and variance >= 0");
    FollowUpModel fm;
    fm.psi = std::log(mean * mean / std::sqrt(variance + mean * mean));
    fm.phi_sd = std::sqrt(std::log1p(variance / (mean * mean)));
    fm.source_case = FollowUpCase::MeanVar;
    return fm;
}

FollowUpModel followup_from_quartiles(double q1, double q2, double q3) {
    if (!(q1 > 0.0 && q1 <= q2 && q2 <= q3))
        throw Error(ErrorKind::InvalidSummary,
                    "followup_from_quartiles: need 0 < q1 <= q2 <= q3");
    FollowUpModel fm;
    fm.psi = std::log(q2);
    fm.phi_sd = (std::log(q3) - std::log(q1)) /
                (norm_quantile(0.75) - norm_quantile(0.25));
    fm.source_case = FollowUpCase::Quartiles;
    return fm;
}

double donor_sd_mean(const MetaDataset& dataset, std::size_t exclude_index) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < dataset.k(); ++i) {
        if (i == exclude_index) continue;
        const auto& s = dataset.studies[i];
        const auto& ft = s.treatment.followup;
        const auto& fc = s.control.followup;
        if (ft.kind == FollowUpSummary::Kind::MeanVar) {
            sum += std::sqrt(ft.variance);
            ++count;
        }
        // A pooled summary is one extracted number; per-arm summaries donate
        // per arm.
        if (!ft.pooled && fc.kind == FollowUpSummary::Kind::MeanVar) {
            sum += std::sqrt(fc.variance);
            ++count;
        }
    }
    if (count == 0)
        throw Error(ErrorKind::NoDonorStudies,
                    "no other study reports a follow-up variance");
    return sum / count;
}

FollowUpModel followup_model(const FollowUpSummary& summary,
                             std::optional<double> donor_variance) {
    using Kind = FollowUpSummary::Kind;
    FollowUpModel fm;
    switch (summary.kind) {
        case Kind::MeanVar:
            fm = followup_from_mean_var(summary.mean, summary.variance);
            break;
        case Kind::Quartiles:
            fm = followup_from_quartiles(summary.q1, summary.q2, summary.q3);
            break;
        case Kind::MeanOnly:
            if (!donor_variance)
                throw Error(ErrorKind::NoDonorStudies,
                            "mean-only summary requires a donor variance");
            fm = followup_from_mean_var(summary.mean, *donor_variance);
            fm.source_case = FollowUpCase::MeanOnly;
            break;
        case Kind::None:
            throw Error(ErrorKind::InvalidSummary, "no follow-up summary present");
    }
    if (summary.pooled) fm.source_case = FollowUpCase::Pooled;
    return fm;
}

CensoringSummary censoring_summary(const FollowUpModel& fm, double n, double horizon) {
    if (!(horizon > 0.0))
        throw Error(ErrorKind::BadInput, "censoring_summary: horizon must be > 0");
    CensoringSummary cs;
    const double log_h = std::log(horizon);
    if (fm.phi_sd <= 0.0) {
        cs.lambda = log_h > fm.psi ? 1.0 : (log_h < fm.psi ? 0.0 : 0.5);
        cs.auc_fraction = log_h > fm.psi ? 1.0 - std::exp(fm.psi) / horizon : 0.0;
        if (log_h == fm.psi) cs.auc_fraction = 0.0;
    } else {
        cs.lambda = norm_cdf((log_h - fm.psi) / fm.phi_sd);
        // Expected fraction of the interval lost: (1/h) * int_0^h F(t) dt.
        const auto cdf = [&](double t) { return lognorm_cdf(t, fm.psi, fm.phi_sd); };
        cs.auc_fraction = integrate(cdf, 0.0, horizon, 1e-8) / horizon;
    }
    cs.auc_fraction = std::clamp(cs.auc_fraction, 0.0, cs.lambda);
    cs.c = n * cs.lambda;
    return cs;
}

std::pair<double, double> event_bounds(BoundCase bound_case, double n,
                                       std::optional<double> e,
                                       std::optional<double> r, double c) {
    double lb = 0.0, ub = n;
    switch (bound_case) {
        case BoundCase::Both:
            lb = *e;
            ub = n - *r;
            break;
        case BoundCase::DeathsOnly:
            lb = *e;
            ub = *e + c;
            break;
        case BoundCase::AtRiskOnly:
            lb = std::max(0.0, n - *r - c);
            ub = n - *r;
            break;
        case BoundCase::Neither:
            lb = 0.0;
            ub = n;
            break;
    }
    if (lb > ub)
        throw Error(ErrorKind::InconsistentBounds,
                    "event bounds crossed; extracted counts are incoherent");
    return {lb, ub};
}

KmVariance km_variance(double kappa, double n, std::optional<double> e, double c,
                       double auc_fraction) {
    const double f = c / n;
    if (!(f >= 0.0 && f < 1.0))
        throw Error(ErrorKind::BadInput, "km_variance: censor fraction outside [0,1)");

    KmVariance out;
    const auto greenwood = [&](bool* substituted) {
        double deaths;
        if (e) {
            deaths = *e;
        } else {
            deaths = std::round(n * (1.0 - kappa));
            if (substituted) *substituted = true;
        }
        deaths = std::clamp(deaths, 0.0, n - 1.0);
        return kappa * kappa * deaths / (n * (n - deaths));
    };
    const double b_censor = f * kappa * (1.0 - kappa);
    const double b_auc = auc_fraction * kappa * (1.0 - kappa);

    if (f < 0.25) {
        out.regime = KmVarianceRegime::Greenwood;
        out.b = greenwood(&out.e_substituted);
    } else if (f < 0.35) {
        out.regime = KmVarianceRegime::GreenwoodCensoringAvg;
        out.b = 0.5 * (greenwood(&out.e_substituted) + b_censor);
    } else if (f < 0.50) {
        out.regime = KmVarianceRegime::CensoringProportional;
        out.b = b_censor;
    } else if (f < 0.70) {
        out.regime = KmVarianceRegime::CensoringAucAvg;
        out.b = 0.5 * (b_censor + b_auc);
    } else {
        out.regime = KmVarianceRegime::AucProportional;
        out.b = b_auc;
    }
    return out;
}

double km_variance_from_ci(double ci_lo, double ci_hi) {
    if (!(ci_hi >= ci_lo))
        throw Error(ErrorKind::BadInput, "km_variance_from_ci: interval reversed");
    const double half = 0.5 * (ci_hi - ci_lo);
    return (half / 1.96) * (half / 1.96);
}

EeDensity ee_density(double s_plus, double b, double n, double lb, double ub) {
    if (lb > ub)
        throw Error(ErrorKind::InconsistentBounds, "ee_density: lb > ub");
    EeDensity d;
    d.lb_raw = lb;
    d.ub_raw = ub;
    d.variance = n * n * b;
    d.center = s_plus;
    if (s_plus < lb || s_plus > ub) {
        d.center = std::clamp(s_plus, lb, ub);
        d.clamped = true;
    }
    const double m = std::min(d.center - lb, ub - d.center);
    d.lb_sym = d.center - m;
    d.ub_sym = d.center + m;
    return d;
}

EeDensity ee_recenter(const EeDensity& base, double new_center) {
    EeDensity d = base;
    d.clamped = false;
    d.center = new_center;
    if (new_center < d.lb_raw || new_center > d.ub_raw) {
        d.center = std::clamp(new_center, d.lb_raw, d.ub_raw);
        d.clamped = true;
    }
    const double m = std::min(d.center - d.lb_raw, d.ub_raw - d.center);
    d.lb_sym = d.center - m;
    d.ub_sym = d.center + m;
    return d;
}

NoKmEstimate no_km_death_estimate(double e, double n, double auc_fraction) {
    NoKmEstimate out;
    const double raw = e / n;
    out.domain_ok = raw > 0.0 && raw < 0.5 && auc_fraction > 0.0 && auc_fraction < 0.5;
    out.k_star = out.domain_ok ? raw / (1.0 - auc_fraction) : raw;
    out.s_plus = n * out.k_star;
    return out;
}

} // namespace metaor
